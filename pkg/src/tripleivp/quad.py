"""Adaptive Simpson quadrature in one, two and three nested dimensions.

This is deliberately independent of the Euler/Richardson pipeline: it is the
oracle used to check it.  Nested levels tighten the absolute tolerance by a
factor of 10 each (outer ``tol``, inner ``tol/10``, innermost ``tol/100``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import _pykernels, kernels
from ._program import Program, compile_program
from .errors import DepthExceeded, DomainError, NonFiniteSample
from .expr import Variable, parse


@dataclass(frozen=True)
class QuadConfig:
    """Quadrature settings.

    ``min_interval`` is scaled by ``1 + |b - a|`` of each integration call, so
    the default stops refinement at roughly 1e-13 relative width.
    """

    tol: float = 1e-10
    max_depth: int = 40
    min_interval: float = 1e-13

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if not self.min_interval > 0:
            raise ValueError("min_interval must be positive")

    def with_tol(self, tol):
        return QuadConfig(tol=tol, max_depth=self.max_depth, min_interval=self.min_interval)


DEFAULT = QuadConfig()
# three nested levels cost ~tol**-0.75; 1e-7 keeps the oracle near one second
ORACLE_DEFAULT = QuadConfig(tol=1e-7)

_SLOT = {"x": 0, "y": 1, "z": 2}


def _check(result):
    value, status, level, failures = result
    if status == _pykernels.ST_DOMAIN:
        raise DomainError(f"integrand or limit left its domain at nesting level {level}")
    if status == _pykernels.ST_NONFINITE:
        raise NonFiniteSample(level)
    for lvl, count in enumerate(failures):
        if count:
            raise DepthExceeded(value, level=lvl, failures=count)
    return value


def as_program(e) -> Program:
    if isinstance(e, Program):
        return e
    if isinstance(e, str):
        e = parse(e)
    return compile_program(e)


def nested(integrand, variables, a, b, limits=(), extras=(), fixed=(0.0, 0.0, 0.0), cfg=DEFAULT,
           backend=None) -> float:
    """Integrate an expression over nested variables.

    ``variables`` lists the integration variables outermost first; the
    outermost runs over ``[a, b]`` and each further one over the bounds in
    ``limits`` (pairs of expressions in the outer variables).  ``extras``, one
    per inner level (or None), are added to that level's integral before the
    next level out integrates it.
    """
    slots = tuple(_SLOT[v] for v in variables)
    limits = list(limits)
    if len(limits) != len(slots) - 1:
        raise ValueError("need one (lower, upper) pair per inner variable")
    extras = list(extras) or [None] * (len(slots) - 1)
    lo = [as_program(pair[0]) for pair in limits]
    hi = [as_program(pair[1]) for pair in limits]
    ex = [as_program(e) if e is not None else None for e in extras]
    return _check(
        kernels.nested_integrate(
            as_program(integrand), slots, lo, hi, ex, fixed, a, b, cfg.tol, cfg.max_depth, cfg.min_interval,
            backend=backend,
        )
    )


def integrate1d(g: Callable[[float], float], a: float, b: float, cfg: QuadConfig = DEFAULT) -> float:
    """Adaptive Simpson integral of a Python callable over ``[a, b]``.

    Reversed limits flip the sign of the forward integral; ``a == b`` gives 0.
    """
    if a == b:
        return 0.0
    if b < a:
        return -integrate1d(g, b, a, cfg)
    # reuse the kernel machinery through a one-level nest on a dummy program
    prog = Program(
        expr=Variable("x"), ops=None, args=None, stack_size=0, fn=lambda x, y, z: g(x)
    )
    return _check(
        _pykernels.nested_integrate(prog, (0,), [], [], [], (0.0, 0.0, 0.0), a, b, cfg.tol,
                                    cfg.max_depth, cfg.min_interval)
    )


def integrate2d(p, x: float, cfg: QuadConfig = DEFAULT, backend=None) -> float:
    """``W'(x)``: integral over ``y in [y0(x), y1(x)]`` of ``F(x, y)``.

    ``F`` is the inner integral over ``z in [z0(x,y), z1(x,y)]`` at ``cfg.tol/10``.
    """
    ya = float(p.y0_fn(x, 0.0, 0.0))
    yb = float(p.y1_fn(x, 0.0, 0.0))
    pr = p.programs
    return nested(pr["f"], ("y", "z"), ya, yb, limits=[(pr["z0"], pr["z1"])], fixed=(x, 0.0, 0.0),
                  cfg=cfg, backend=backend)


def integrate3d_oracle(p, cfg: QuadConfig = ORACLE_DEFAULT, backend=None) -> float:
    """Full triple integral over x, y, z with tolerances tol, tol/10, tol/100."""
    pr = p.programs
    return nested(pr["f"], ("x", "y", "z"), p.x0, p.x_end,
                  limits=[(pr["y0"], pr["y1"]), (pr["z0"], pr["z1"])], cfg=cfg, backend=backend)
