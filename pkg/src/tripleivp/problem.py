"""Triple integrals with x-dependent limits.

``W(t)`` is the integral of ``f(x, y, z)`` over ``x in [x0, t]``,
``y in [y0(x), y1(x)]`` and ``z in [z0(x, y), z1(x, y)]``; the quantity of
interest is ``W(x_end)``.  ``f`` and the limits are assumed twice continuously
differentiable on the region; this is not checked.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from ._program import compile_program
from .errors import BoundsError, VariableScopeError
from .expr import Expr, differentiate, free_vars, parse

_ALLOWED = {
    "f": {"x", "y", "z"},
    "y0": {"x"},
    "y1": {"x"},
    "z0": {"x", "y"},
    "z1": {"x", "y"},
    "r_closed": {"x"},
}


@dataclass(frozen=True)
class TripleIntegralProblem:
    f: Expr
    y0: Expr
    y1: Expr
    z0: Expr
    z1: Expr
    x0: float
    x_end: float
    r_closed: Expr | None = None

    def __post_init__(self):
        for name in ("f", "y0", "y1", "z0", "z1", "r_closed"):
            v = getattr(self, name)
            if isinstance(v, str):
                object.__setattr__(self, name, parse(v))
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "x_end", float(self.x_end))

    @property
    def span(self):
        return self.x_end - self.x0

    def validate(self):
        return validate(self)

    def derivatives(self):
        return derivatives(self)

    @cached_property
    def programs(self):
        """Compiled forms of every expression field (None for a missing R)."""
        out = {name: compile_program(getattr(self, name)) for name in ("f", "y0", "y1", "z0", "z1")}
        out["r_closed"] = compile_program(self.r_closed) if self.r_closed is not None else None
        return out

    @property
    def y0_fn(self):
        return self.programs["y0"].fn

    @property
    def y1_fn(self):
        return self.programs["y1"].fn

    def with_limits(self, x0=None, x_end=None):
        return TripleIntegralProblem(
            self.f, self.y0, self.y1, self.z0, self.z1,
            self.x0 if x0 is None else x0, self.x_end if x_end is None else x_end, self.r_closed,
        )


def validate(p: TripleIntegralProblem) -> TripleIntegralProblem:
    """Check variable scopes and the outer interval; return ``p`` unchanged."""
    for name, allowed in _ALLOWED.items():
        e = getattr(p, name)
        if e is None:
            continue
        extra = free_vars(e) - allowed
        if extra:
            raise VariableScopeError(name, sorted(extra)[-1])
    if p.x_end < p.x0:
        raise BoundsError(f"x_end ({p.x_end}) is below x0 ({p.x0})")
    return p


@dataclass(frozen=True)
class DerivativeBundle:
    fx: Expr
    fy: Expr
    fz: Expr
    fxx: Expr
    y0p: Expr
    y1p: Expr
    y0pp: Expr
    y1pp: Expr
    z0x: Expr
    z1x: Expr
    z0y: Expr
    z1y: Expr
    z0xx: Expr
    z1xx: Expr


def derivatives(p: TripleIntegralProblem) -> DerivativeBundle:
    fx = differentiate(p.f, "x")
    y0p = differentiate(p.y0, "x")
    y1p = differentiate(p.y1, "x")
    z0x = differentiate(p.z0, "x")
    z1x = differentiate(p.z1, "x")
    return DerivativeBundle(
        fx=fx,
        fy=differentiate(p.f, "y"),
        fz=differentiate(p.f, "z"),
        fxx=differentiate(fx, "x"),
        y0p=y0p,
        y1p=y1p,
        y0pp=differentiate(y0p, "x"),
        y1pp=differentiate(y1p, "x"),
        z0x=z0x,
        z1x=z1x,
        z0y=differentiate(p.z0, "y"),
        z1y=differentiate(p.z1, "y"),
        z0xx=differentiate(z0x, "x"),
        z1xx=differentiate(z1x, "x"),
    )


def example_problem() -> TripleIntegralProblem:
    """sin(x+y+z) over z in [0, x+y], y in [0, x], x in [1, 5], with its closed-form W'''."""
    return TripleIntegralProblem(
        f=parse("sin(x+y+z)"),
        y0=parse("0"),
        y1=parse("x"),
        z0=parse("0"),
        z1=parse("x+y"),
        x0=1.0,
        x_end=5.0,
        r_closed=parse("8*sin(4*x) - 6*sin(2*x) + sin(x)"),
    )
