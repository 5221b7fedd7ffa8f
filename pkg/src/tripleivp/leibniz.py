"""W', W'' and W''' by differentiation under the integral sign.

With ``F(x, y)`` the innermost integral over ``z``::

    W'(x)   = int F dy
    W''(x)  = int F_x dy + F(x, y1) y1' - F(x, y0) y0'
    W'''(x) = int F_xx dy + F_x(x, y1) y1' - F_x(x, y0) y0'
              + [F_x(x, y1) + F_y(x, y1) y1'] y1' + F(x, y1) y1''
              - [F_x(x, y0) + F_y(x, y0) y0'] y0' - F(x, y0) y0''

and the partials of ``F`` carry their own boundary terms from the
z-limits, e.g. ``F_x = int f_x dz + f(z1) z1_x - f(z0) z0_x``.  Boundary terms
are built symbolically (the z-limit is substituted into ``f``) so every value
comes from quadrature of exact partials; nothing is finite-differenced.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._program import compile_program
from .expr import Constant, compile_vectorized, simplify, substitute
from .problem import DerivativeBundle, TripleIntegralProblem, derivatives
from .quad import DEFAULT, QuadConfig, nested


@dataclass(frozen=True)
class InitialConditions:
    w0: float
    p0: float
    q0: float


def _is_zero(e):
    return isinstance(e, Constant) and e.value == 0.0


def _at(e, z_limit):
    return substitute(e, "z", z_limit)


@dataclass
class LeibnizEvaluator:
    """Evaluates F, its partials, W', W'' and W''' for one problem.

    Stateless after construction; compiled programs are built once here.
    """

    problem: TripleIntegralProblem
    bundle: DerivativeBundle | None = None
    cfg: QuadConfig = DEFAULT
    backend: str | None = None
    _p: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.bundle is None:
            self.bundle = derivatives(self.problem)
        p, d = self.problem, self.bundle
        z0, z1 = p.z0, p.z1
        # boundary terms from the z-limits, as expressions in (x, y)
        bx = simplify(_at(p.f, z1) * d.z1x - _at(p.f, z0) * d.z0x)
        by = simplify(_at(p.f, z1) * d.z1y - _at(p.f, z0) * d.z0y)
        bxx = simplify(
            (Constant(2.0) * _at(d.fx, z1) * d.z1x + _at(d.fz, z1) * d.z1x * d.z1x + _at(p.f, z1) * d.z1xx)
            - (Constant(2.0) * _at(d.fx, z0) * d.z0x + _at(d.fz, z0) * d.z0x * d.z0x + _at(p.f, z0) * d.z0xx)
        )
        named = {
            "f": p.f, "fx": d.fx, "fy": d.fy, "fxx": d.fxx,
            "y0": p.y0, "y1": p.y1, "z0": z0, "z1": z1,
            "y0p": d.y0p, "y1p": d.y1p, "y0pp": d.y0pp, "y1pp": d.y1pp,
            "bx": bx, "by": by, "bxx": bxx,
        }
        self._p = {k: compile_program(e) for k, e in named.items()}
        self._zero = {k: _is_zero(e) for k, e in named.items()}
        self._r_vec = compile_vectorized(p.r_closed) if p.r_closed is not None else None

    def _val(self, name, x, y=0.0):
        return self._p[name].fn(x, y, 0.0)

    def _z_integral(self, integrand, x, y, boundary=None):
        p = self._p
        za, zb = self._val("z0", x, y), self._val("z1", x, y)
        v = 0.0 if za == zb else nested(p[integrand], ("z",), za, zb, fixed=(x, y, 0.0), cfg=self.cfg,
                                        backend=self.backend)
        if boundary is not None and not self._zero[boundary]:
            v += self._val(boundary, x, y)
        return v

    def _y_integral(self, integrand, x, boundary=None):
        p = self._p
        ya, yb = self._val("y0", x), self._val("y1", x)
        if ya == yb:
            return 0.0
        extra = None if boundary is None or self._zero[boundary] else p[boundary]
        return nested(p[integrand], ("y", "z"), ya, yb, limits=[(p["z0"], p["z1"])], extras=[extra],
                      fixed=(x, 0.0, 0.0), cfg=self.cfg, backend=self.backend)

    # -- F and its partials ------------------------------------------------

    def eval_F(self, x, y):
        return self._z_integral("f", x, y)

    def eval_F_partials(self, x, y):
        """Return ``(F_x, F_y, F_xx)`` at ``(x, y)``."""
        return (
            self._z_integral("fx", x, y, "bx"),
            self._z_integral("fy", x, y, "by"),
            self._z_integral("fxx", x, y, "bxx"),
        )

    def _fx(self, x, y):
        return self._z_integral("fx", x, y, "bx")

    def _fy(self, x, y):
        return self._z_integral("fy", x, y, "by")

    # -- W derivatives -----------------------------------------------------

    def eval_W1(self, x):
        return self._y_integral("f", x)

    def eval_W2(self, x):
        v = self._y_integral("fx", x, "bx")
        for name, sign, lim in (("y1p", 1.0, "y1"), ("y0p", -1.0, "y0")):
            if not self._zero[name]:
                v += sign * self.eval_F(x, self._val(lim, x)) * self._val(name, x)
        return v

    def eval_R(self, x, mode="auto"):
        """W'''(x); ``mode`` is "auto", "closed" (needs a closed form) or "leibniz"."""
        if mode not in ("auto", "closed", "leibniz"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "closed" or (mode == "auto" and self._r_vec is not None):
            if self._r_vec is None:
                raise ValueError("problem has no closed-form R")
            return self.problem.programs["r_closed"].fn(x, 0.0, 0.0)
        return self.leibniz_R(x)

    def leibniz_R(self, x):
        v = self._y_integral("fxx", x, "bxx")
        for sign, lim, d1, d2 in ((1.0, "y1", "y1p", "y1pp"), (-1.0, "y0", "y0p", "y0pp")):
            if self._zero[d1] and self._zero[d2]:
                continue
            y = self._val(lim, x)
            dy, ddy = self._val(d1, x), self._val(d2, x)
            term = 0.0
            if not self._zero[d1]:
                fx = self._fx(x, y)
                term += fx * dy + (fx + self._fy(x, y) * dy) * dy
            if not self._zero[d2]:
                term += self.eval_F(x, y) * ddy
            v += sign * term
        return v

    def r_values(self, xs, mode="auto"):
        """W''' on an array of nodes (vectorised for closed forms)."""
        xs = np.asarray(xs, dtype=float)
        if mode == "closed" or (mode == "auto" and self._r_vec is not None):
            if self._r_vec is None:
                raise ValueError("problem has no closed-form R")
            with np.errstate(invalid="ignore"):
                return self._r_vec(xs)
        return np.array([self.leibniz_R(float(x)) for x in xs])

    def initial_conditions(self):
        x0 = self.problem.x0
        return InitialConditions(0.0, self.eval_W1(x0), self.eval_W2(x0))


def eval_F(ev, x, y):
    return ev.eval_F(x, y)


def eval_F_partials(ev, x, y):
    return ev.eval_F_partials(x, y)


def eval_W1(ev, x):
    return ev.eval_W1(x)


def eval_W2(ev, x):
    return ev.eval_W2(x)


def eval_R(ev, x, mode="auto"):
    return ev.eval_R(x, mode)


def initial_conditions(ev):
    return ev.initial_conditions()
