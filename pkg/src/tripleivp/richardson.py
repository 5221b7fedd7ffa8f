"""Richardson extrapolation of halved-step Euler runs.

``K_n`` is the Euler value with step ``h / 2**n``.  An order-s estimate is
``M_s = sum(d_n * K_n, n = 0..s-1)`` where ``d`` solves ``A d = e_1`` with
``A[i][j] = (1/2**i)**j`` (0-based), i.e. the weights sum to one and cancel
the ``h, h**2, ..., h**(s-1)`` error terms.  The weights are found exactly in
rational arithmetic and converted to floats once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import NonFiniteState, NonIntegerStepCount, OrderOutOfRange
from .ivp import Trajectory, node_grid, r_table, run_halved, step_size
from .leibniz import InitialConditions

MAX_ORDER = 12


def solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals (no rounding anywhere)."""
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(rhs)] for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        pv = m[col][col]
        m[col] = [v / pv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [v - factor * w for v, w in zip(m[r], m[col])]
    return [row[n] for row in m]


def halving_matrix(s: int) -> list[list[Fraction]]:
    return [[Fraction(1, 2**i) ** j for j in range(s)] for i in range(s)]


@lru_cache(maxsize=None)
def _coefficients(s):
    rhs = [Fraction(1)] + [Fraction(0)] * (s - 1)
    return tuple(solve_exact(halving_matrix(s), rhs))


def coefficients(s: int) -> tuple[Fraction, ...]:
    """Exact weights ``d_0..d_{s-1}`` of the order-s combination (2 <= s <= 12)."""
    if not isinstance(s, (int, np.integer)) or not 2 <= s <= MAX_ORDER:
        raise OrderOutOfRange(f"order must be an integer in [2, {MAX_ORDER}], got {s!r}")
    return _coefficients(int(s))


def format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class ExtrapolationResult:
    order: int
    coefficients: tuple[Fraction, ...]
    base_h: float
    xs: np.ndarray
    k_values: np.ndarray  # shape (order, nodes): row n is level-n W on level-0 nodes
    m_s: np.ndarray

    @property
    def euler(self):
        return self.k_values[0]

    @property
    def per_node(self):
        return [
            (float(x), tuple(float(v) for v in self.k_values[:, i]), float(self.m_s[i]))
            for i, x in enumerate(self.xs)
        ]

    @property
    def final(self):
        return float(self.m_s[-1])


def combine(k_values: np.ndarray, coeffs) -> np.ndarray:
    """``sum(d_n * K_n)`` accumulated in level order."""
    out = np.zeros(k_values.shape[1])
    for d, k in zip(coeffs, k_values):
        out = out + float(d) * k
    return out


def level_runs(r, ic: InitialConditions, x0, x_end, n_base, levels, backend=None) -> list[Trajectory]:
    """Euler runs for levels ``0..levels-1`` sharing one R table on the finest grid."""
    finest = r_table(r, x0, x_end, n_base * 2 ** (levels - 1))
    return [run_halved(finest, ic, x0, x_end, n_base, k, backend=backend) for k in range(levels)]


def aligned_w(runs: list[Trajectory]) -> np.ndarray:
    """Stack level-k W values restricted to the level-0 nodes."""
    return np.vstack([t.w[:: 2**k] for k, t in enumerate(runs)])


def aligned_levels(r, ic: InitialConditions, x0, x_end, n_base, levels, backend=None) -> np.ndarray:
    """Same as ``aligned_w(level_runs(...))`` in one fused kernel call."""
    if n_base < 1:
        raise ValueError("n_base must be at least 1")
    finest = r_table(r, x0, x_end, n_base * 2 ** (levels - 1))
    k, bad_level, bad_index = kernels.euler_levels(
        np.ascontiguousarray(finest.values), finest.h, ic.w0, ic.p0, ic.q0, n_base, levels, backend=backend
    )
    if bad_level >= 0:
        raise NonFiniteState(bad_index)
    return k


def extrapolate(r, ic: InitialConditions, x0, x_end, n_base: int, s: int, backend=None,
                runs=None, k_values=None) -> ExtrapolationResult:
    """Order-s Richardson estimate at every level-0 node.

    ``runs`` (trajectories) or ``k_values`` (aligned W rows) may pass
    precomputed levels, at least ``s`` of them.
    """
    d = coefficients(s)
    if n_base < 1:
        raise ValueError("n_base must be at least 1")
    if k_values is not None:
        k = np.asarray(k_values)[:s]
    elif runs is not None:
        k = aligned_w(runs[:s])
    else:
        k = aligned_levels(r, ic, x0, x_end, n_base, s, backend=backend)
    h = step_size(x0, x_end, n_base)
    return ExtrapolationResult(
        order=s, coefficients=d, base_h=h, xs=node_grid(x0, h, n_base), k_values=k, m_s=combine(k, d),
    )


def step_count(h, span):
    """Integer step count for ``h``; raises unless ``h`` divides ``span``."""
    if not h > 0:
        raise NonIntegerStepCount(h, span)
    ratio = span / h
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise NonIntegerStepCount(h, span)
    return int(n)


def fit_slope(hs, errors, floor=0.0):
    """Least-squares slope of log(error) against log(h).

    Points with error at or below ``floor`` (the roundoff level) are dropped;
    returns None when fewer than two points remain.
    """
    pts = [(math.log(h), math.log(e)) for h, e in zip(hs, errors) if e > floor]
    if len(pts) < 2:
        return None
    lx, le = np.array(pts).T
    return float(np.polyfit(lx, le, 1)[0])


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    n: int
    euler: float
    m: dict  # order -> M_s(x_end)
    err_euler: float
    err_m: dict  # order -> |M_s(x_end) - reference|


@dataclass(frozen=True)
class ConvergenceTable:
    reference: float
    orders: tuple[int, ...]
    rows: list[ConvergenceRow]
    slopes: dict  # "euler" or order -> fitted slope (None if not fittable)


def roundoff_floor(reference):
    return 1000.0 * np.finfo(float).eps * max(1.0, abs(reference))


def convergence_table(r, ic: InitialConditions, x0, x_end, h_list, orders=(2, 3, 4), reference=None,
                      backend=None) -> ConvergenceTable:
    """Euler and M_s values at ``x_end`` for each step size, with fitted slopes.

    ``reference`` defaults to the quadrature oracle of the evaluator's problem.
    """
    h_list = [float(h) for h in h_list]
    if not h_list:
        raise ValueError("h_list is empty")
    orders = tuple(int(s) for s in orders)
    for s in orders:
        coefficients(s)
    span = x_end - x0
    counts = [step_count(h, span) for h in h_list]
    if reference is None:
        from .quad import integrate3d_oracle

        reference = integrate3d_oracle(r.problem)
    levels = max(orders, default=1)
    rows = []
    for h, n in zip(h_list, counts):
        k = aligned_levels(r, ic, x0, x_end, n, levels, backend=backend)
        euler = float(k[0, -1])
        m = {s: extrapolate(r, ic, x0, x_end, n, s, k_values=k).final for s in orders}
        rows.append(ConvergenceRow(
            h=h, n=n, euler=euler, m=m, err_euler=abs(euler - reference),
            err_m={s: abs(v - reference) for s, v in m.items()},
        ))
    slopes = {}
    if len(rows) > 1:
        floor = roundoff_floor(reference)
        slopes["euler"] = fit_slope(h_list, [row.err_euler for row in rows], floor)
        for s in orders:
            slopes[s] = fit_slope(h_list, [row.err_m[s] for row in rows], floor)
    return ConvergenceTable(reference=reference, orders=orders, rows=rows, slopes=slopes)
