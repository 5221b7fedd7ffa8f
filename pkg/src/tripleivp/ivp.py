"""Explicit Euler for the system W' = P, P' = Q, Q' = R(x).

Nodes are ``x_i = x0 + i*h`` with ``h = (x_end - x0)/n``; computing nodes from
the index (never by accumulation) keeps halved grids exactly nested, which the
Richardson combination relies on.  ``R`` is sampled at the left node of each
step.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Union

import numpy as np

from . import kernels
from .errors import NonFiniteState
from .leibniz import InitialConditions, LeibnizEvaluator


@dataclass(frozen=True)
class IvpState:
    w: float
    p: float
    q: float


@dataclass(frozen=True)
class RTable:
    """W''' sampled on ``x0 + i*h`` for ``i = 0..n``."""

    x0: float
    h: float
    values: np.ndarray

    @property
    def n(self):
        return len(self.values) - 1

    def coarsen(self, stride: int) -> "RTable":
        if self.n % stride:
            raise ValueError(f"stride {stride} does not divide {self.n} steps")
        return RTable(self.x0, self.h * stride, self.values[::stride])


RSource = Union[LeibnizEvaluator, RTable, Callable[[float], float]]


@dataclass(frozen=True)
class Trajectory:
    x0: float
    h: float
    w: np.ndarray
    p: np.ndarray
    q: np.ndarray

    @property
    def n(self):
        return len(self.w) - 1

    @property
    def xs(self):
        return node_grid(self.x0, self.h, self.n)

    @property
    def nodes(self) -> Iterator[tuple[float, IvpState]]:
        for x, w, p, q in zip(self.xs, self.w, self.p, self.q):
            yield float(x), IvpState(float(w), float(p), float(q))


def node_grid(x0, h, n):
    return x0 + np.arange(n + 1) * h


def step_size(x0, x_end, n):
    if n < 1:
        raise ValueError("step count must be at least 1")
    if x_end < x0:
        raise ValueError("x_end must not be below x0")
    return (x_end - x0) / n


def r_table(r: RSource, x0: float, x_end: float, n: int) -> RTable:
    """Sample ``R`` on the n-step grid over ``[x0, x_end]``."""
    h = step_size(x0, x_end, n)
    if isinstance(r, RTable):
        if r.x0 != x0 or r.n % n or r.h * (r.n // n) != h:
            raise ValueError("R table grid does not contain the requested grid")
        return r.coarsen(r.n // n)
    xs = node_grid(x0, h, n)
    if isinstance(r, LeibnizEvaluator):
        values = r.r_values(xs)
    else:
        values = np.array([float(r(float(x))) for x in xs])
    return RTable(x0, h, np.ascontiguousarray(values, dtype=float))


def euler_solve(r: RSource, ic: InitialConditions, x0: float, x_end: float, n: int,
                backend=None) -> Trajectory:
    """n Euler steps of (W, P, Q) += h*(P, Q, R(x_i)) from ``ic`` at ``x0``."""
    table = r_table(r, x0, x_end, n)
    W, P, Q, bad = kernels.euler_march(
        np.ascontiguousarray(table.values), table.h, ic.w0, ic.p0, ic.q0, n, backend=backend
    )
    if bad >= 0:
        raise NonFiniteState(bad)
    return Trajectory(x0, table.h, W, P, Q)


def run_halved(r: RSource, ic: InitialConditions, x0: float, x_end: float, n_base: int, level: int,
               backend=None) -> Trajectory:
    """Euler on ``n_base * 2**level`` steps (step ``h / 2**level``)."""
    if level < 0:
        raise ValueError("level must be non-negative")
    return euler_solve(r, ic, x0, x_end, n_base * 2**level, backend=backend)
