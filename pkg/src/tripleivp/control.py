"""Tolerance-driven step-size selection.

A pilot run at step ``h`` gives ``M4`` and ``M5`` at every node; their
difference estimates the leading error of ``M4`` so that
``abar4(x_i) = (M4(x_i, h) - M5(x_i, h)) / h**4``.  For a tolerance ``delta``
the new step is ``H = (delta / max|abar4|)**(1/4)``.  The run uses
``n = ceil((x_end - x0) / H)`` steps of ``h = (x_end - x0) / n <= H`` and
repeats the order-4 extrapolation with them.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveTolerance, RoundoffFloor
from .ivp import step_size
from .leibniz import LeibnizEvaluator
from .problem import TripleIntegralProblem, validate
from .quad import QuadConfig, integrate3d_oracle
from .richardson import ExtrapolationResult, aligned_levels, extrapolate

log = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)
DEFAULT_PILOT_STEP = 0.01


@dataclass(frozen=True)
class ErrorEstimate:
    xs: np.ndarray
    a4bar: np.ndarray
    max_abs_a4bar: float
    a4: float  # 64 * abar4 at the node attaining the maximum
    h: float

    @property
    def per_node_a4bar(self):
        return list(zip(map(float, self.xs), map(float, self.a4bar)))

    @property
    def argmax(self):
        return int(np.argmax(np.abs(self.a4bar)))


@dataclass(frozen=True)
class ToleranceReport:
    delta: float
    h_pilot: float
    estimate: ErrorEstimate | None
    H: float
    n: int
    h_final: float
    w_final: float
    error_vs_oracle: float | None = None
    roundoff_floor: bool = False
    iterations: int = 1
    result: ExtrapolationResult | None = None


def a4bar_from(m4: np.ndarray, m5: np.ndarray, h: float) -> np.ndarray:
    return (m4 - m5) / h**4


def estimate_from(xs, m4, m5, h) -> ErrorEstimate:
    a4bar = a4bar_from(np.asarray(m4), np.asarray(m5), h)
    i = int(np.argmax(np.abs(a4bar)))
    return ErrorEstimate(xs=np.asarray(xs), a4bar=a4bar, max_abs_a4bar=float(abs(a4bar[i])),
                         a4=64.0 * float(a4bar[i]), h=h)


def at_roundoff_floor(m4, m5) -> bool:
    m4 = np.asarray(m4)
    diff = float(np.max(np.abs(m4 - m5)))
    return diff < 100.0 * EPS * max(1.0, float(np.max(np.abs(m4))))


def estimate_a4_bar(ev, ic, x0, x_end, n_base: int, backend=None):
    """Per-node ``abar4`` from a pilot with ``n_base`` steps.

    Returns ``(estimate, pilot M4 result)``; raises :class:`RoundoffFloor` when
    ``M4 - M5`` is at the arithmetic noise level everywhere.
    """
    h = step_size(x0, x_end, n_base)
    k = aligned_levels(ev, ic, x0, x_end, n_base, 5, backend=backend)
    m4 = extrapolate(ev, ic, x0, x_end, n_base, 4, k_values=k)
    m5 = extrapolate(ev, ic, x0, x_end, n_base, 5, k_values=k)
    est = estimate_from(m4.xs, m4.m_s, m5.m_s, h)
    if at_roundoff_floor(m4.m_s, m5.m_s):
        raise RoundoffFloor(est, m4)
    return est, m4


def select_stepsize(delta: float, max_abs_a4bar: float, x0: float, x_end: float):
    """Return ``(H, n, h)`` for tolerance ``delta``.

    A zero coefficient (nothing to control) clamps ``H`` to the whole span.
    """
    if not delta > 0:
        raise NonPositiveTolerance(f"tolerance must be positive, got {delta!r}")
    if max_abs_a4bar < 0:
        raise ValueError("max_abs_a4bar must be non-negative")
    span = x_end - x0
    if not span > 0:
        raise ValueError("x_end must exceed x0")
    if max_abs_a4bar == 0.0:
        H = span
    else:
        H = (delta / max_abs_a4bar) ** 0.25
    n = math.ceil(span / H)
    return H, n, span / n


def solve_with_tolerance(problem: TripleIntegralProblem, delta: float, n_pilot: int | None = None,
                         oracle: bool = False, iterate: bool = False, cfg: QuadConfig | None = None,
                         ev: LeibnizEvaluator | None = None, backend=None, max_iterations: int = 10):
    """Pilot run, step selection and a final order-4 extrapolation.

    With ``iterate`` the selected step becomes the next pilot until two
    successive steps agree within 5%.  If the pilot is at the roundoff floor
    its ``M4`` is accepted as the answer.
    """
    if not delta > 0:
        raise NonPositiveTolerance(f"tolerance must be positive, got {delta!r}")
    validate(problem)
    if ev is None:
        ev = LeibnizEvaluator(problem, cfg=cfg) if cfg is not None else LeibnizEvaluator(problem)
    x0, x_end = problem.x0, problem.x_end
    span = x_end - x0
    if span == 0.0:
        return ToleranceReport(delta=delta, h_pilot=0.0, estimate=None, H=0.0, n=1, h_final=0.0,
                               w_final=0.0, error_vs_oracle=0.0 if oracle else None)
    if n_pilot is None:
        n_pilot = max(1, math.ceil(span / DEFAULT_PILOT_STEP))
    ic = ev.initial_conditions()

    n_current = n_pilot
    iterations = 0
    while True:
        iterations += 1
        h_pilot = span / n_current
        try:
            est, _ = estimate_a4_bar(ev, ic, x0, x_end, n_current, backend=backend)
        except RoundoffFloor as exc:
            log.info("pilot at roundoff floor (h=%g); accepting pilot M4", h_pilot)
            pilot = exc.pilot
            err = abs(pilot.final - integrate3d_oracle(problem)) if oracle else None
            return ToleranceReport(delta=delta, h_pilot=h_pilot, estimate=exc.estimate, H=h_pilot,
                                   n=n_current, h_final=h_pilot, w_final=pilot.final, error_vs_oracle=err,
                                   roundoff_floor=True, iterations=iterations, result=pilot)
        H, n, h = select_stepsize(delta, est.max_abs_a4bar, x0, x_end)
        log.info("pilot h=%g max|abar4|=%g -> H=%g n=%d", h_pilot, est.max_abs_a4bar, H, n)
        if not iterate or abs(h - h_pilot) <= 0.05 * h_pilot or iterations >= max_iterations:
            break
        n_current = n

    final = extrapolate(ev, ic, x0, x_end, n, 4, backend=backend)
    err = abs(final.final - integrate3d_oracle(problem)) if oracle else None
    return ToleranceReport(delta=delta, h_pilot=h_pilot, estimate=est, H=H, n=n, h_final=h,
                           w_final=final.final, error_vs_oracle=err, iterations=iterations, result=final)
