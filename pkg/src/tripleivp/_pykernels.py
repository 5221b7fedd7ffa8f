"""Pure-Python kernels, used when the compiled extension is unavailable.

Same algorithms and the same floating-point operation order as
``_ckernels.pyx``.
"""
import math

import numpy as np

from .errors import DomainError

ST_OK, ST_DOMAIN, ST_NONFINITE = 0, 1, 2
MIN_DEPTH = 3


class _Abort(Exception):
    pass


class _Nest:
    def __init__(self, integrand, slots, lo, hi, extra, fixed, tol, max_depth, min_interval):
        self.f = integrand.fn
        self.slots = slots
        self.nlev = len(slots)
        # index k refers to nesting level k; level 0 bounds are numbers
        self.lo = [None] + [p.fn for p in lo]
        self.hi = [None] + [p.fn for p in hi]
        self.extra = [None] + [p.fn if p is not None else None for p in extra]
        self.vars = list(fixed)
        self.level_tol = [tol / (10.0**k) for k in range(self.nlev)]
        self.max_depth = max_depth
        self.min_interval = min_interval
        self.status = ST_OK
        self.status_level = -1
        self.fail = [0] * self.nlev

    def _flag(self, status, level):
        self.status = status
        if self.status_level < 0:
            self.status_level = level
        raise _Abort

    def sample(self, level, t):
        v = self.vars
        v[self.slots[level]] = t
        try:
            if level == self.nlev - 1:
                val = self.f(v[0], v[1], v[2])
            else:
                try:
                    lo = self.lo[level + 1](v[0], v[1], v[2])
                    hi = self.hi[level + 1](v[0], v[1], v[2])
                except DomainError:
                    self._flag(ST_DOMAIN, level + 1)
                val = self.integrate(level + 1, lo, hi, self.level_tol[level + 1])
                v[self.slots[level]] = t
                ex = self.extra[level + 1]
                if ex is not None:
                    val += ex(v[0], v[1], v[2])
        except DomainError:
            self._flag(ST_DOMAIN, level)
        if not math.isfinite(val):
            self._flag(ST_NONFINITE, level)
        return val

    def integrate(self, level, a, b, tol):
        if a == b:
            return 0.0
        if b < a:
            return -self.integrate(level, b, a, tol)
        min_w = self.min_interval * (1.0 + (b - a))
        fa = self.sample(level, a)
        fm = self.sample(level, 0.5 * (a + b))
        fb = self.sample(level, b)
        whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        return self.recurse(level, a, b, fa, fm, fb, whole, tol, 0, min_w)

    def recurse(self, level, a, b, fa, fm, fb, whole, tol, depth, min_w):
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = self.sample(level, lm)
        frm = self.sample(level, rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * tol and (depth >= MIN_DEPTH or depth >= self.max_depth or (b - a) <= min_w):
            return left + right + delta / 15.0
        if depth >= self.max_depth or (b - a) <= min_w:
            self.fail[level] += 1
            return left + right + delta / 15.0
        lv = self.recurse(level, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, min_w)
        return lv + self.recurse(level, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, min_w)


def nested_integrate(integrand, slots, lo, hi, extra, fixed, a, b, tol, max_depth, min_interval):
    """Nested adaptive Simpson quadrature over up to three levels.

    ``slots[k]`` is the variable slot (0=x, 1=y, 2=z) integrated at level k;
    level 0 runs over ``[a, b]`` and level k >= 1 over
    ``[lo[k-1](vars), hi[k-1](vars)]``, with ``extra[k-1](vars)`` (if not
    None) added to each level-k integral.  Level k uses ``tol / 10**k``.

    Returns ``(value, status, status_level, failures)`` with status 0 (ok),
    1 (domain error) or 2 (non-finite sample) and the per-level count of
    subintervals that hit the refinement limit.
    """
    nest = _Nest(integrand, slots, lo, hi, extra, fixed, tol, max_depth, min_interval)
    try:
        value = nest.integrate(0, a, b, tol)
    except _Abort:
        value = 0.0
    return value, nest.status, nest.status_level, list(nest.fail)


def euler_march(r, h, w0, p0, q0, n):
    if len(r) < n:
        raise ValueError("R table shorter than the step count")
    W = np.empty(n + 1)
    P = np.empty(n + 1)
    Q = np.empty(n + 1)
    w, p, q = float(w0), float(p0), float(q0)
    W[0], P[0], Q[0] = w, p, q
    rl = [float(v) for v in r[:n]]
    isfinite = math.isfinite
    for i in range(n):
        w, p, q = w + h * p, p + h * q, q + h * rl[i]
        W[i + 1], P[i + 1], Q[i + 1] = w, p, q
        if not (isfinite(w) and isfinite(p) and isfinite(q)):
            return W, P, Q, i + 1
    return W, P, Q, -1


def euler_levels(r, h_fine, w0, p0, q0, n_base, levels):
    """W for levels ``0..levels-1`` on the level-0 nodes; see ``_ckernels``."""
    K = np.empty((levels, n_base + 1))
    for k in range(levels):
        stride = 1 << (levels - 1 - k)
        n = n_base << k
        W, _, _, bad = euler_march(r[::stride], h_fine * stride, w0, p0, q0, n)
        if bad >= 0:
            return K, k, bad
        K[k] = W[:: 1 << k]
    return K, -1, -1
