# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: postfix expression interpreter, nested adaptive
Simpson quadrature and the Euler march.

Mirrors ``_pykernels`` operation for operation so both backends agree to
the last bit on the same platform.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, tan, exp, log, sqrt, pow, floor, fabs, isfinite

cnp.import_array()

cdef enum:
    MAX_STACK = 64
    MAX_LEVELS = 3
    # splits forced before the local test may accept; guards against a
    # coarse Simpson pair agreeing by accident
    MIN_DEPTH = 3

cdef enum:
    OP_CONST = 0
    OP_VAR = 1
    OP_NEG = 2
    OP_SIN = 3
    OP_COS = 4
    OP_TAN = 5
    OP_EXP = 6
    OP_LOG = 7
    OP_SQRT = 8
    OP_ADD = 9
    OP_SUB = 10
    OP_MUL = 11
    OP_DIV = 12
    OP_POW = 13

cdef enum:
    ST_OK = 0
    ST_DOMAIN = 1
    ST_NONFINITE = 2

ctypedef struct Prog:
    const int* ops
    const double* args
    int n

ctypedef struct Ctx:
    Prog integrand
    Prog lo[MAX_LEVELS]
    Prog hi[MAX_LEVELS]
    Prog extra[MAX_LEVELS]
    int has_extra[MAX_LEVELS]
    int slot[MAX_LEVELS]
    int nlev
    double vars[3]
    double level_tol[MAX_LEVELS]
    int max_depth
    double min_interval
    int status
    int status_level
    long fail[MAX_LEVELS]


cdef double run(const Prog* p, const double* vars, int* status) noexcept nogil:
    cdef double stack[MAX_STACK]
    cdef int sp = 0
    cdef int i, op
    cdef double a, b
    for i in range(p.n):
        op = p.ops[i]
        if op == OP_CONST:
            stack[sp] = p.args[i]
            sp += 1
        elif op == OP_VAR:
            stack[sp] = vars[<int>p.args[i]]
            sp += 1
        elif op <= OP_SQRT:
            a = stack[sp - 1]
            if op == OP_NEG:
                a = -a
            elif op == OP_SIN:
                a = sin(a)
            elif op == OP_COS:
                a = cos(a)
            elif op == OP_TAN:
                a = tan(a)
            elif op == OP_EXP:
                a = exp(a)
            elif op == OP_LOG:
                if a <= 0.0:
                    status[0] = ST_DOMAIN
                    return 0.0
                a = log(a)
            else:
                if a < 0.0:
                    status[0] = ST_DOMAIN
                    return 0.0
                a = sqrt(a)
            stack[sp - 1] = a
        else:
            b = stack[sp - 1]
            a = stack[sp - 2]
            sp -= 1
            if op == OP_ADD:
                a = a + b
            elif op == OP_SUB:
                a = a - b
            elif op == OP_MUL:
                a = a * b
            elif op == OP_DIV:
                if b == 0.0:
                    status[0] = ST_DOMAIN
                    return 0.0
                a = a / b
            else:
                if a == 0.0:
                    if b <= 0.0:
                        status[0] = ST_DOMAIN
                        return 0.0
                elif a < 0.0 and b != floor(b):
                    status[0] = ST_DOMAIN
                    return 0.0
                a = pow(a, b)
            stack[sp - 1] = a
    return stack[0]


cdef double sample(Ctx* c, int level, double t) noexcept nogil:
    cdef double v, lo, hi
    c.vars[c.slot[level]] = t
    if level == c.nlev - 1:
        v = run(&c.integrand, c.vars, &c.status)
    else:
        lo = run(&c.lo[level + 1], c.vars, &c.status)
        hi = run(&c.hi[level + 1], c.vars, &c.status)
        if c.status != ST_OK:
            c.status_level = level + 1
            return 0.0
        v = integrate(c, level + 1, lo, hi, c.level_tol[level + 1])
        # the inner call moved the inner slots; restore ours for extra
        c.vars[c.slot[level]] = t
        if c.status == ST_OK and c.has_extra[level + 1]:
            v += run(&c.extra[level + 1], c.vars, &c.status)
    if c.status != ST_OK:
        if c.status_level < 0:
            c.status_level = level
        return 0.0
    if not isfinite(v):
        c.status = ST_NONFINITE
        c.status_level = level
        return 0.0
    return v


cdef double recurse(Ctx* c, int level, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth, double min_w) noexcept nogil:
    cdef double m = 0.5 * (a + b)
    cdef double lm = 0.5 * (a + m)
    cdef double rm = 0.5 * (m + b)
    cdef double flm = sample(c, level, lm)
    if c.status != ST_OK:
        return 0.0
    cdef double frm = sample(c, level, rm)
    if c.status != ST_OK:
        return 0.0
    cdef double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    cdef double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    cdef double delta = left + right - whole
    if fabs(delta) <= 15.0 * tol and (depth >= MIN_DEPTH or depth >= c.max_depth or (b - a) <= min_w):
        return left + right + delta / 15.0
    if depth >= c.max_depth or (b - a) <= min_w:
        c.fail[level] += 1
        return left + right + delta / 15.0
    cdef double lv = recurse(c, level, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, min_w)
    if c.status != ST_OK:
        return 0.0
    return lv + recurse(c, level, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, min_w)


cdef double integrate(Ctx* c, int level, double a, double b, double tol) noexcept nogil:
    if a == b:
        return 0.0
    if b < a:
        return -integrate(c, level, b, a, tol)
    cdef double min_w = c.min_interval * (1.0 + (b - a))
    cdef double fa = sample(c, level, a)
    if c.status != ST_OK:
        return 0.0
    cdef double fm = sample(c, level, 0.5 * (a + b))
    if c.status != ST_OK:
        return 0.0
    cdef double fb = sample(c, level, b)
    if c.status != ST_OK:
        return 0.0
    cdef double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return recurse(c, level, a, b, fa, fm, fb, whole, tol, 0, min_w)


cdef void bind(Prog* p, object prog, list keep):
    cdef int[::1] ops = prog.ops
    cdef double[::1] args = prog.args
    keep.append(ops)
    keep.append(args)
    p.n = ops.shape[0]
    p.ops = &ops[0] if p.n else NULL
    p.args = &args[0] if p.n else NULL


def nested_integrate(integrand, tuple slots, list lo, list hi, list extra, tuple fixed,
                     double a, double b, double tol, int max_depth, double min_interval):
    """Return ``(value, status, status_level, failures)``; see ``_pykernels``."""
    cdef Ctx c
    cdef list keep = []
    cdef int k
    cdef int nlev = len(slots)
    if nlev < 1 or nlev > MAX_LEVELS:
        raise ValueError("between 1 and 3 nesting levels supported")
    c.nlev = nlev
    bind(&c.integrand, integrand, keep)
    for k in range(nlev):
        c.slot[k] = slots[k]
        c.fail[k] = 0
        c.has_extra[k] = 0
        c.level_tol[k] = tol / (10.0 ** k)
        if k >= 1:
            bind(&c.lo[k], lo[k - 1], keep)
            bind(&c.hi[k], hi[k - 1], keep)
            if extra[k - 1] is not None:
                bind(&c.extra[k], extra[k - 1], keep)
                c.has_extra[k] = 1
    for k in range(3):
        c.vars[k] = fixed[k]
    c.max_depth = max_depth
    c.min_interval = min_interval
    c.status = ST_OK
    c.status_level = -1
    cdef double value
    with nogil:
        value = integrate(&c, 0, a, b, tol)
    failures = [c.fail[k] for k in range(nlev)]
    return value, c.status, c.status_level, failures


def euler_march(double[::1] r, double h, double w0, double p0, double q0, Py_ssize_t n):
    """Explicit Euler for W' = P, P' = Q, Q' = r[i] on n steps.

    Returns ``(W, P, Q, bad)`` where ``bad`` is the first node index holding a
    non-finite state, or -1.
    """
    W = np.empty(n + 1)
    P = np.empty(n + 1)
    Q = np.empty(n + 1)
    cdef double[::1] wv = W
    cdef double[::1] pv = P
    cdef double[::1] qv = Q
    cdef double w = w0, p = p0, q = q0, wn, pn
    cdef Py_ssize_t i
    cdef Py_ssize_t bad = -1
    if r.shape[0] < n:
        raise ValueError("R table shorter than the step count")
    wv[0] = w
    pv[0] = p
    qv[0] = q
    with nogil:
        for i in range(n):
            wn = w + h * p
            pn = p + h * q
            q = q + h * r[i]
            w = wn
            p = pn
            wv[i + 1] = w
            pv[i + 1] = p
            qv[i + 1] = q
            if not (isfinite(w) and isfinite(p) and isfinite(q)):
                bad = i + 1
                break
    return W, P, Q, bad


def euler_levels(double[::1] r, double h_fine, double w0, double p0, double q0,
                 Py_ssize_t n_base, int levels):
    """W for levels ``0..levels-1`` sampled on the level-0 nodes.

    ``r`` lives on the finest grid (``n_base * 2**(levels-1)`` steps of
    ``h_fine``).  Level k steps ``h_fine * 2**(levels-1-k)`` and reads every
    ``2**(levels-1-k)``-th entry of ``r``.  Returns ``(K, bad_level, bad_index)``.
    """
    K = np.empty((levels, n_base + 1))
    cdef double[:, ::1] kv = K
    cdef Py_ssize_t n_fine = n_base << (levels - 1)
    cdef Py_ssize_t stride, n, i, j
    cdef int k
    cdef double h, w, p, q, wn, pn
    cdef int bad_level = -1
    cdef Py_ssize_t bad_index = -1
    cdef Py_ssize_t keep
    if r.shape[0] < n_fine:
        raise ValueError("R table shorter than the finest step count")
    with nogil:
        for k in range(levels):
            stride = (<Py_ssize_t>1) << (levels - 1 - k)
            n = n_base << k
            keep = (<Py_ssize_t>1) << k
            h = h_fine * stride
            w = w0
            p = p0
            q = q0
            kv[k, 0] = w
            for i in range(n):
                wn = w + h * p
                pn = p + h * q
                q = q + h * r[i * stride]
                w = wn
                p = pn
                if not (isfinite(w) and isfinite(p) and isfinite(q)):
                    bad_level = k
                    bad_index = i + 1
                    break
                if (i + 1) % keep == 0:
                    kv[k, (i + 1) // keep] = w
            if bad_level >= 0:
                break
    return K, bad_level, bad_index
