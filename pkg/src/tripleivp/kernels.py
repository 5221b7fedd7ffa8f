"""Backend selection for the hot loops.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
pure-Python ``_pykernels`` take over.  Setting ``TRIPLEIVP_PURE_PYTHON=1``
forces the fallback.  ``BACKEND`` names the active one.
"""
import os

from . import _pykernels
from ._program import MAX_STACK

_c = None
if os.environ.get("TRIPLEIVP_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _ckernels as _c
    except ImportError:  # extension not built
        _c = None

BACKEND = "cython" if _c is not None else "python"


def _module(backend):
    if backend is None:
        backend = BACKEND
    if backend == "cython":
        if _c is None:
            raise RuntimeError("compiled kernels are not available")
        return _c
    if backend == "python":
        return _pykernels
    raise ValueError(f"unknown backend {backend!r}")


def available_backends():
    return ("cython", "python") if _c is not None else ("python",)


def nested_integrate(integrand, slots, lo, hi, extra, fixed, a, b, tol, max_depth, min_interval,
                     backend=None):
    mod = _module(backend)
    if mod is _c:
        progs = [integrand, *lo, *hi, *(p for p in extra if p is not None)]
        if any(p.stack_size > MAX_STACK for p in progs):
            mod = _pykernels
    return mod.nested_integrate(
        integrand, tuple(slots), list(lo), list(hi), list(extra), tuple(float(v) for v in fixed),
        float(a), float(b), float(tol), int(max_depth), float(min_interval),
    )


def euler_march(r, h, w0, p0, q0, n, backend=None):
    return _module(backend).euler_march(r, float(h), float(w0), float(p0), float(q0), int(n))


def euler_levels(r, h_fine, w0, p0, q0, n_base, levels, backend=None):
    return _module(backend).euler_levels(r, float(h_fine), float(w0), float(p0), float(q0), int(n_base),
                                         int(levels))
