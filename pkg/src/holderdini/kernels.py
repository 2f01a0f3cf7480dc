"""Backend selection for the hot loops.

The compiled extension ``_ckernels`` is used when it imports; otherwise the numpy
fallback in ``_kernels_py`` is used. Set ``HOLDERDINI_PURE_PYTHON=1`` to force the
fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("HOLDERDINI_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def get_backend(name=None):
    """Return the kernel module named ``name`` ('cython' or 'python'), or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def max_shift_ratio_1d(h, shifts, weights):
    """``h`` of shape (N, C); see ``_kernels_py.max_shift_ratio_1d``."""
    return _impl.max_shift_ratio_1d(np.ascontiguousarray(h, dtype=np.float64),
                                    np.ascontiguousarray(shifts, dtype=np.int64),
                                    np.ascontiguousarray(weights, dtype=np.float64))


def max_pair_ratio(flat, ia, ib, weights):
    """``flat`` of shape (P, C); see ``_kernels_py.max_pair_ratio``."""
    return _impl.max_pair_ratio(np.ascontiguousarray(flat, dtype=np.float64),
                                np.ascontiguousarray(ia, dtype=np.int64),
                                np.ascontiguousarray(ib, dtype=np.int64),
                                np.ascontiguousarray(np.broadcast_to(weights, np.shape(ia)), dtype=np.float64))


def transformed_euler_1d(y0, dw, times, lam, ht, lo, dx, vals, dvals, gvals, tol=1e-10, max_iter=200):
    c = np.ascontiguousarray
    return _impl.transformed_euler_1d(c(y0, dtype=np.float64), c(dw, dtype=np.float64),
                                      c(times, dtype=np.float64), float(lam), float(ht), float(lo), float(dx),
                                      c(vals, dtype=np.float64), c(dvals, dtype=np.float64),
                                      c(gvals, dtype=np.float64), float(tol), int(max_iter))
