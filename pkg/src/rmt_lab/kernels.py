"""Backend dispatch for the per-sample reductions.

The compiled extension is used when it was built; otherwise the numpy
fallback is loaded. Setting ``RMT_LAB_PURE_PYTHON=1`` forces the fallback.
``BACKEND`` names the active implementation.
"""
import os

import numpy as np

from rmt_lab import _kernels_py

_impl = _kernels_py
BACKEND = "python"

if os.environ.get("RMT_LAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from rmt_lab import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def interval_counts(eigs, edges):
    return _impl.interval_counts(_f64(np.atleast_2d(eigs)), _f64(edges))


def resolvent_stats(eigs, weights=None, rtol=1e-13):
    w = None if weights is None else _f64(weights)
    return _impl.resolvent_stats(_f64(np.atleast_2d(eigs)), w, float(rtol))


def tail_counts(values, thresholds, upper=True):
    return _impl.tail_counts(_f64(values), _f64(thresholds), bool(upper))


def quadratic_ratio(energies, offsets, shift, g):
    return _impl.quadratic_ratio(_f64(energies), _f64(offsets), float(shift), _f64(np.atleast_2d(g)))


def phase_mean(x, y, xi, eta):
    return _impl.phase_mean(_f64(x), _f64(y), float(xi), float(eta))
