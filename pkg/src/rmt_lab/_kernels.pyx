# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-sample reductions.

Signatures and results match :mod:`rmt_lab._kernels_py`; see that module for
the reference semantics. All loops release the GIL so chunks can run on
worker threads.
"""
import numpy as np

from libc.math cimport sqrt, fabs, cos, sin, INFINITY, NAN


def interval_counts(const double[:, ::1] eigs, const double[::1] edges):
    cdef Py_ssize_t n_rows = eigs.shape[0]
    cdef Py_ssize_t n = eigs.shape[1]
    cdef Py_ssize_t n_cells = edges.shape[0] - 1
    if n_cells < 1:
        raise ValueError("need at least two edges")
    out = np.zeros((n_rows, n_cells), dtype=np.int64)
    cdef long long[:, ::1] counts = out
    cdef Py_ssize_t s, i, lo, hi, mid
    cdef double x
    cdef double first = edges[0]
    cdef double last = edges[n_cells]
    with nogil:
        for s in range(n_rows):
            for i in range(n):
                x = eigs[s, i]
                if x != x or x < first or x > last:
                    continue
                if x == last:
                    counts[s, n_cells - 1] += 1
                    continue
                lo = 0
                hi = n_cells
                while hi - lo > 1:
                    mid = (lo + hi) // 2
                    if edges[mid] <= x:
                        lo = mid
                    else:
                        hi = mid
                counts[s, lo] += 1
    return out


def resolvent_stats(const double[:, ::1] eigs, weights, double rtol):
    cdef Py_ssize_t n_rows = eigs.shape[0]
    cdef Py_ssize_t n = eigs.shape[1]
    cdef bint have_w = weights is not None
    cdef const double[:, ::1] w
    if have_w:
        w = weights
        if w.shape[0] != n_rows or w.shape[1] != n:
            raise ValueError("weights shape mismatch")
    vec_a = np.full(n_rows, np.nan)
    frob_a = np.empty(n_rows)
    op_a = np.empty(n_rows)
    sing_a = np.zeros(n_rows, dtype=np.bool_)
    cdef double[::1] vec = vec_a
    cdef double[::1] frob = frob_a
    cdef double[::1] op = op_a
    cdef unsigned char[::1] sing = sing_a.view(np.uint8)
    cdef Py_ssize_t s, i
    cdef double lam, a, amin, amax, sf, sv, scale
    with nogil:
        for s in range(n_rows):
            amin = INFINITY
            amax = 0.0
            for i in range(n):
                a = fabs(eigs[s, i])
                if a < amin:
                    amin = a
                if a > amax:
                    amax = a
            scale = amax if amax > 1.0 else 1.0
            if amin <= rtol * scale:
                sing[s] = 1
                frob[s] = INFINITY
                op[s] = INFINITY
                if have_w:
                    vec[s] = INFINITY
                continue
            sf = 0.0
            sv = 0.0
            for i in range(n):
                lam = eigs[s, i]
                sf = sf + 1.0 / (lam * lam)
                if have_w:
                    sv = sv + w[s, i] / (lam * lam)
            frob[s] = sqrt(sf)
            op[s] = 1.0 / amin
            if have_w:
                vec[s] = sqrt(sv)
    return vec_a, frob_a, op_a, sing_a


def tail_counts(const double[::1] values, const double[::1] thresholds, bint upper=True):
    cdef Py_ssize_t n_values = values.shape[0]
    cdef Py_ssize_t n_t = thresholds.shape[0]
    out = np.zeros(n_t, dtype=np.int64)
    cdef long long[::1] counts = out
    cdef Py_ssize_t s, k
    cdef double v
    # NaN fails both comparisons, so it is never counted
    with nogil:
        if upper:
            for s in range(n_values):
                v = values[s]
                for k in range(n_t):
                    counts[k] += v >= thresholds[k]
        else:
            for s in range(n_values):
                v = values[s]
                for k in range(n_t):
                    counts[k] += v <= thresholds[k]
    return out


def quadratic_ratio(const double[::1] energies, const double[::1] offsets, double shift,
                    const double[:, ::1] g):
    cdef Py_ssize_t n_rows = g.shape[0]
    cdef Py_ssize_t m = g.shape[1]
    if energies.shape[0] != m or offsets.shape[0] != m:
        raise ValueError("energies/offsets length must match g columns")
    out = np.empty(n_rows)
    cdef double[::1] ratio = out
    cdef Py_ssize_t s, j
    cdef double x, num, quad, den
    with nogil:
        for s in range(n_rows):
            num = 0.0
            quad = 0.0
            for j in range(m):
                x = g[s, j] + offsets[j]
                num = num + energies[j] * energies[j] * x * x
                quad = quad + energies[j] * x * x
            den = fabs(quad - shift)
            if den == 0.0:
                ratio[s] = INFINITY if num > 0.0 else NAN
            else:
                ratio[s] = sqrt(num) / den
    return out


def phase_mean(const double[::1] x, const double[::1] y, double xi, double eta):
    cdef Py_ssize_t n = x.shape[0]
    if y.shape[0] != n:
        raise ValueError("x and y must have equal length")
    if n == 0:
        raise ValueError("empty sample")
    cdef Py_ssize_t s
    cdef double theta
    cdef double re = 0.0
    cdef double im = 0.0
    with nogil:
        for s in range(n):
            theta = xi * x[s] + eta * y[s]
            re = re + cos(theta)
            im = im + sin(theta)
    return complex(re / n, im / n)
