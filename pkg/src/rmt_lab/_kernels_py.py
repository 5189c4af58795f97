"""Pure numpy implementations of the per-sample reductions.

This module is the reference for :mod:`rmt_lab._kernels`; both expose the
same functions with the same semantics. Inputs are expected to be C-contiguous
float64 arrays (the dispatcher in :mod:`rmt_lab.kernels` takes care of that).
"""
import numpy as np


def interval_counts(eigs, edges):
    """Count eigenvalues per partition cell.

    Cells are half-open ``[e_j, e_{j+1})`` except the last, which is closed.

    Parameters
    ----------
    eigs : ndarray, shape (S, n)
    edges : ndarray, shape (P + 1,), non-decreasing

    Returns
    -------
    ndarray of int64, shape (S, P)
    """
    n_rows = eigs.shape[0]
    n_cells = edges.shape[0] - 1
    if n_cells < 1:
        raise ValueError("need at least two edges")
    idx = np.searchsorted(edges, eigs, side="right") - 1
    idx[eigs == edges[-1]] = n_cells - 1
    valid = (idx >= 0) & (idx < n_cells) & ~np.isnan(eigs)
    rows = np.broadcast_to(np.arange(n_rows)[:, None], eigs.shape)
    flat = rows[valid] * n_cells + idx[valid]
    return np.bincount(flat, minlength=n_rows * n_cells).astype(np.int64).reshape(n_rows, n_cells)


def resolvent_stats(eigs, weights, rtol):
    """Inverse norms from spectra.

    Returns ``(vec, frob, op, singular)`` where ``vec = sqrt(sum w / lam^2)``
    (NaN when ``weights`` is None), ``frob = sqrt(sum 1 / lam^2)`` and
    ``op = 1 / min |lam|``. Rows with ``min |lam| <= rtol * max(1, max |lam|)``
    are flagged singular and get infinite norms.
    """
    a = np.abs(eigs)
    amin = a.min(axis=1)
    amax = a.max(axis=1)
    singular = amin <= rtol * np.maximum(amax, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv2 = 1.0 / (eigs * eigs)
        frob = np.sqrt(inv2.sum(axis=1))
        op = 1.0 / amin
        if weights is None:
            vec = np.full(eigs.shape[0], np.nan)
        else:
            vec = np.sqrt((weights * inv2).sum(axis=1))
    frob[singular] = np.inf
    op[singular] = np.inf
    if weights is not None:
        vec[singular] = np.inf
    return vec, frob, op, singular


def tail_counts(values, thresholds, upper=True):
    """``#{v >= t}`` (or ``#{v <= t}`` when ``upper`` is False) for each threshold."""
    v = np.sort(values[~np.isnan(values)])
    if upper:
        return (v.size - np.searchsorted(v, thresholds, side="left")).astype(np.int64)
    return np.searchsorted(v, thresholds, side="right").astype(np.int64)


def quadratic_ratio(energies, offsets, shift, g):
    """Per-row ``||E (g + b)|| / |sum E (g + b)^2 - a|`` for diagonal ``E``."""
    if energies.shape[0] != g.shape[1] or offsets.shape[0] != g.shape[1]:
        raise ValueError("energies/offsets length must match g columns")
    x = g + offsets
    x2 = x * x
    num = np.sqrt(x2 @ (energies * energies))
    den = np.abs(x2 @ energies - shift)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    out[(den == 0.0) & (num > 0.0)] = np.inf
    return out


def phase_mean(x, y, xi, eta):
    """Sample mean of ``exp(i (xi x + eta y))``."""
    if y.shape[0] != x.shape[0]:
        raise ValueError("x and y must have equal length")
    if x.shape[0] == 0:
        raise ValueError("empty sample")
    theta = xi * x + eta * y
    return complex(np.cos(theta).mean(), np.sin(theta).mean())
