"""Hot kernels for exhaustive grid evaluation.

The full default grid enumerates 3^7 soft-weight combos x 3^4 preference
combos x 3 x 7 multiplier values, i.e. ~3.7 million candidate weightings,
each scored against every annotation pair. That inner loop dominates
calibration runtime, so it is compiled with numba where available; a pure
numpy path computes the identical result (bit-for-bit) and is selected by
setting ``TRIPSCORE_NO_NUMBA=1`` or whenever numba is missing.
``benchmarks/bench_grid.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

TIE_EPSILON = 1e-9

_DISABLED = os.environ.get("TRIPSCORE_NO_NUMBA", "") not in ("", "0")

if not _DISABLED:
    try:
        from numba import njit, prange
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _DISABLED = True

HAVE_NUMBA = not _DISABLED

if not HAVE_NUMBA:
    prange = range  # keeps the shared kernel body importable without numba


def _grid_accuracy_py(d_base, ds, dp, labels, w3s, w4s, tie):
    n1, n = ds.shape
    n2 = dp.shape[0]
    n3 = w3s.shape[0]
    n4 = w4s.shape[0]
    acc = np.zeros((n1, n2, n3, n4))
    for i in prange(n1):  # noqa: F821 - rebound to range in the numpy path
        for j in range(n2):
            for k in range(n3):
                for m_idx in range(n4):
                    matched = 0
                    for p in range(n):
                        delta = d_base[p] + w3s[k] * ds[i, p] + w4s[m_idx] * dp[j, p]
                        if delta > tie:
                            pred = 1
                        elif delta < -tie:
                            pred = -1
                        else:
                            pred = 0
                        if pred == labels[p]:
                            matched += 1
                    acc[i, j, k, m_idx] = matched / n
    return acc


if HAVE_NUMBA:
    _grid_accuracy_numba = njit(parallel=True, cache=True)(_grid_accuracy_py)


def _grid_accuracy_numpy(d_base, ds, dp, labels, w3s, w4s, tie):
    n1, n = ds.shape
    n2 = dp.shape[0]
    acc = np.zeros((n1, n2, len(w3s), len(w4s)))
    # Chunk the w1 axis so the broadcast tensor stays ~tens of MB.
    chunk = max(1, int(3e7) // max(1, n2 * n))
    labels_b = labels[None, None, :]
    for k, w3 in enumerate(w3s):
        for m_idx, w4 in enumerate(w4s):
            scaled_dp = w4 * dp
            for start in range(0, n1, chunk):
                stop = min(n1, start + chunk)
                delta = (d_base[None, None, :] + (w3 * ds[start:stop])[:, None, :]) + scaled_dp[None, :, :]
                pred = np.where(delta > tie, 1, np.where(delta < -tie, -1, 0))
                acc[start:stop, :, k, m_idx] = (pred == labels_b).mean(axis=2)
    return acc


def grid_accuracy(
    d_base: np.ndarray,
    ds: np.ndarray,
    dp: np.ndarray,
    labels: np.ndarray,
    w3s: np.ndarray,
    w4s: np.ndarray,
    tie: float = TIE_EPSILON,
    force_numpy: bool = False,
) -> np.ndarray:
    """Accuracy of every grid point.

    ``ds[i, p]`` is the soft-term delta of pair ``p`` under w1 combo ``i``
    (already divided by the w1 sum); ``dp[j, p]`` likewise for w2 combos;
    ``d_base`` carries the gate-score delta. Returns an array indexed
    ``[w1_combo, w2_combo, w3, w4]`` whose flat order is lexicographic in
    the weight tuple, so ``argmax`` on the flattened array is the
    deterministic lexicographic tie-break.
    """
    d_base = np.ascontiguousarray(d_base, dtype=np.float64)
    ds = np.ascontiguousarray(ds, dtype=np.float64)
    dp = np.ascontiguousarray(dp, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    w3s = np.ascontiguousarray(w3s, dtype=np.float64)
    w4s = np.ascontiguousarray(w4s, dtype=np.float64)
    if HAVE_NUMBA and not force_numpy:
        return _grid_accuracy_numba(d_base, ds, dp, labels, w3s, w4s, tie)
    return _grid_accuracy_numpy(d_base, ds, dp, labels, w3s, w4s, tie)


def predictions(
    d_base: np.ndarray, ds_row: np.ndarray, dp_row: np.ndarray, w3: float, w4: float,
    tie: float = TIE_EPSILON,
) -> np.ndarray:
    """Per-pair predicted winner (+1/-1/0) for one weighting.

    Mirrors the kernel arithmetic exactly so single-point evaluations agree
    with grid sweeps.
    """
    if np.ndim(w4) == 0:
        delta = (d_base + w3 * ds_row) + w4 * dp_row
    else:
        delta = (d_base + w3 * ds_row) + np.asarray(w4) * dp_row
    return np.where(delta > tie, 1, np.where(delta < -tie, -1, 0))
