"""Numpy reference implementation of the hot kernels.

Semantics contract (shared with the compiled backend in _fast.pyx):

weighted_topk_mean(sims, counts, k, weighting)
    Conceptually repeat each similarity sims[i] counts[i] times, sort the
    repeated sequence descending, truncate to the first k entries, and
    return the rank-weighted mean plus the number of ranks actually used
    (min(k, sum(counts))). Rank r in 1..k carries weight 1/r (zipf, code
    0), (k - r)/k (linear decay, code 1), or 1 (unweighted, code 2). The
    repeated list is never materialized: runs of equal similarity are
    consumed via cumulative weight sums.

row_entropy(values, temperature)
    Per matrix row: softmax at the given temperature (max-subtracted for
    stability), then natural-log entropy, clamped to [0, ln(columns)].
"""

from __future__ import annotations

import numpy as np

ZIPF = 0
LINEAR = 1
UNWEIGHTED = 2


def _rank_weights(keff: int, k: int, weighting: int) -> np.ndarray:
    ranks = np.arange(1, keff + 1, dtype=np.float64)
    if weighting == ZIPF:
        return 1.0 / ranks
    if weighting == LINEAR:
        return (k - ranks) / k
    if weighting == UNWEIGHTED:
        return np.ones(keff, dtype=np.float64)
    raise ValueError(f"unknown weighting code: {weighting}")


def weighted_topk_mean(
    sims: np.ndarray, counts: np.ndarray, k: int, weighting: int
) -> tuple[float, int]:
    sims = np.ascontiguousarray(sims, dtype=np.float64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    if sims.ndim != 1 or counts.shape != sims.shape:
        raise ValueError("sims and counts must be 1-d arrays of equal length")
    if sims.shape[0] == 0:
        raise ValueError("no similarities")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if (counts < 1).any():
        raise ValueError("all counts must be >= 1")

    order = np.argsort(-sims, kind="stable")
    s = sims[order]
    cum = np.cumsum(counts[order])
    keff = int(min(k, cum[-1]))

    weights = _rank_weights(keff, k, weighting)
    cumw = np.concatenate(([0.0], np.cumsum(weights)))
    hi = np.minimum(cum, keff)
    lo = np.minimum(np.concatenate(([0], cum[:-1])), keff)
    used = hi > lo
    segment = cumw[hi[used]] - cumw[lo[used]]
    denominator = float(segment.sum())
    if denominator <= 0.0:
        raise ValueError("total rank weight is zero (linear decay with k = 1?)")
    numerator = float(np.dot(s[used], segment))
    return numerator / denominator, keff


def row_entropy(values: np.ndarray, temperature: float) -> np.ndarray:
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] == 0:
        raise ValueError("values must be a 2-d matrix with at least one column")
    if temperature <= 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if not np.isfinite(values).all():
        raise ValueError("non-finite matrix entry")
    z = (values - values.max(axis=1, keepdims=True)) / temperature
    e = np.exp(z)
    total = e.sum(axis=1)
    entropy = np.log(total) - (e * z).sum(axis=1) / total
    np.clip(entropy, 0.0, np.log(values.shape[1]), out=entropy)
    return entropy
