# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot kernels.

Must mirror labelshift.kernels._fallback exactly; the test suite asserts
agreement between the two backends on randomized inputs.
"""

from libc.math cimport exp, isfinite, log
from libcpp.algorithm cimport sort
from libcpp.pair cimport pair
from libcpp.vector cimport vector

import numpy as np

ctypedef long long i64

ZIPF = 0
LINEAR = 1
UNWEIGHTED = 2


def weighted_topk_mean(sims, counts, long long k, int weighting):
    sims_arr = np.ascontiguousarray(sims, dtype=np.float64)
    counts_arr = np.ascontiguousarray(counts, dtype=np.int64)
    if sims_arr.ndim != 1 or counts_arr.ndim != 1 or sims_arr.shape[0] != counts_arr.shape[0]:
        raise ValueError("sims and counts must be 1-d arrays of equal length")
    # const views accept the read-only arrays the library passes around
    cdef const double[::1] s = sims_arr
    cdef const i64[::1] c = counts_arr
    cdef Py_ssize_t n = s.shape[0]
    if n == 0:
        raise ValueError("no similarities")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if weighting < 0 or weighting > 2:
        raise ValueError(f"unknown weighting code: {weighting}")

    # ties sort by original index, matching the fallback's stable argsort
    cdef vector[pair[double, i64]] order
    order.reserve(n)
    cdef Py_ssize_t i
    for i in range(n):
        if c[i] < 1:
            raise ValueError("all counts must be >= 1")
        order.push_back(pair[double, i64](-s[i], i))
    sort(order.begin(), order.end())

    cdef i64 pos = 0, take, r
    cdef double numerator = 0.0, denominator = 0.0, run_weight, sim
    for i in range(n):
        if pos >= k:
            break
        sim = -order[i].first
        take = c[order[i].second]
        if take > k - pos:
            take = k - pos
        run_weight = 0.0
        if weighting == UNWEIGHTED:
            run_weight = <double> take
        elif weighting == ZIPF:
            for r in range(pos + 1, pos + take + 1):
                run_weight += 1.0 / r
        else:  # LINEAR
            for r in range(pos + 1, pos + take + 1):
                run_weight += (k - r) / (<double> k)
        numerator += sim * run_weight
        denominator += run_weight
        pos += take
    if denominator <= 0.0:
        raise ValueError("total rank weight is zero (linear decay with k = 1?)")
    return numerator / denominator, pos


def row_entropy(values, double temperature):
    if temperature <= 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    values_arr = np.ascontiguousarray(values, dtype=np.float64)
    if values_arr.ndim != 2 or values_arr.shape[1] == 0:
        raise ValueError("values must be a 2-d matrix with at least one column")
    cdef const double[:, ::1] m = values_arr
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1]
    out = np.empty(rows, dtype=np.float64)
    cdef double[::1] h = out
    cdef double top = log(<double> cols)
    cdef Py_ssize_t i, j
    cdef double row_max, z, e, total, weighted, entropy
    for i in range(rows):
        row_max = m[i, 0]
        for j in range(cols):
            if not isfinite(m[i, j]):
                raise ValueError("non-finite matrix entry")
            if m[i, j] > row_max:
                row_max = m[i, j]
        total = 0.0
        weighted = 0.0
        for j in range(cols):
            z = (m[i, j] - row_max) / temperature
            e = exp(z)
            total += e
            weighted += e * z
        entropy = log(total) - weighted / total
        if entropy < 0.0:
            entropy = 0.0
        elif entropy > top:
            entropy = top
        h[i] = entropy
    return out
