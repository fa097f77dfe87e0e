# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same signatures and results as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

NAME = "cython"


def substring_counts(list patterns, list texts, bint exclude_self=True):
    cdef dict index = {pat: n_ for n_, pat in enumerate(patterns)}
    cdef Py_ssize_t npat = len(patterns)
    counts_arr = np.zeros(npat, dtype=np.int64)
    if npat == 0:
        return counts_arr
    cdef cnp.int64_t[::1] counts = counts_arr
    # stamp[p] = id of the last text that already counted pattern p
    cdef cnp.int64_t[::1] stamp = np.full(npat, -1, dtype=np.int64)
    cdef Py_ssize_t maxlen = max([len(pat) for pat in patterns])
    cdef Py_ssize_t t, i, j, n, jmax, p
    cdef str text, seg
    cdef object hit
    for t in range(len(texts)):
        text = texts[t]
        n = len(text)
        for i in range(n):
            jmax = i + maxlen
            if jmax > n:
                jmax = n
            for j in range(i + 1, jmax + 1):
                seg = text[i:j]
                hit = index.get(seg)
                if hit is None:
                    continue
                p = <Py_ssize_t>hit
                if stamp[p] == t:
                    continue
                stamp[p] = t
                if exclude_self and i == 0 and j == n:
                    continue
                counts[p] += 1
    return counts_arr


def build_lattice(list tokens, dict index, whitelist):
    cdef Py_ssize_t maxlen = max([len(t) for t in tokens], default=0)
    cdef Py_ssize_t ntok = len(tokens)
    offsets_arr = np.zeros(ntok + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] offsets = offsets_arr
    cdef list starts = [], ends = [], parts = []
    cdef Py_ssize_t k, i, j, n, lo
    cdef str token, seg
    cdef object hit
    for k in range(ntok):
        token = tokens[k]
        n = len(token)
        for j in range(1, n + 1):
            lo = j - maxlen
            if lo < 0:
                lo = 0
            for i in range(lo, j):
                if i == 0 and j == n:
                    continue
                seg = token[i:j]
                if j - i == 1 and seg not in whitelist:
                    continue
                hit = index.get(seg)
                if hit is not None:
                    starts.append(i)
                    ends.append(j)
                    parts.append(hit)
        offsets[k + 1] = len(parts)
    return (offsets_arr, np.asarray(starts, dtype=np.int32),
            np.asarray(ends, dtype=np.int32), np.asarray(parts, dtype=np.int32))


def bep_all(const double[::1] scores, const cnp.int32_t[::1] lengths,
            const cnp.int64_t[::1] offsets, const cnp.int32_t[::1] starts,
            const cnp.int32_t[::1] ends, const cnp.int32_t[::1] parts):
    cdef Py_ssize_t ntok = lengths.shape[0]
    bep_arr = np.zeros(ntok, dtype=np.float64)
    found_arr = np.zeros(ntok, dtype=np.uint8)
    cdef double[::1] bep = bep_arr
    cdef cnp.uint8_t[::1] found = found_arr
    cdef Py_ssize_t maxn = 0, t, e, n
    for t in range(ntok):
        if lengths[t] > maxn:
            maxn = lengths[t]
    cdef double[::1] best = np.empty(maxn + 1, dtype=np.float64)
    cdef double b, v
    cdef Py_ssize_t lo, hi, j
    with nogil:
        for t in range(ntok):
            lo = offsets[t]
            hi = offsets[t + 1]
            if lo == hi:
                continue
            n = lengths[t]
            best[0] = 0.0
            for j in range(1, n + 1):
                best[j] = -INFINITY
            for e in range(lo, hi):
                b = best[starts[e]]
                if b == -INFINITY:
                    continue
                v = b + scores[parts[e]]
                j = ends[e]
                if v > best[j]:
                    best[j] = v
            if best[n] != -INFINITY:
                bep[t] = best[n]
                found[t] = 1
    return bep_arr, found_arr.astype(bool)
