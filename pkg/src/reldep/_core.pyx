# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled implementations of the O(m^2) hot kernels.

Mirrors reldep._core_numpy function for function.  The wins over NumPy
come from fusing passes (row sums, Hadamard row sums and the trace in one
sweep), computing pairwise distances directly instead of via the norm
expansion (which also avoids the cancellation the NumPy path has to clip
away), and selecting distance order statistics from a packed triangle
instead of the full flattened matrix.  Elementwise maps like the Gaussian
kernel stay in NumPy in both backends; its vectorized exp is already the
fastest tool for that job.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def pairwise_sq_dists(object x_in):
    """Squared Euclidean distances between rows; symmetric, zero diagonal.

    Every entry is computed directly (no norm expansion, so no negative
    round-off to clip) with purely sequential writes; the (i, j) and (j, i)
    entries run the identical arithmetic, so symmetry is exact.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.ascontiguousarray(
        x_in, dtype=np.float64
    )
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, m), dtype=np.float64)
    cdef Py_ssize_t i, j, t
    cdef double acc, diff
    for i in range(m):
        for j in range(m):
            if j == i:
                out[i, j] = 0.0
                continue
            acc = 0.0
            for t in range(d):
                diff = x[i, t] - x[j, t]
                acc += diff * diff
            out[i, j] = acc
    return out


def sq_distance_order_stats(object d2_in, Py_ssize_t k1, Py_ssize_t k2):
    """k1-th and k2-th smallest squared distance over the unique-pair pool.

    Packs the strict upper triangle into a buffer (each pair once) and
    selects with introselect, so no full-matrix copy is made.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d2 = np.ascontiguousarray(
        d2_in, dtype=np.float64
    )
    cdef Py_ssize_t m = d2.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.empty(
        m * (m - 1) // 2, dtype=np.float64
    )
    cdef Py_ssize_t i, j, pos = 0
    for i in range(m):
        for j in range(i + 1, m):
            buf[pos] = d2[i, j]
            pos += 1
    if k1 == k2:
        buf.partition(k1)
    else:
        buf.partition([k1, k2])
    return float(buf[k1]), float(buf[k2])


def hsic_reductions(object k_in, object l_in):
    """Fused row sums and Hadamard row sums of a zero-diagonal Gram pair.

    One sweep over both matrices produces what NumPy needs three for.  The
    inner loop keeps four independent partial accumulators per quantity so
    the compiler can vectorize the reductions.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] k = np.ascontiguousarray(
        k_in, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=2] l = np.ascontiguousarray(
        l_in, dtype=np.float64
    )
    cdef Py_ssize_t m = k.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kl_row = np.zeros(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] k_row = np.zeros(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] l_row = np.zeros(m, dtype=np.float64)
    cdef Py_ssize_t i, j, tail
    cdef double skl0, skl1, skl2, skl3
    cdef double sk0, sk1, sk2, sk3
    cdef double sl0, sl1, sl2, sl3
    tail = m - (m & 3)
    for i in range(m):
        skl0 = skl1 = skl2 = skl3 = 0.0
        sk0 = sk1 = sk2 = sk3 = 0.0
        sl0 = sl1 = sl2 = sl3 = 0.0
        for j in range(0, tail, 4):
            skl0 += k[i, j] * l[i, j]
            skl1 += k[i, j + 1] * l[i, j + 1]
            skl2 += k[i, j + 2] * l[i, j + 2]
            skl3 += k[i, j + 3] * l[i, j + 3]
            sk0 += k[i, j]
            sk1 += k[i, j + 1]
            sk2 += k[i, j + 2]
            sk3 += k[i, j + 3]
            sl0 += l[i, j]
            sl1 += l[i, j + 1]
            sl2 += l[i, j + 2]
            sl3 += l[i, j + 3]
        for j in range(tail, m):
            skl0 += k[i, j] * l[i, j]
            sk0 += k[i, j]
            sl0 += l[i, j]
        kl_row[i] = (skl0 + skl1) + (skl2 + skl3)
        k_row[i] = (sk0 + sk1) + (sk2 + sk3)
        l_row[i] = (sl0 + sl1) + (sl2 + sl3)
    return kl_row, k_row, l_row


def hsic_h_reductions(object k_in, object l_in):
    """hsic_reductions plus the matrix-vector products K @ l_row, L @ k_row.

    The matvecs go through NumPy's BLAS, which is the fastest option for
    them at every size; the fused sweep above supplies the row sums.
    """
    kl_row, k_row, l_row = hsic_reductions(k_in, l_in)
    k_lrow = np.dot(k_in, l_row)
    l_krow = np.dot(l_in, k_row)
    return kl_row, k_row, l_row, k_lrow, l_krow
