# cython: language_level=3
"""Compiled inner loops.

Both functions mirror ``cubiceq._kernels_py`` exactly; the selection between
the two happens in ``cubiceq.kernels``.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef int64_t INNER_MAX = 4096


def brute_force_sum(const double complex[::1] data,
                    const int64_t[::1] node_offset,
                    const int64_t[:, ::1] label_node_step,
                    const int64_t[::1] label_out_step,
                    const int64_t[::1] label_dims,
                    double complex[::1] out):
    """Sum the product of node entries over every joint label assignment.

    ``label_node_step[l, k]`` is the flat-index increment of node ``k`` when
    label ``l`` increases by one; ``label_out_step`` does the same for the
    output buffer (zero for summed labels). The trailing labels, up to
    INNER_MAX joint values, are unrolled into offset tables and walked in a
    flat inner loop; the leading labels advance by odometer.
    """
    cdef Py_ssize_t n_labels = label_dims.shape[0]
    cdef Py_ssize_t n_nodes = node_offset.shape[0]
    cdef Py_ssize_t split = n_labels, k, l, c
    cdef int64_t inner = 1, outer = 1, t, back, oidx = 0
    while split > 0 and inner * label_dims[split - 1] <= INNER_MAX:
        # keep a purely summed block so terms accumulate in a register
        if label_out_step[split - 1] != 0 and inner >= 64:
            break
        split -= 1
        inner *= label_dims[split]
    for l in range(split):
        outer *= label_dims[l]

    dims = np.asarray(label_dims)
    steps = np.asarray(label_node_step)
    if split < n_labels:
        grid = np.indices(dims[split:]).reshape(n_labels - split, -1)
    else:
        grid = np.zeros((0, 1), dtype=np.int64)
    cdef int64_t[:, ::1] tab = np.ascontiguousarray((steps[split:].T @ grid).T, dtype=np.int64)
    cdef int64_t[::1] tab_out = np.ascontiguousarray(np.asarray(label_out_step)[split:] @ grid, dtype=np.int64)
    cdef bint summed_inner = not np.any(np.asarray(label_out_step)[split:])

    cdef int64_t[::1] idx = np.array(node_offset, dtype=np.int64)
    cdef int64_t[::1] counter = np.zeros(max(split, 1), dtype=np.int64)
    cdef const double complex* dp = &data[0]
    cdef int64_t* ip = &idx[0]
    cdef const int64_t* tp = &tab[0, 0]
    cdef double complex prod, acc

    with nogil:
        for t in range(outer):
            acc = 0.0
            for c in range(inner):
                prod = dp[ip[0] + tp[c * n_nodes]]
                k = 1
                while k < n_nodes and prod != 0:
                    prod = prod * dp[ip[k] + tp[c * n_nodes + k]]
                    k += 1
                if summed_inner:
                    acc = acc + prod
                else:
                    out[oidx + tab_out[c]] += prod
            if summed_inner:
                out[oidx] += acc
            # odometer over the leading labels
            l = split - 1
            while l >= 0:
                counter[l] += 1
                if counter[l] < label_dims[l]:
                    for k in range(n_nodes):
                        idx[k] += label_node_step[l, k]
                    oidx += label_out_step[l]
                    break
                counter[l] = 0
                back = label_dims[l] - 1
                for k in range(n_nodes):
                    idx[k] -= back * label_node_step[l, k]
                oidx -= back * label_out_step[l]
                l -= 1


def pauli_products(const uint64_t[::1] xa, const uint64_t[::1] za,
                   const uint64_t[::1] xb, const uint64_t[::1] zb):
    """All pairwise products of two lists of Pauli strings in (x, z) mask form.

    Returns ``(x, z, phase)`` flattened in row-major (a, b) order, where the
    product equals ``i**phase`` times the string ``(x, z)``.
    """
    cdef Py_ssize_t na = xa.shape[0], nb = xb.shape[0]
    cdef Py_ssize_t i, j, p
    cdef uint64_t x1, z1, x2, z2, cyc, anti
    x_out = np.empty(na * nb, dtype=np.uint64)
    z_out = np.empty(na * nb, dtype=np.uint64)
    ph_out = np.empty(na * nb, dtype=np.int8)
    cdef uint64_t[::1] xo = x_out
    cdef uint64_t[::1] zo = z_out
    cdef signed char[::1] po = ph_out
    with nogil:
        for i in range(na):
            x1 = xa[i]
            z1 = za[i]
            for j in range(nb):
                x2 = xb[j]
                z2 = zb[j]
                p = i * nb + j
                xo[p] = x1 ^ x2
                zo[p] = z1 ^ z2
                # cyclic pairs XY, YZ, ZX pick up +i; reversed pairs -i
                cyc = ((x1 & ~z1) & (x2 & z2)) | ((x1 & z1) & (~x2 & z2)) | ((~x1 & z1) & (x2 & ~z2))
                anti = ((x1 & z1) & (x2 & ~z2)) | ((~x1 & z1) & (x2 & z2)) | ((x1 & ~z1) & (~x2 & z2))
                po[p] = <signed char>((__builtin_popcountll(cyc) - __builtin_popcountll(anti)) & 3)
    return x_out, z_out, ph_out
