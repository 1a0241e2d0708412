"""Pure-Python/numpy versions of the compiled kernels.

Same signatures and results as ``cubiceq._kernels``; used when the extension
is not built or when ``CUBICEQ_PURE_PYTHON`` is set.
"""
import itertools

import numpy as np


def brute_force_sum(data, node_offset, label_node_step, label_out_step, label_dims, out):
    data = np.asarray(data)
    node_offset = np.asarray(node_offset, dtype=np.int64)
    step = np.asarray(label_node_step, dtype=np.int64)
    out_step = np.asarray(label_out_step, dtype=np.int64)
    dims = np.asarray(label_dims, dtype=np.int64)

    free = [l for l in range(len(dims)) if out_step[l] != 0]
    summed = [l for l in range(len(dims)) if out_step[l] == 0]

    # index offsets of every free-label assignment, vectorized once
    node_free = np.zeros((len(node_offset), 1), dtype=np.int64)
    out_free = np.zeros(1, dtype=np.int64)
    for l in free:
        vals = np.arange(dims[l], dtype=np.int64)
        node_free = (node_free[:, :, None] + step[l][:, None, None] * vals[None, None, :]).reshape(
            len(node_offset), -1
        )
        out_free = (out_free[:, None] + out_step[l] * vals[None, :]).reshape(-1)

    for assignment in itertools.product(*(range(dims[l]) for l in summed)):
        base = node_offset.copy()
        for l, value in zip(summed, assignment):
            base += value * step[l]
        prod = np.ones(node_free.shape[1], dtype=complex)
        for k in range(len(node_offset)):
            prod *= data[base[k] + node_free[k]]
        # each free assignment maps to a distinct output slot
        out[out_free] += prod


def _popcount(a):
    return np.bitwise_count(a).astype(np.int64)


def pauli_products(xa, za, xb, zb):
    xa = np.asarray(xa, dtype=np.uint64)[:, None]
    za = np.asarray(za, dtype=np.uint64)[:, None]
    xb = np.asarray(xb, dtype=np.uint64)[None, :]
    zb = np.asarray(zb, dtype=np.uint64)[None, :]
    cyc = (xa & ~za & xb & zb) | (xa & za & ~xb & zb) | (~xa & za & xb & ~zb)
    anti = (xa & za & xb & ~zb) | (~xa & za & xb & zb) | (xa & ~za & ~xb & zb)
    phase = ((_popcount(cyc) - _popcount(anti)) & 3).astype(np.int8)
    return (xa ^ xb).reshape(-1), (za ^ zb).reshape(-1), phase.reshape(-1)
