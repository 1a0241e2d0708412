"""Compiled vs pure-Python kernels.

Times the brute-force contraction oracle on both sides of the cubic
equations (2^26 summed terms per side) and the batched Pauli-string product
on 4096 x 4096 strings, once with each implementation, and checks that
their outputs agree.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from cubiceq import kernels
from cubiceq.tensor_core import brute_force_contract, canonical_diagram


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def bench_contraction(impl, repeat):
    rng = np.random.default_rng(0)
    tensors = {f"R{k}": rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16)) for k in range(1, 5)}
    diagrams = [canonical_diagram(side, tensors, 2) for side in ("LHS", "RHS")]
    return best_of(lambda: [brute_force_contract(dg, impl=impl) for dg in diagrams], repeat)


def bench_pauli(impl, repeat):
    rng = np.random.default_rng(1)
    masks = [rng.integers(0, 2**40, 4096, dtype=np.uint64) for _ in range(4)]
    return best_of(lambda: impl.pauli_products(*masks), repeat)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if kernels.compiled is None:
        raise SystemExit("compiled extension not built; run `pip install --no-build-isolation -e .` first")

    print(f"{'kernel':<28}{'compiled [s]':>14}{'python [s]':>14}{'speedup':>10}  agree")
    for name, bench in (("brute-force contraction", bench_contraction), ("pauli products 4096^2", bench_pauli)):
        tc, rc = bench(kernels.compiled, args.repeat)
        tp, rp = bench(kernels.fallback, args.repeat)
        if name.startswith("brute"):
            agree = all(np.allclose(a, b, rtol=1e-12, atol=1e-12) for a, b in zip(rc, rp))
        else:
            agree = all(np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(rc, rp))
        print(f"{name:<28}{tc:>14.3f}{tp:>14.3f}{tp / tc:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
