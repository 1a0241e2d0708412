"""Kernel selection.

The compiled extension is used when it imports cleanly, unless the
environment variable ``CUBICEQ_PURE_PYTHON`` is set to a non-empty value.
Both implementations stay reachable as ``compiled`` and ``fallback`` so the
benchmarks and the tests can compare them.
"""
import os

from . import _kernels_py as fallback

try:
    from . import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

if compiled is not None and not os.environ.get("CUBICEQ_PURE_PYTHON"):
    active = compiled
    BACKEND = "compiled"
else:
    active = fallback
    BACKEND = "python"

brute_force_sum = active.brute_force_sum
pauli_products = active.pauli_products

__all__ = ["BACKEND", "brute_force_sum", "compiled", "fallback", "pauli_products"]
