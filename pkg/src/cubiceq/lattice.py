"""Plane transfer matrices on an L x L periodic lattice.

Site ``(n, m)`` (row, column, both 1-based and periodic) is register index
``(n-1 mod L)*L + (m-1 mod L) + 1``. A *plan* is a list of site-disjoint
plaquettes (ordered 4-site tuples); a transfer matrix is the product of one
four-site Ř embedded on every plaquette of a plan.

Two plaquette geometries are available. Dark plaquettes always sit on rows
``(2n, 2n-1)`` and columns ``(2m, 2m+1)``. White plaquettes sit on rows
``(2n+1, 2n)`` and either the same columns (``"edge"``: every white
plaquette shares an edge with two dark ones) or columns ``(2m-1, 2m)``
(``"corner"``: white and dark plaquettes meet at single sites).
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ArgumentError, ResourceError
from .pauli import PauliOperator, commutator, series_coefficient
from .polynomial import BivariatePolynomial
from .report import ResidualReport
from .rmatrix import RMatrixFour, kitaev_A, kitaev_B
from .tensor_core import embed_on_sites_sparse

GEOMETRIES = ("edge", "corner")
DENSE_MAX_DIM = 2**16
MAX_POWER_TERMS = 2**18


@dataclass(frozen=True)
class LatticeSpec:
    L: int
    d: int = 2

    def __post_init__(self):
        if not isinstance(self.L, (int, np.integer)) or self.L < 4 or self.L % 2:
            raise ArgumentError(f"L must be an even integer >= 4, got {self.L!r}")
        if self.d < 2:
            raise ArgumentError(f"local dimension must be >= 2, got {self.d}")

    @property
    def n_sites(self) -> int:
        return self.L * self.L

    def site(self, n: int, m: int) -> int:
        return ((n - 1) % self.L) * self.L + (m - 1) % self.L + 1


@dataclass(frozen=True)
class PlacementPlan:
    dark: tuple
    white: tuple
    geometry: str = "edge"

    def plan(self, which: str) -> tuple:
        if which not in ("dark", "white"):
            raise ArgumentError(f"plan must be 'dark' or 'white', got {which!r}")
        return self.dark if which == "dark" else self.white


def placement_plan(spec: LatticeSpec, geometry: str = "edge") -> PlacementPlan:
    """Dark and white plaquette tuples, ``L²/4`` of each."""
    if geometry not in GEOMETRIES:
        raise ArgumentError(f"geometry must be one of {GEOMETRIES}, got {geometry!r}")
    s = spec.site
    half = range(1, spec.L // 2 + 1)
    dark = tuple(
        (s(2 * n, 2 * m), s(2 * n, 2 * m + 1), s(2 * n - 1, 2 * m), s(2 * n - 1, 2 * m + 1)) for n in half for m in half
    )
    shift = 0 if geometry == "edge" else 1
    white = tuple(
        (s(2 * n + 1, 2 * m - shift), s(2 * n + 1, 2 * m + 1 - shift), s(2 * n, 2 * m - shift), s(2 * n, 2 * m + 1 - shift))
        for n in half
        for m in half
    )
    return PlacementPlan(dark, white, geometry)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    operator: object  # PauliOperator or scipy CSR matrix
    spec: LatticeSpec
    parameter: object = None
    plan: str = ""
    family: str = ""

    @property
    def backend(self) -> str:
        return "exact" if isinstance(self.operator, PauliOperator) else "dense"

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        if self.backend != other.backend:
            raise ArgumentError("cannot multiply transfer matrices from different backends")
        return TransferMatrix(
            self.operator @ other.operator,
            self.spec,
            (self.parameter, other.parameter),
            f"{self.plan}*{other.plan}",
            f"{self.family}*{other.family}",
        )


def _resolve(family, u) -> RMatrixFour:
    m = family if isinstance(family, RMatrixFour) else family(u)
    if not isinstance(m, RMatrixFour):
        raise ArgumentError("family must be an RMatrixFour or a callable returning one")
    if m.convention != "check":
        raise ArgumentError("transfer matrices are built from checked R-matrices")
    return m


def build_transfer(
    spec: LatticeSpec,
    family: Callable | RMatrixFour,
    plan: str = "dark",
    u="u",
    backend: str = "exact",
    geometry: str = "edge",
    leg_order: Sequence[int] | None = None,
    factor_order: Sequence[int] | None = None,
) -> TransferMatrix:
    """Product of ``family(u)`` over the plaquettes of one plan.

    ``leg_order`` maps the R-matrix legs onto each plaquette tuple
    (default: tuple order); ``factor_order`` reorders the plaquettes, which
    cannot change the result because they are disjoint.
    On the exact backend ``u`` may be a symbol (``"u"``, ``"v"``) or an exact
    number; on the dense backend it is a number and the result is a sparse
    matrix of dimension ``d**(L*L)``.
    """
    tuples = list(placement_plan(spec, geometry).plan(plan))
    if factor_order is not None:
        if sorted(factor_order) != list(range(len(tuples))):
            raise ArgumentError("factor_order must permute the plaquette indices")
        tuples = [tuples[k] for k in factor_order]
    if leg_order is not None:
        leg_order = [int(p) for p in leg_order]
        if sorted(leg_order) != [1, 2, 3, 4]:
            raise ArgumentError(f"leg_order must permute 1..4, got {leg_order}")
        tuples = [tuple(t[p - 1] for p in leg_order) for t in tuples]
    n = spec.n_sites
    if backend == "exact":
        m = _resolve(family, u)
        if spec.d != 2:
            raise ArgumentError("the exact backend is qubit-only")
        r = m.pauli()
        out = PauliOperator.identity(n)
        for t in tuples:
            out = r.embed(t, n) * out
    elif backend == "dense":
        if spec.d**n > DENSE_MAX_DIM:
            raise ResourceError(f"dense transfer matrices need d^(L^2) <= {DENSE_MAX_DIM}; use the exact backend")
        if isinstance(u, str):
            raise ArgumentError("the dense backend needs a numeric parameter")
        m = _resolve(family, u)
        local = m.dense(u, u) if m.backend == "pauli" else m.dense()
        if m.d != spec.d:
            raise ArgumentError(f"R-matrix has d={m.d}, lattice has d={spec.d}")
        out = sp.identity(spec.d**n, dtype=complex, format="csr")
        for t in tuples:
            out = embed_on_sites_sparse(local, t, n) @ out
    else:
        raise ArgumentError(f"backend must be 'exact' or 'dense', got {backend!r}")
    return TransferMatrix(out, spec, u, plan, getattr(m, "name", ""))


def commutator_norm(t1: TransferMatrix, t2: TransferMatrix, tolerance: float = 1e-10) -> ResidualReport:
    """Exact-zero flag (exact backend) or Frobenius norm (dense) of ``[T1, T2]``.

    A dense result passes when the absolute norm is below ``tolerance``.
    """
    t0 = time.perf_counter()
    if t1.backend != t2.backend:
        raise ArgumentError("transfer matrices come from different backends")
    if t1.spec != t2.spec:
        raise ArgumentError("transfer matrices live on different lattices")
    if t1.backend == "exact":
        c = commutator(t1.operator, t2.operator)
        zero = c.is_zero()
        return ResidualReport(
            kind="commutator",
            passed=zero,
            exact_zero=zero,
            inputs={"L": t1.spec.L, "backend": "exact", "parameters": [str(t1.parameter), str(t2.parameter)]},
            extra={"terms": len(c)},
            wall_time_ms=1e3 * (time.perf_counter() - t0),
        )
    a, b = t1.operator, t2.operator
    absolute = float(sp.linalg.norm(a @ b - b @ a))
    return ResidualReport(
        kind="commutator",
        passed=absolute < tolerance,
        absolute=absolute,
        relative=absolute / max(float(sp.linalg.norm(a @ b)), 1e-300),
        tolerance=tolerance,
        inputs={"L": t1.spec.L, "backend": "dense", "parameters": [str(t1.parameter), str(t2.parameter)]},
        wall_time_ms=1e3 * (time.perf_counter() - t0),
    )


def kitaev_transfers(spec: LatticeSpec, u="u", backend: str = "exact", geometry: str = "edge"):
    """``(T_A(u), T_B(u))``: X plaquettes on the white plan, Z on the dark plan."""
    ta = build_transfer(spec, kitaev_A, "white", u, backend, geometry)
    tb = build_transfer(spec, kitaev_B, "dark", u, backend, geometry)
    return ta, tb


def plaquette_sum(spec: LatticeSpec, geometry: str = "edge") -> list[PauliOperator]:
    """The expected first-order terms: X⊗4 on white plaquettes, Z⊗4 on dark."""
    plan = placement_plan(spec, geometry)
    n = spec.n_sites
    terms = [PauliOperator.from_string("XXXX").embed(t, n) for t in plan.white]
    terms += [PauliOperator.from_string("ZZZZ").embed(t, n) for t in plan.dark]
    return terms


def extract_hamiltonian(spec: LatticeSpec, geometry: str = "edge", order: str = "AB") -> tuple[PauliOperator, ResidualReport]:
    """Degree-1 coefficient of ``T_A(u) T_B(u)`` and its comparison with the plaquette sum."""
    t0 = time.perf_counter()
    if order not in ("AB", "BA"):
        raise ArgumentError(f"order must be 'AB' or 'BA', got {order!r}")
    ta, tb = kitaev_transfers(spec, "u", "exact", geometry)
    a, b = ta.operator, tb.operator
    t = a * b if order == "AB" else b * a
    other = b * a if order == "AB" else a * b
    h1 = series_coefficient(t, 1, 0)
    h0 = series_coefficient(t, 0, 0)
    terms = plaquette_sum(spec, geometry)
    expected = PauliOperator.zero(spec.n_sites)
    for term in terms:
        expected = expected + term
    noncommuting = [(i, j) for i, j in combinations(range(len(terms)), 2) if not commutator(terms[i], terms[j]).is_zero()]
    matches = h1 == expected
    report = ResidualReport(
        kind="hamiltonian",
        passed=matches and not noncommuting,
        exact_zero=matches,
        inputs={"L": spec.L, "geometry": geometry, "order": order},
        extra={
            "terms": len(h1),
            "expected_terms": len(terms),
            "matches_plaquette_sum": matches,
            "pairwise_commuting": not noncommuting,
            "noncommuting_pairs": len(noncommuting),
            "degree0_is_identity": h0 == PauliOperator.identity(spec.n_sites),
            "order_independent": series_coefficient(other, 1, 0) == h1,
        },
        wall_time_ms=1e3 * (time.perf_counter() - t0),
    )
    return h1, report


def partition_trace(t: TransferMatrix, N: int):
    """``Tr T^N``: an exact polynomial (exact backend) or a complex number."""
    if N < 0:
        raise ArgumentError(f"N must be >= 0, got {N}")
    dim = t.spec.d**t.spec.n_sites
    if t.backend == "exact":
        if N == 0:
            return BivariatePolynomial.constant(dim)
        power = t.operator
        for _ in range(N - 1):
            if len(power) * len(t.operator) > MAX_POWER_TERMS:
                raise ResourceError(f"T^N expansion exceeds {MAX_POWER_TERMS} term products")
            power = power * t.operator
        return power.trace()
    if N == 0:
        return complex(dim)
    power = t.operator
    for _ in range(N - 1):
        power = power @ t.operator
    return complex(power.diagonal().sum())
