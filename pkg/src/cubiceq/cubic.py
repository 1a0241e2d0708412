"""Both sides of the cubic equations, their residuals, a Yang-Baxter
baseline and the row-level railway identity.

A *quadruple* is ``(R1, R2, R3, R4)`` of checked-convention
:class:`~cubiceq.rmatrix.RMatrixFour`. R1 carries the parameter ``u``, R2
carries ``v``; R3 and R4 are the intertwiners.
"""
from __future__ import annotations

import time
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ArgumentError, ResourceError
from .pauli import PauliOperator
from .report import ResidualReport
from .rmatrix import RMatrixFour, kitaev_A, kitaev_A_inv, kitaev_B
from .tensor_core import (
    Node,
    WiringDiagram,
    canonical_diagram,
    composition_order,
    contract,
    embed_on_sites_sparse,
    relative_frobenius_distance,
)

NAMES = ("R1", "R2", "R3", "R4")
N_SITES = 9
RAILWAY_READINGS = ("literal", "forward")
RAILWAY_NUMERIC_MAX_L = 4


def kitaev_quadruple(u="u", v="v", swap_uv_assignment: bool = False) -> tuple:
    """``(Ř_A(u), Ř_B(v), Ř_B(v), Ř_A⁻¹(u))``.

    With ``swap_uv_assignment`` the two plane matrices trade parameters,
    ``Ř_A(v), Ř_B(u)``, while the intertwiners are unchanged.
    """
    if swap_uv_assignment:
        return kitaev_A(v), kitaev_B(u), kitaev_B(v), kitaev_A_inv(u)
    return kitaev_A(u), kitaev_B(v), kitaev_B(v), kitaev_A_inv(u)


def _check_quadruple(quad: Sequence[RMatrixFour]) -> tuple:
    if len(quad) != 4:
        raise ArgumentError(f"need four R-matrices, got {len(quad)}")
    for name, m in zip(NAMES, quad):
        if not isinstance(m, RMatrixFour):
            raise ArgumentError(f"{name} is not an RMatrixFour")
        if m.convention != "check":
            raise ArgumentError(f"{name} is in the {m.convention!r} convention; the cubic equations take Ř")
    if len({m.d for m in quad}) != 1:
        raise ArgumentError(f"local dimensions differ: {[m.d for m in quad]}")
    return tuple(quad)


@lru_cache(maxsize=None)
def side_order(side: str) -> tuple:
    """``(name, sites)`` in application order for one side, read off the wiring."""
    eye = {name: np.eye(16) for name in NAMES}
    return tuple(composition_order(canonical_diagram(side, eye, 2)))


def build_side(side: str, quad: Sequence[RMatrixFour], u=None, v=None):
    """One side of the cubic equations on nine sites.

    With ``u``/``v`` left as None and every matrix Pauli-backed, the result
    is an exact :class:`PauliOperator`; otherwise the dense ``d**9`` matrix
    contracted from the canonical wiring at the given parameters.
    """
    quad = _check_quadruple(quad)
    if u is None and v is None and all(m.backend == "pauli" for m in quad):
        ops = dict(zip(NAMES, (m.pauli() for m in quad)))
        out = PauliOperator.identity(N_SITES)
        for name, sites in side_order(side.upper()):
            out = ops[name].embed(sites, N_SITES) * out
        return out
    u = 0.0 if u is None else u
    v = 0.0 if v is None else v
    tensors = {name: m.dense(u, v) for name, m in zip(NAMES, quad)}
    return contract(canonical_diagram(side, tensors, quad[0].d))


def cubic_residual(quad: Sequence[RMatrixFour], u=0.0, v=0.0, tolerance: float = 1e-12) -> ResidualReport:
    """Numeric ``‖LHS−RHS‖`` and its relative form at one parameter point;
    passes when the relative residual is within ``tolerance``."""
    t0 = time.perf_counter()
    lhs = build_side("LHS", quad, u, v)
    rhs = build_side("RHS", quad, u, v)
    absolute = float(np.linalg.norm(lhs - rhs))
    relative = relative_frobenius_distance(lhs, rhs)
    return ResidualReport(
        kind="cubic",
        passed=relative <= tolerance,
        absolute=absolute,
        relative=relative,
        exact_zero=absolute == 0.0,
        tolerance=tolerance,
        inputs={"u": u, "v": v, "names": [m.name for m in quad]},
        extra={"norm_lhs": float(np.linalg.norm(lhs)), "norm_rhs": float(np.linalg.norm(rhs))},
        wall_time_ms=1e3 * (time.perf_counter() - t0),
    )


def cubic_residual_symbolic(quad: Sequence[RMatrixFour]) -> PauliOperator:
    """Exact ``LHS − RHS``; zero means the identity holds for all u, v."""
    quad = _check_quadruple(quad)
    if not all(m.backend == "pauli" for m in quad):
        raise ArgumentError("the symbolic residual needs Pauli-backed R-matrices")
    return build_side("LHS", quad) - build_side("RHS", quad)


# ---------------------------------------------------------------------------
# Yang-Baxter baseline


def _braid_diagram(first: str, r: np.ndarray) -> WiringDiagram:
    # three two-site factors on sites (12)(23)(12) or (23)(12)(23)
    pairs = [(0, 1), (1, 2), (0, 1)] if first == "12" else [(1, 2), (0, 1), (1, 2)]
    wire = ["a1", "a2", "a3"]
    nodes = []
    last = {s: k for k, pair in enumerate(pairs) for s in pair}
    for k, (i, j) in enumerate(pairs):
        ins = (wire[i], wire[j])
        outs = tuple(f"g{s + 1}" if last[s] == k else f"x{k}_{s}" for s in (i, j))
        nodes.append(Node.from_matrix(r, ins, outs, f"R{k}"))
        wire[i], wire[j] = outs
    untouched = [s for s in range(3) if wire[s] == f"a{s + 1}"]
    deltas = tuple((f"a{s + 1}", f"g{s + 1}") for s in untouched)
    return WiringDiagram(tuple(nodes), ("a1", "a2", "a3"), ("g1", "g2", "g3"), deltas)


def yang_baxter_residual(r) -> float:
    """``‖Ř₁₂Ř₂₃Ř₁₂ − Ř₂₃Ř₁₂Ř₂₃‖`` on three sites, through the contraction engine."""
    r = np.asarray(r, dtype=complex)
    d = int(round(np.sqrt(r.shape[0])))
    if r.shape != (d * d, d * d):
        raise ArgumentError(f"need a d^2 x d^2 matrix, got {r.shape}")
    return float(np.linalg.norm(contract(_braid_diagram("12", r)) - contract(_braid_diagram("23", r))))


# ---------------------------------------------------------------------------
# railway row


def railway_sites(L: int) -> dict:
    """Site tuples of the row identity on three lattice rows.

    Local rows 0, 1, 2 stand for lattice rows 2n−1, 2n, 2n+1; site
    ``(r, m)`` is numbered ``r*L + (m−1 mod L) + 1``.
    """
    if L < 4 or L % 2:
        raise ArgumentError(f"L must be even and at least 4, got {L}")

    def site(r, m):
        return r * L + (m - 1) % L + 1

    def plaquette(top, m):
        return (site(top, m), site(top, m + 1), site(top - 1, m), site(top - 1, m + 1))

    return {
        "low": [plaquette(1, 2 * m) for m in range(1, L // 2 + 1)],
        "up": [plaquette(2, 2 * m) for m in range(1, L // 2 + 1)],
        "chain": [plaquette(2, m) for m in range(1, L + 1)],
    }


def _railway_factors(L: int, reading: str) -> tuple[list, list]:
    """``(name, sites)`` lists for both sides, in application order."""
    if reading not in RAILWAY_READINGS:
        raise ArgumentError(f"reading must be one of {RAILWAY_READINGS}")
    s = railway_sites(L)
    chain = [("R3" if m % 2 == 0 else "R4", t) for m, t in enumerate(s["chain"], start=1)]
    rhs_chain = chain[::-1] if reading == "literal" else chain
    lhs = chain + [("R1", t) for t in s["low"]] + [("R2", t) for t in s["up"]]
    rhs = [("R2", t) for t in s["low"]] + [("R1", t) for t in s["up"]] + rhs_chain
    return lhs, rhs


def _product(factors, ops, n, identity):
    out = identity
    for name, sites in factors:
        out = ops(name, sites) @ out
    return out


def verify_railway_row(
    L: int,
    quad: Sequence[RMatrixFour],
    u=None,
    v=None,
    backend: str = "exact",
    tolerance: float = 1e-12,
) -> ResidualReport:
    """Check the row identity under both chain-order readings.

    ``"literal"`` takes the right-hand chain as the reversed product printed
    in the identity, ``"forward"`` uses the same order on both sides. The
    report passes if at least one reading holds (exactly, or within the
    relative ``tolerance`` on the dense backend) and names it.
    """
    quad = _check_quadruple(quad)
    n = 3 * L
    t0 = time.perf_counter()
    if backend == "exact":
        if not all(m.backend == "pauli" for m in quad):
            raise ArgumentError("the exact backend needs Pauli-backed R-matrices")
        pauli = {name: m.pauli() for name, m in zip(NAMES, quad)}
        if u is not None or v is not None:
            pauli = {k: op.substitute(u, v) for k, op in pauli.items()}

        def ops(name, sites):
            return pauli[name].embed(sites, n)

        identity = PauliOperator.identity(n)
    elif backend == "dense":
        if L > RAILWAY_NUMERIC_MAX_L:
            raise ResourceError(f"numeric railway check limited to L <= {RAILWAY_NUMERIC_MAX_L}; use the exact backend")
        uu = 0.0 if u is None else u
        vv = 0.0 if v is None else v
        dense = {name: m.dense(uu, vv) for name, m in zip(NAMES, quad)}

        def ops(name, sites):
            return embed_on_sites_sparse(dense[name], sites, n)

        identity = sp.identity(quad[0].d**n, dtype=complex, format="csr")
    else:
        raise ArgumentError(f"backend must be 'exact' or 'dense', got {backend!r}")

    readings = {}
    for reading in RAILWAY_READINGS:
        lhs_f, rhs_f = _railway_factors(L, reading)
        lhs = _product(lhs_f, ops, n, identity)
        rhs = _product(rhs_f, ops, n, identity)
        if backend == "exact":
            diff = lhs - rhs
            readings[reading] = {"exact_zero": diff.is_zero(), "difference_terms": len(diff)}
        else:
            absolute = float(sp.linalg.norm(lhs - rhs))
            scale = max(float(sp.linalg.norm(lhs)), float(sp.linalg.norm(rhs)), 1e-300)
            readings[reading] = {"absolute": absolute, "relative": absolute / scale}

    if backend == "exact":
        passing = [r for r in RAILWAY_READINGS if readings[r]["exact_zero"]]
        absolute = None
        relative = None
    else:
        passing = [r for r in RAILWAY_READINGS if readings[r]["relative"] <= tolerance]
        absolute = min(readings[r]["absolute"] for r in RAILWAY_READINGS)
        relative = min(readings[r]["relative"] for r in RAILWAY_READINGS)
    return ResidualReport(
        kind="railway",
        passed=bool(passing),
        absolute=absolute,
        relative=relative,
        exact_zero=bool(passing) if backend == "exact" else None,
        tolerance=None if backend == "exact" else tolerance,
        inputs={"L": L, "u": u, "v": v, "backend": backend, "names": [m.name for m in quad]},
        extra={"readings": readings, "passing_readings": passing, "rows": "2n-1, 2n, 2n+1"},
        wall_time_ms=1e3 * (time.perf_counter() - t0),
    )
