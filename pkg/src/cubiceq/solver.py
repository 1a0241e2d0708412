"""Alternating least squares for the intertwiners R3, R4.

With R1, R2 and one intertwiner fixed, ``LHS − RHS`` is linear in the
other, ``X ↦ A1·E_a(X)·B1 − A2·E_b(X)·B2``, where ``E_s`` embeds a four-site
matrix on the sites ``s`` and the A/B factors collect what the wiring
applies after/before it. The residual is homogeneous, so each half-step
takes the unit-norm minimizer. The Gram matrix ``M^H M`` (256 x 256 for
qubits) is assembled by contracting the A/B products instead of
materializing ``M``; its lowest eigenvectors seed a small Rayleigh-Ritz
problem on ``M`` itself, which keeps the residual accurate far below the
square root of machine precision.

Residuals are always absolute Frobenius norms with unit-norm intertwiners.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .cubic import N_SITES, side_order
from .errors import ArgumentError, ResourceError
from .rmatrix import RMatrixFour
from .tensor_core import as_dense

TARGETS = ("R3", "R4")
MAX_REGISTER_DIM = 2**12
DEGENERACY_GAP = 1e-10
MONOTONE_SLACK = 1e-12
RITZ_SUBSPACE = 4
GRAM_RESOLVED = 1e-8


@dataclass(frozen=True)
class AlsConfig:
    max_iterations: int = 500
    residual_tolerance: float = 1e-8
    stall_tolerance: float = 1e-10
    stall_patience: int = 25
    seed: int = 0
    init: str = "random"
    init_pair: tuple | None = None
    init_noise: float = 0.0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ArgumentError("max_iterations must be >= 1")
        if self.residual_tolerance <= 0 or self.stall_tolerance <= 0:
            raise ArgumentError("tolerances must be positive")
        if self.stall_patience < 1:
            raise ArgumentError("stall_patience must be >= 1")
        if self.init not in ("random", "provided"):
            raise ArgumentError(f"init must be 'random' or 'provided', got {self.init!r}")
        if self.init == "provided" and (self.init_pair is None or len(self.init_pair) != 2):
            raise ArgumentError("init='provided' needs init_pair=(R3, R4)")
        if self.init_noise < 0:
            raise ArgumentError("init_noise must be >= 0")


@dataclass
class AlsTrace:
    residuals: list = field(default_factory=list)  # initial value, then one per half-step
    smallest_singular_values: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    degenerate_steps: list = field(default_factory=list)
    R3: np.ndarray | None = None
    R4: np.ndarray | None = None
    converged: bool = False
    monotone: bool = True
    stop_reason: str = ""
    iterations: int = 0
    condition_numbers: dict = field(default_factory=dict)
    seed: int = 0
    wall_time_ms: float = 0.0

    @property
    def final_residual(self) -> float:
        return self.residuals[-1]

    def to_dict(self, include_pair: bool = False) -> dict:
        from .tensor_core import dense_to_json

        out = {
            "residuals": [float(r) for r in self.residuals],
            "smallest_singular_values": [float(s) for s in self.smallest_singular_values],
            "gaps": [float(g) for g in self.gaps],
            "degenerate_steps": list(self.degenerate_steps),
            "converged": self.converged,
            "monotone": self.monotone,
            "stop_reason": self.stop_reason,
            "iterations": self.iterations,
            "final_residual": float(self.final_residual),
            "condition_numbers": {k: float(v) for k, v in self.condition_numbers.items()},
            "seed": self.seed,
            "wall_time_ms": self.wall_time_ms,
        }
        if include_pair:
            out["R3"] = dense_to_json(self.R3)
            out["R4"] = dense_to_json(self.R4)
        return out


# ---------------------------------------------------------------------------
# structured products on the nine-site register


def _apply_left(op: np.ndarray, sites, m: np.ndarray, d: int) -> np.ndarray:
    """``E_sites(op) @ m`` without forming the embedding."""
    cols = m.shape[1]
    t = m.reshape((d,) * N_SITES + (cols,))
    axes = [s - 1 for s in sites]
    t = np.tensordot(op.reshape((d,) * 8), t, axes=(list(range(4, 8)), axes))
    t = np.moveaxis(t, list(range(4)), axes)
    return t.reshape(d**N_SITES, cols)


def _product(factors, mats: dict, d: int) -> np.ndarray:
    out = np.eye(d**N_SITES, dtype=complex)
    for name, sites in factors:
        out = _apply_left(mats[name], sites, out, d)
    return out


class LinearMap:
    """The map ``vec(X) ↦ vec(LHS − RHS)`` for one target intertwiner.

    ``apply`` evaluates it; ``gram`` returns ``M^H M`` on ``vec(X)`` (row-major
    ``X.ravel()``), so ``‖M·vec(X)‖² = vec(X)^H · gram · vec(X)``.
    """

    def __init__(self, target: str, mats: dict, d: int):
        if target not in TARGETS:
            raise ArgumentError(f"target must be one of {TARGETS}, got {target!r}")
        if d**N_SITES > MAX_REGISTER_DIM:
            raise ResourceError(f"the nine-site register d^9={d**N_SITES} exceeds {MAX_REGISTER_DIM}")
        self.target, self.d = target, d
        self.parts = {}
        self._after = {}
        for side in ("LHS", "RHS"):
            order = list(side_order(side))
            k = [name for name, _ in order].index(target)
            before, after = order[:k], order[k + 1 :]
            self._after[side] = [(mats[name], sites) for name, sites in after]
            self.parts[side] = (
                _product(after, mats, d),
                order[k][1],
                _product(before, mats, d),
            )
        self._gram = None
        self.largest_eigenvalue = None

    def apply_many(self, xs) -> np.ndarray:
        """Columns ``M·vec(X)`` for a stack of targets, shape ``(d**18, k)``.

        The factors applied after the target are applied one by one, which
        keeps the cost linear in the number of targets.
        """
        xs = np.asarray(xs, dtype=complex)
        k, dim = xs.shape[0], self.d**N_SITES
        total = np.zeros((dim, dim * k), dtype=complex)
        for sign, side in ((1, "LHS"), (-1, "RHS")):
            _, sites, b = self.parts[side]
            z = np.concatenate([_apply_left(x, sites, b, self.d) for x in xs], axis=1)
            for op, fsites in self._after[side]:
                z = _apply_left(op, fsites, z, self.d)
            total += sign * z
        return total.reshape(dim, k, dim).transpose(0, 2, 1).reshape(dim * dim, k)

    def apply(self, x) -> np.ndarray:
        x = as_dense(x)
        out = []
        for side in ("LHS", "RHS"):
            a, sites, b = self.parts[side]
            out.append(a @ _apply_left(x, sites, b, self.d))
        return out[0] - out[1]

    def residual(self, x) -> float:
        return float(np.linalg.norm(self.apply(x)))

    def minimize(self, previous=None, subspace: int = RITZ_SUBSPACE, refine: bool | None = None):
        """Unit-norm minimizer of ``‖M·vec(X)‖``.

        While the smallest Gram eigenvalue is resolved (at least
        ``GRAM_RESOLVED`` times the largest) its eigenvector is returned.
        Otherwise, or with ``refine=True``, the eigenvectors of the
        ``subspace`` smallest eigenvalues plus ``previous`` span a trial
        space; ``M`` is applied to it directly and the smallest right
        singular vector of the product is taken, which avoids the precision
        loss of squaring ``M`` and can never do worse than ``previous``.
        Returns ``(X, two smallest singular values)``.
        """
        dim = self.d**4
        evals, vecs = np.linalg.eigh(self.gram())
        self.largest_eigenvalue = float(evals[-1])
        if refine is None:
            refine = evals[0] < GRAM_RESOLVED * evals[-1]
        if not refine:
            return _unit(vecs[:, 0].reshape(dim, dim)), np.sqrt(np.clip(evals[:2], 0.0, None))
        basis = vecs[:, :subspace]
        if previous is not None:
            basis = np.column_stack([basis, as_dense(previous).ravel()])
        q, _ = np.linalg.qr(basis)
        w = self.apply_many(q.T.reshape(-1, dim, dim))
        _, sv, vh = np.linalg.svd(w, full_matrices=False)
        x = q @ vh[-1].conj()
        return _unit(x.reshape(dim, dim)), sv[::-1][:2]

    def _block(self, x_side: str, y_side: str) -> np.ndarray:
        # sum over p, r of conj(X[p_a, q_a]) C[p, r] Y[r_b, s_b] D[s, q]
        ax, sa, bx = self.parts[x_side]
        ay, sb, by = self.parts[y_side]
        d = self.d
        c = (ax.conj().T @ ay).reshape((d,) * (2 * N_SITES))
        dd = (by @ bx.conj().T).reshape((d,) * (2 * N_SITES))
        letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
        p = [next(letters) for _ in range(N_SITES)]
        r = [next(letters) for _ in range(N_SITES)]
        qa = {s: next(letters) for s in sa}
        sb_ = {s: next(letters) for s in sb}
        q = [qa.get(j + 1, p[j]) for j in range(N_SITES)]
        s = [sb_.get(j + 1, r[j]) for j in range(N_SITES)]
        out = [p[x - 1] for x in sa] + [qa[x] for x in sa] + [r[x - 1] for x in sb] + [sb_[x] for x in sb]
        spec = f"{''.join(p + r)},{''.join(s + q)}->{''.join(out)}"
        g = np.einsum(spec, c, dd, optimize="greedy")
        return g.reshape(d**8, d**8)

    def gram(self) -> np.ndarray:
        if self._gram is None:
            gab = self._block("LHS", "RHS")
            g = self._block("LHS", "LHS") + self._block("RHS", "RHS") - gab - gab.conj().T
            self._gram = 0.5 * (g + g.conj().T)
        return self._gram


def _dense(m, u, v) -> np.ndarray:
    if isinstance(m, RMatrixFour):
        if m.convention != "check":
            raise ArgumentError("the solver works with checked R-matrices")
        return m.dense(u, v)
    return as_dense(m)


def linear_map_for(target: str, fixed, R1, R2, u=0.0, v=0.0) -> LinearMap:
    """Linear map of the cubic residual in ``target`` with the other intertwiner fixed."""
    mats = {"R1": _dense(R1, u, v), "R2": _dense(R2, u, v)}
    other = "R4" if target == "R3" else "R3"
    mats[other] = _dense(fixed, u, v)
    shapes = {m.shape for m in mats.values()}
    if len(shapes) != 1:
        raise ArgumentError(f"R-matrix shapes differ: {shapes}")
    d = int(round(next(iter(shapes))[0] ** 0.25))
    return LinearMap(target, mats, d)


def _unit(x: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(x)
    if n == 0:
        raise ArgumentError("intertwiner initial guess is zero")
    return x / n


def _initial_pair(config: AlsConfig, dim: int, rng: np.random.Generator):
    if config.init == "provided":
        pair = [as_dense(m.dense() if isinstance(m, RMatrixFour) else m) for m in config.init_pair]
    else:
        pair = [rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)) for _ in range(2)]
    if config.init_noise > 0:
        pair = [
            _unit(x) + config.init_noise * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / dim
            for x in pair
        ]
    return [_unit(x) for x in pair]


def als_search(R1, R2, u=0.0, v=0.0, config: AlsConfig = AlsConfig()) -> AlsTrace:
    """Alternate unit-norm least-squares updates of R3 and R4.

    Stops when the residual drops below ``residual_tolerance``, when the
    relative improvement per iteration stays below ``stall_tolerance`` for
    ``stall_patience`` iterations, or after ``max_iterations``.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    r1, r2 = _dense(R1, u, v), _dense(R2, u, v)
    dim = r1.shape[0]
    pair = dict(zip(TARGETS, _initial_pair(config, dim, rng)))
    trace = AlsTrace(seed=config.seed)

    current = linear_map_for("R3", pair["R4"], r1, r2).residual(pair["R3"])
    trace.residuals.append(current)
    stalled = 0
    if current < config.residual_tolerance:
        trace.converged, trace.stop_reason = True, "tolerance"
    else:
        for it in range(1, config.max_iterations + 1):
            start = current
            for target in TARGETS:
                other = "R4" if target == "R3" else "R3"
                lin = linear_map_for(target, pair[other], r1, r2)
                x, sv = lin.minimize(pair[target])
                new = lin.residual(x)
                scale = max(np.sqrt(max(lin.largest_eigenvalue, 0.0)), 1.0)
                if new > current + MONOTONE_SLACK * scale:
                    x, sv = lin.minimize(pair[target], refine=True)
                    new = lin.residual(x)
                trace.smallest_singular_values.append(float(sv[0]))
                trace.gaps.append(float(sv[1] - sv[0]))
                if sv[1] - sv[0] < DEGENERACY_GAP:
                    trace.degenerate_steps.append(len(trace.residuals))
                if new > current + MONOTONE_SLACK * scale:
                    trace.monotone = False
                pair[target] = x
                current = new
                trace.residuals.append(current)
            trace.iterations = it
            if current < config.residual_tolerance:
                trace.converged, trace.stop_reason = True, "tolerance"
                break
            stalled = stalled + 1 if start - current <= config.stall_tolerance * start else 0
            if stalled >= config.stall_patience:
                trace.stop_reason = "stall"
                break
        else:
            trace.stop_reason = "max_iterations"

    trace.R3, trace.R4 = pair["R3"], pair["R4"]
    for name in TARGETS:
        s = np.linalg.svd(pair[name], compute_uv=False)
        trace.condition_numbers[name] = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    trace.wall_time_ms = 1e3 * (time.perf_counter() - t0)
    return trace
