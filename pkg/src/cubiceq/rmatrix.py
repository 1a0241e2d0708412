"""Four-site R-matrices.

An :class:`RMatrixFour` wraps either an exact :class:`~cubiceq.pauli.PauliOperator`
(qubits only) or a dense ``d**4 x d**4`` array, in one of two conventions:

* ``"check"``: the checked matrix Ř, whose k-th output leg sits on the site of
  its k-th input leg;
* ``"plain"``: ``R = P13 P24 · Ř`` (column action), i.e. elementwise
  ``R[b1 b2 b3 b4, a] = Ř[b3 b4 b1 b2, a]``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import ArgumentError, ModeError, SingularMatrixError
from .pauli import PauliOperator
from .polynomial import BivariatePolynomial
from .tensor_core import as_dense, local_dim, permutation_operator

CONVENTIONS = ("check", "plain")
SWAP_PERMUTATION = (3, 4, 1, 2)


@dataclass(frozen=True, eq=False)
class RMatrixFour:
    op: object  # PauliOperator or np.ndarray
    convention: str = "check"
    d: int = 2
    parameter: object = None
    name: str = ""

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ArgumentError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")
        if isinstance(self.op, PauliOperator):
            if self.d != 2 or self.op.n != 4:
                raise ArgumentError("Pauli-backed R-matrices act on four qubits")
        else:
            arr = as_dense(self.op)
            d = local_dim(arr.shape[0], 4) if arr.ndim == 2 else -1
            if arr.shape != (d**4, d**4):
                raise ArgumentError(f"dense R-matrix must be square d^4 x d^4, got {arr.shape}")
            object.__setattr__(self, "op", arr)
            object.__setattr__(self, "d", d)

    @property
    def backend(self) -> str:
        return "pauli" if isinstance(self.op, PauliOperator) else "dense"

    def dense(self, u=0.0, v=0.0) -> np.ndarray:
        if isinstance(self.op, PauliOperator):
            return self.op.evaluate_dense(u, v)
        return self.op

    def pauli(self) -> PauliOperator:
        if not isinstance(self.op, PauliOperator):
            raise ArgumentError(f"R-matrix {self.name!r} is dense, not Pauli-backed")
        return self.op

    def at(self, u=0.0, v=0.0) -> "RMatrixFour":
        """Dense copy with the spectral parameters bound to numbers."""
        return replace(self, op=self.dense(u, v), parameter={"u": u, "v": v})

    def scaled(self, c) -> "RMatrixFour":
        if isinstance(self.op, PauliOperator):
            return replace(self, op=self.op.scale(c))
        return replace(self, op=self.op * complex(c))

    def __repr__(self):
        return f"RMatrixFour(name={self.name!r}, convention={self.convention!r}, backend={self.backend!r}, parameter={self.parameter!r})"


def _parameter(param):
    if isinstance(param, str):
        return BivariatePolynomial.parse(param)
    if isinstance(param, BivariatePolynomial):
        return param
    return BivariatePolynomial.constant(param)


def _uniform(letter: str, param, sign: int, name: str) -> RMatrixFour:
    coeff = _parameter(param) * sign
    op = PauliOperator(4, {"IIII": 1, letter * 4: coeff})
    return RMatrixFour(op, "check", 2, param if isinstance(param, str) else str(coeff * sign), name)


def kitaev_A(u="u") -> RMatrixFour:
    """``Ř_A(u) = 1 + u X⊗X⊗X⊗X``."""
    return _uniform("X", u, 1, "kitaev_A")


def kitaev_B(v="v") -> RMatrixFour:
    """``Ř_B(v) = 1 + v Z⊗Z⊗Z⊗Z``."""
    return _uniform("Z", v, 1, "kitaev_B")


def kitaev_A_inv(u="u") -> RMatrixFour:
    """Projective inverse ``1 - u X⊗X⊗X⊗X`` of :func:`kitaev_A` (scale ``1 - u²``)."""
    return _uniform("X", u, -1, "kitaev_A_inv")


def identity_rmatrix(d: int = 2, backend: str = "pauli") -> RMatrixFour:
    if backend == "pauli":
        if d != 2:
            raise ArgumentError("the Pauli backend is qubit-only")
        return RMatrixFour(PauliOperator.identity(4), "check", 2, None, "identity")
    return RMatrixFour(np.eye(d**4, dtype=complex), "check", d, None, "identity")


def from_dense(matrix, convention: str = "check", name: str = "") -> RMatrixFour:
    return RMatrixFour(as_dense(matrix), convention, name=name)


def from_pauli_text(text: str, convention: str = "check", name: str = "") -> RMatrixFour:
    op = PauliOperator.from_text(text)
    if op.n != 4:
        raise ArgumentError(f"an R-matrix needs 4-letter words, got {op.n}")
    return RMatrixFour(op, convention, 2, None, name)


# ---------------------------------------------------------------------------
# conventions


def _swap_pauli() -> PauliOperator:
    half = Fraction(1, 2)
    swap = PauliOperator(2, {"II": half, "XX": half, "YY": half, "ZZ": half})
    return swap.embed((1, 3), 4) * swap.embed((2, 4), 4)


def _swap_output_pairs(m: RMatrixFour) -> object:
    if isinstance(m.op, PauliOperator):
        return _swap_pauli() * m.op
    d = m.d
    t = m.op.reshape((d,) * 8).transpose(2, 3, 0, 1, 4, 5, 6, 7)
    return np.ascontiguousarray(t).reshape(d**4, d**4)


def to_R(m: RMatrixFour) -> RMatrixFour:
    """Checked → plain convention (pure index relabelling for dense input)."""
    if m.convention != "check":
        raise ArgumentError(f"to_R expects the checked convention, got {m.convention!r}")
    return replace(m, op=_swap_output_pairs(m), convention="plain")


def to_checked(m: RMatrixFour) -> RMatrixFour:
    """Plain → checked convention; the relabelling is an involution."""
    if m.convention != "plain":
        raise ArgumentError(f"to_checked expects the plain convention, got {m.convention!r}")
    return replace(m, op=_swap_output_pairs(m), convention="check")


def as_checked(m: RMatrixFour) -> RMatrixFour:
    return m if m.convention == "check" else to_checked(m)


def permute_legs(m: RMatrixFour, perm) -> RMatrixFour:
    """Conjugate by the leg permutation: ``P(perm) · M · P(perm)^T``."""
    perm = tuple(int(p) for p in perm)
    if isinstance(m.op, PauliOperator):
        # P moves the letter of leg perm[j] to slot j
        out = {}
        for word, c in m.op.terms():
            out["".join(word.letters[p - 1] for p in perm)] = c
        return replace(m, op=PauliOperator(4, out))
    p = permutation_operator(perm, m.d)
    return replace(m, op=p @ m.op @ p.T)


# ---------------------------------------------------------------------------
# inversion


class Inverse(NamedTuple):
    """``m · rmatrix = scale · I``."""

    rmatrix: RMatrixFour
    scale: object
    condition_number: float | None = None


def invert(m: RMatrixFour, mode: str = "projective", rcond: float = 1e-13) -> Inverse:
    """Projective (exact, Pauli) or dense-numeric inverse.

    Projective mode recognizes ``a·I + b·S`` with a single Pauli string
    ``S`` (so ``S² = I``) and returns ``a·I - b·S`` with scale ``a² - b²``.
    """
    if mode == "projective":
        if not isinstance(m.op, PauliOperator):
            raise ModeError("projective inversion needs a Pauli-backed R-matrix")
        ident = "I" * 4
        a = m.op.coefficient(ident)
        others = [(w, c) for w, c in m.op.terms() if w.letters != ident]
        if len(others) > 1:
            raise ModeError(f"{len(others)} non-identity strings; projective form is a·I + b·S")
        if not others:
            if a.is_zero():
                raise SingularMatrixError("zero operator", 0.0)
            return Inverse(replace(m, op=PauliOperator.identity(4), name=f"inv({m.name})"), a)
        word, b = others[0]
        inv = PauliOperator(4, {ident: a, word.letters: -b})
        return Inverse(replace(m, op=inv, name=f"inv({m.name})"), a * a - b * b)
    if mode == "dense":
        matrix = m.dense() if not isinstance(m.op, PauliOperator) or m.op.max_degree() == (0, 0) else None
        if matrix is None:
            raise ModeError("dense inversion needs numeric entries; bind parameters with .at(u, v) first")
        s = np.linalg.svd(matrix, compute_uv=False)
        if s[-1] <= rcond * s[0]:
            raise SingularMatrixError(f"matrix is singular (smallest singular value {s[-1]:.3e})", float(s[-1]))
        inv = np.linalg.inv(matrix)
        return Inverse(replace(m, op=inv, name=f"inv({m.name})"), 1.0, float(s[0] / s[-1]))
    raise ModeError(f"unknown inversion mode {mode!r}")


def true_inverse(m: RMatrixFour, u=0.0, v=0.0) -> np.ndarray:
    """Numeric inverse at a parameter point; fails where the projective scale vanishes."""
    if isinstance(m.op, PauliOperator):
        try:
            inv = invert(m, "projective")
        except ModeError:
            return invert(m.at(u, v), "dense").rmatrix.op
        scale = inv.scale.evaluate(u, v)
        if abs(scale) < 1e-14:
            raise SingularMatrixError(f"projective scale vanishes at u={u}, v={v}", 0.0)
        return inv.rmatrix.dense(u, v) / scale
    return invert(m, "dense").rmatrix.op
