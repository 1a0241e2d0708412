"""Exact Pauli-string operators with polynomial coefficients.

A :class:`PauliOperator` on ``n`` qubits is a map from Pauli strings to
:class:`~cubiceq.polynomial.BivariatePolynomial` coefficients. Letter ``j``
of a word acts on site ``j+1``, the leftmost (slowest) tensor factor first,
matching the dense convention of :mod:`cubiceq.tensor_core`.

Text format, one term per line (blank lines and ``#`` comments ignored)::

    <coefficient> <WORD>

``WORD`` is over ``I X Y Z``; the coefficient follows the polynomial grammar
of :mod:`cubiceq.polynomial` and defaults to ``1`` when omitted. Example::

    1 IIII
    u XXXX
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import ArgumentError, ResourceError
from .polynomial import BivariatePolynomial, add_raw_into, check_degree, gaussian_to_complex, mul_raw

LETTERS = "IXYZ"
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_LETTER = {v: k for k, v in _BITS.items()}

DENSE_MAX_DIM = 2**12
SPARSE_MAX_DIM = 2**20
_KERNEL_MAX_SITES = 64


@dataclass(frozen=True, order=True)
class PauliString:
    """A word over ``IXYZ``; bit ``j`` of the masks belongs to letter ``j``."""

    letters: str

    def __post_init__(self):
        bad = set(self.letters) - set(LETTERS)
        if bad:
            raise ArgumentError(f"invalid Pauli letters {sorted(bad)} in {self.letters!r}")

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def masks(self) -> tuple[int, int]:
        x = z = 0
        for j, ch in enumerate(self.letters):
            bx, bz = _BITS[ch]
            x |= bx << j
            z |= bz << j
        return x, z

    @classmethod
    def from_masks(cls, x: int, z: int, n: int) -> "PauliString":
        return cls("".join(_LETTER[((x >> j) & 1, (z >> j) & 1)] for j in range(n)))

    def __str__(self):
        return self.letters


def string_product(x1: int, z1: int, x2: int, z2: int) -> tuple[int, int, int]:
    """Product of two strings: returns ``(x, z, k)`` with phase ``i**k``."""
    cyc = (x1 & ~z1 & x2 & z2) | (x1 & z1 & ~x2 & z2) | (~x1 & z1 & x2 & ~z2)
    anti = (x1 & z1 & x2 & ~z2) | (~x1 & z1 & x2 & z2) | (x1 & ~z1 & ~x2 & z2)
    return x1 ^ x2, z1 ^ z2, (cyc.bit_count() - anti.bit_count()) & 3


class PauliOperator:
    """Immutable exact operator ``sum_s c_s(u, v) * s`` over Pauli strings ``s``."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping | None = None):
        if n < 1:
            raise ArgumentError("a Pauli operator needs at least one site")
        self.n = int(n)
        clean = {}
        for key, coeff in (terms or {}).items():
            if isinstance(key, str):
                key = PauliString(key)
            if isinstance(key, PauliString):
                if key.n != n:
                    raise ArgumentError(f"word {key} has length {key.n}, expected {n}")
                key = key.masks
            coeff = BivariatePolynomial.coerce(coeff)
            if not coeff.is_zero():
                clean[key] = coeff
        self._terms = clean

    @classmethod
    def _from_raw(cls, n: int, raw: dict):
        obj = cls.__new__(cls)
        obj.n = n
        obj._terms = {}
        for key, terms in raw.items():
            poly = BivariatePolynomial._from_raw(terms)
            if not poly.is_zero():
                obj._terms[key] = poly
        return obj

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, n: int):
        return cls(n)

    @classmethod
    def identity(cls, n: int, coeff=1):
        return cls(n, {(0, 0): coeff})

    @classmethod
    def from_string(cls, word: str, coeff=1):
        return cls(len(word), {word: coeff})

    @classmethod
    def from_terms(cls, terms: Mapping[str, object]):
        words = list(terms)
        if not words:
            raise ArgumentError("from_terms needs at least one word to fix the size")
        return cls(len(words[0]), terms)

    # -- inspection -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self):
        return len(self._terms)

    def terms(self) -> list[tuple[PauliString, BivariatePolynomial]]:
        """Terms in canonical (lexicographic word) order."""
        items = [(PauliString.from_masks(x, z, self.n), c) for (x, z), c in self._terms.items()]
        return sorted(items, key=lambda item: item[0].letters)

    def coefficient(self, word) -> BivariatePolynomial:
        if isinstance(word, str):
            word = PauliString(word)
        return self._terms.get(word.masks, BivariatePolynomial())

    def max_degree(self) -> tuple[int, int]:
        du = max((c.degree_u for c in self._terms.values()), default=0)
        dv = max((c.degree_v for c in self._terms.values()), default=0)
        return du, dv

    def trace(self) -> BivariatePolynomial:
        """Only the identity string has nonzero trace, equal to ``2**n``."""
        return self.coefficient("I" * self.n) * 2**self.n

    # -- arithmetic -------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, PauliOperator):
            raise ArgumentError(f"expected PauliOperator, got {type(other).__name__}")
        if other.n != self.n:
            raise ArgumentError(f"size mismatch: {self.n} vs {other.n} sites")

    def __add__(self, other):
        if not isinstance(other, PauliOperator):
            other = PauliOperator.identity(self.n, other)
        self._check(other)
        out = dict(self._terms)
        for key, c in other._terms.items():
            total = out[key] + c if key in out else c
            if total.is_zero():
                out.pop(key, None)
            else:
                out[key] = total
        return PauliOperator(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return PauliOperator(self.n, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, PauliOperator):
            other = PauliOperator.identity(self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "PauliOperator":
        c = BivariatePolynomial.coerce(c)
        return PauliOperator(self.n, {k: v * c for k, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, PauliOperator):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __matmul__(self, other):
        return multiply(self, other)

    def __eq__(self, other):
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def adjoint(self) -> "PauliOperator":
        # Pauli strings are Hermitian
        return PauliOperator(self.n, {k: c.conjugate() for k, c in self._terms.items()})

    def substitute(self, u=None, v=None) -> "PauliOperator":
        return PauliOperator(self.n, {k: c.substitute(u=u, v=v) for k, c in self._terms.items()})

    def embed(self, sites: Iterable[int], n: int) -> "PauliOperator":
        """Place this operator's letter ``j`` on ``sites[j]`` (1-based) of an n-site register."""
        sites = [int(s) for s in sites]
        if len(sites) != self.n or len(set(sites)) != len(sites) or not all(1 <= s <= n for s in sites):
            raise ArgumentError(f"invalid site list {sites} for a {self.n}-site operator on {n} sites")
        out = {}
        for (x, z), c in self._terms.items():
            nx = nz = 0
            for j, s in enumerate(sites):
                nx |= ((x >> j) & 1) << (s - 1)
                nz |= ((z >> j) & 1) << (s - 1)
            out[(nx, nz)] = c
        return PauliOperator(n, out)

    # -- numeric views ----------------------------------------------------

    def evaluate_sparse(self, u=0.0, v=0.0, max_dim: int = SPARSE_MAX_DIM) -> sp.csr_matrix:
        dim = 2**self.n
        if dim > max_dim:
            raise ResourceError(f"dimension 2^{self.n} exceeds the sparse limit {max_dim}")
        cols = np.arange(dim, dtype=np.int64)
        by_flip: dict[int, np.ndarray] = {}
        for (x, z), c in self._terms.items():
            value = c.evaluate(u, v)
            if value == 0:
                continue
            bx, bz = _basis_mask(x, self.n), _basis_mask(z, self.n)
            # P|b> = i^{#Y} (-1)^{popcount(b & z)} |b xor x>
            signs = 1 - 2 * (np.bitwise_count(cols & bz) & 1).astype(np.int64)
            diag = value * (1j ** ((x & z).bit_count() % 4)) * signs
            if bx in by_flip:
                by_flip[bx] = by_flip[bx] + diag
            else:
                by_flip[bx] = diag.astype(complex)
        if not by_flip:
            return sp.csr_matrix((dim, dim), dtype=complex)
        rows = np.concatenate([cols ^ bx for bx in by_flip])
        data = np.concatenate(list(by_flip.values()))
        allcols = np.tile(cols, len(by_flip))
        return sp.csr_matrix((data, (rows, allcols)), shape=(dim, dim))

    def evaluate_dense(self, u=0.0, v=0.0, max_dim: int = DENSE_MAX_DIM) -> np.ndarray:
        """Dense matrix at numeric ``(u, v)``; guarded at ``2**n <= max_dim``."""
        if 2**self.n > max_dim:
            raise ResourceError(f"dimension 2^{self.n} exceeds the dense limit {max_dim}")
        return self.evaluate_sparse(u, v).toarray()

    # -- text ----------------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for word, c in self.terms():
            text = str(c)
            if len(c.terms) > 1:
                text = f"({text})"
            lines.append(f"{text} {word}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> "PauliOperator":
        terms: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, _, word = line.rpartition(" ")
            word = word.strip()
            if set(word) - set(LETTERS) or not word:
                raise ArgumentError(f"line {lineno}: {word!r} is not a Pauli word")
            if n is None:
                n = len(word)
            if len(word) != n:
                raise ArgumentError(f"line {lineno}: word length {len(word)} differs from {n}")
            coeff = BivariatePolynomial.parse(head) if head.strip() else BivariatePolynomial.constant(1)
            key = PauliString(word).masks
            terms[key] = terms[key] + coeff if key in terms else coeff
        if n is None:
            raise ArgumentError("empty Pauli operator text")
        return cls(n, terms)

    def __repr__(self):
        body = " + ".join(f"({c})*{w}" for w, c in self.terms()) or "0"
        return f"PauliOperator(n={self.n}: {body})"


def _basis_mask(mask: int, n: int) -> int:
    """Letter-order mask to basis-index mask (site 1 is the most significant bit)."""
    out = 0
    for j in range(n):
        if (mask >> j) & 1:
            out |= 1 << (n - 1 - j)
    return out


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Exact product ``a·b``."""
    a._check(b)
    items_a = list(a._terms.items())
    items_b = list(b._terms.items())
    if not items_a or not items_b:
        return PauliOperator.zero(a.n)
    raw_a = [c._terms for _, c in items_a]
    raw_b = [c._terms for _, c in items_b]
    nb = len(items_b)
    out: dict = {}
    if a.n <= _KERNEL_MAX_SITES:
        xa = np.fromiter((k[0] for k, _ in items_a), dtype=np.uint64, count=len(items_a))
        za = np.fromiter((k[1] for k, _ in items_a), dtype=np.uint64, count=len(items_a))
        xb = np.fromiter((k[0] for k, _ in items_b), dtype=np.uint64, count=nb)
        zb = np.fromiter((k[1] for k, _ in items_b), dtype=np.uint64, count=nb)
        xs, zs, phases = kernels.pauli_products(xa, za, xb, zb)
        xs, zs, phases = xs.tolist(), zs.tolist(), phases.tolist()
        p = 0
        for i in range(len(items_a)):
            ta = raw_a[i]
            for j in range(nb):
                key = (xs[p], zs[p])
                target = out.get(key)
                if target is None:
                    target = out[key] = {}
                add_raw_into(target, mul_raw(ta, raw_b[j]), phases[p])
                p += 1
    else:
        for (ka, _), ta in zip(items_a, raw_a):
            for (kb, _), tb in zip(items_b, raw_b):
                x, z, phase = string_product(ka[0], ka[1], kb[0], kb[1])
                target = out.setdefault((x, z), {})
                add_raw_into(target, mul_raw(ta, tb), phase)
    for terms in out.values():
        check_degree(terms)
    return PauliOperator._from_raw(a.n, out)


def commutator(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Exact ``[a, b] = a·b - b·a``."""
    return multiply(a, b) - multiply(b, a)


def series_coefficient(op: PauliOperator, r: int, s: int = 0) -> PauliOperator:
    """Operator coefficient of ``u^r v^s``."""
    return PauliOperator(op.n, {k: BivariatePolynomial.constant(c.coefficient(r, s)) for k, c in op._terms.items()})


def evaluate_dense(op: PauliOperator, u=0.0, v=0.0, max_dim: int = DENSE_MAX_DIM) -> np.ndarray:
    return op.evaluate_dense(u, v, max_dim=max_dim)


def to_complex_scalar(poly: BivariatePolynomial) -> complex:
    return gaussian_to_complex(poly.constant_value())
