"""Dense tensor algebra and the wiring-diagram contraction engine.

Conventions used throughout the package:

* flattening is row-major, leftmost index slowest;
* a k-site operator is a ``d**k x d**k`` matrix ``M[out, in]``, so the upper
  (outgoing) indices of an R-matrix label rows;
* operators act on column vectors;
* sites are numbered from 1.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Sequence

import numpy as np

from . import kernels
from .errors import ArgumentError, DiagramError, ResourceError

#: Node wiring of the left-hand side of the cubic equations, as
#: ``(name, inputs, outputs)`` with ``a``/``b``/``g`` for alpha/beta/gamma.
LHS_WIRING = (
    ("R4", ("a5", "a2", "a6", "a3"), ("b1", "b2", "b6", "b3")),
    ("R3", ("a4", "a1", "b1", "b2"), ("g4", "g1", "b5", "b4")),
    ("R2", ("b5", "b6", "a8", "a9"), ("b7", "b8", "g8", "g9")),
    ("R1", ("b4", "b3", "b7", "b8"), ("g2", "g3", "g5", "g6")),
)
LHS_DELTAS = (("a7", "g7"),)

RHS_WIRING = (
    ("R1", ("a4", "a5", "a7", "a8"), ("b7", "b8", "b5", "b6")),
    ("R2", ("a1", "a2", "b7", "b8"), ("g1", "g2", "b4", "b3")),
    ("R3", ("b6", "b3", "a9", "a6"), ("b1", "b2", "g9", "g6")),
    ("R4", ("b5", "b4", "b1", "b2"), ("g7", "g4", "g8", "g5")),
)
RHS_DELTAS = (("a3", "g3"),)

FREE_INPUTS = tuple(f"a{j}" for j in range(1, 10))
FREE_OUTPUTS = tuple(f"g{j}" for j in range(1, 10))

BRUTE_FORCE_MAX_TERMS = 2**30


def local_dim(size: int, k: int) -> int:
    """Return ``d`` with ``d**k == size`` or raise."""
    d = round(size ** (1.0 / k)) if k else 1
    for cand in (d - 1, d, d + 1):
        if cand >= 1 and cand**k == size:
            return cand
    raise ArgumentError(f"dimension {size} is not a perfect {k}-th power")


def as_dense(matrix) -> np.ndarray:
    """Validate and convert to a complex ndarray (finite entries only)."""
    arr = np.asarray(matrix, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ArgumentError("dense tensor has non-finite entries")
    return arr


# ---------------------------------------------------------------------------
# site embeddings and permutations


def _check_sites(sites: Sequence[int], n: int) -> list[int]:
    sites = [int(s) for s in sites]
    if not 1 <= len(sites) <= n:
        raise ArgumentError(f"need between 1 and {n} sites, got {len(sites)}")
    if len(set(sites)) != len(sites):
        raise ArgumentError(f"duplicate sites in {sites}")
    bad = [s for s in sites if not 1 <= s <= n]
    if bad:
        raise ArgumentError(f"sites {bad} out of range 1..{n}")
    return sites


def embed_on_sites(op, sites: Sequence[int], n: int) -> np.ndarray:
    """Embed a k-site operator on the listed sites of an n-site register.

    The operator's j-th tensor factor lands on ``sites[j]``; every other
    site carries the identity.
    """
    op = as_dense(op)
    sites = _check_sites(sites, n)
    k = len(sites)
    d = local_dim(op.shape[0], k)
    if op.shape != (d**k, d**k):
        raise ArgumentError(f"operator shape {op.shape} does not match {k} sites")
    rest = [s for s in range(1, n + 1) if s not in sites]
    full = np.kron(op, np.eye(d ** len(rest), dtype=complex))
    order = sites + rest  # tensor-factor order of ``full``
    axes = [order.index(s) for s in range(1, n + 1)]
    full = full.reshape((d,) * (2 * n)).transpose(axes + [a + n for a in axes])
    return full.reshape(d**n, d**n)


SPARSE_EMBED_MAX_DIM = 2**20


def embed_on_sites_sparse(op, sites: Sequence[int], n: int, max_dim: int = SPARSE_EMBED_MAX_DIM):
    """Sparse (CSR) version of :func:`embed_on_sites` for registers too large
    to hold densely."""
    import scipy.sparse as sp

    op = as_dense(op)
    sites = _check_sites(sites, n)
    k = len(sites)
    d = local_dim(op.shape[0], k)
    if op.shape != (d**k, d**k):
        raise ArgumentError(f"operator shape {op.shape} does not match {k} sites")
    if d**n > max_dim:
        raise ResourceError(f"dimension {d}^{n} exceeds the sparse limit {max_dim}")
    order = sites + [s for s in range(1, n + 1) if s not in sites]
    # natural[j] = natural-order index of the j-th basis state of kron(op, I)
    idx = np.arange(d**n, dtype=np.int64)
    natural = np.zeros_like(idx)
    for pos, site in enumerate(order):
        natural += (idx // d ** (n - 1 - pos)) % d * d ** (n - site)
    full = sp.kron(sp.coo_matrix(op), sp.identity(d ** (n - k), dtype=complex, format="coo"), format="coo")
    return sp.csr_matrix((full.data, (natural[full.row], natural[full.col])), shape=(d**n, d**n))


def _check_permutation(perm: Sequence[int]) -> list[int]:
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(1, len(perm) + 1)):
        raise ArgumentError(f"{perm} is not a permutation of 1..{len(perm)}")
    return perm


def permutation_operator(perm: Sequence[int], d: int = 2) -> np.ndarray:
    """Operator with ``P|a_1..a_n> = |a_perm[1] .. a_perm[n]>``.

    For four sites ``permutation_operator((3, 4, 1, 2))`` is ``P13 P24``.
    """
    perm = _check_permutation(perm)
    n = len(perm)
    states = np.indices((d,) * n).reshape(n, -1)  # column j = digits of basis state j
    image = states[[p - 1 for p in perm]]
    weights = d ** np.arange(n - 1, -1, -1)
    rows = weights @ image
    out = np.zeros((d**n, d**n), dtype=complex)
    out[rows, np.arange(d**n)] = 1.0
    return out


def compose_permutations(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """Permutation ``p∘q`` (apply q first), so that
    ``permutation_operator(p∘q) == permutation_operator(p) @ permutation_operator(q)``."""
    p = _check_permutation(p)
    q = _check_permutation(q)
    if len(p) != len(q):
        raise ArgumentError("permutations of different length")
    return tuple(q[p[i] - 1] for i in range(len(p)))


# ---------------------------------------------------------------------------
# norms


def frobenius_distance(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ArgumentError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.linalg.norm((a - b).ravel()))


def relative_frobenius_distance(a, b, floor: float = 1e-300) -> float:
    """``‖a-b‖ / max(‖a‖, ‖b‖, floor)``."""
    dist = frobenius_distance(a, b)
    scale = max(float(np.linalg.norm(np.ravel(a))), float(np.linalg.norm(np.ravel(b))), floor)
    return dist / scale


# ---------------------------------------------------------------------------
# wiring diagrams


@dataclass(frozen=True, eq=False)
class Node:
    """A tensor with labelled legs; axes are ``outputs + inputs``."""

    tensor: np.ndarray
    inputs: tuple
    outputs: tuple
    name: str = ""

    @classmethod
    def from_matrix(cls, matrix, inputs, outputs, name=""):
        matrix = as_dense(matrix)
        inputs, outputs = tuple(inputs), tuple(outputs)
        d_out = local_dim(matrix.shape[0], len(outputs))
        d_in = local_dim(matrix.shape[1], len(inputs))
        tensor = matrix.reshape((d_out,) * len(outputs) + (d_in,) * len(inputs))
        return cls(tensor, inputs, outputs, name)

    @property
    def labels(self) -> tuple:
        return self.outputs + self.inputs

    def leg_dims(self) -> dict:
        return dict(zip(self.labels, self.tensor.shape))


@dataclass(frozen=True, eq=False)
class WiringDiagram:
    """Nodes, free boundary labels and identity wires (deltas).

    Every internal label is produced by exactly one node output and consumed
    by exactly one node input. Free inputs are consumed once and never
    produced; free outputs are produced once and never consumed.
    """

    nodes: tuple
    free_inputs: tuple
    free_outputs: tuple
    deltas: tuple = ()
    dims: dict = field(default_factory=dict, compare=False)

    def items(self, dims=None) -> list[Node]:
        """Nodes followed by the deltas as two-leg identity nodes."""
        dims = dims or self.label_dims()
        out = list(self.nodes)
        for a, g in self.deltas:
            out.append(Node(np.eye(dims[a], dtype=complex), (a,), (g,), f"delta({a}->{g})"))
        return out

    def label_dims(self) -> dict[Hashable, int]:
        dims: dict = dict(self.dims)
        for node in self.nodes:
            for label, dim in node.leg_dims().items():
                if dims.setdefault(label, dim) != dim:
                    raise DiagramError(f"dimension mismatch on label {label!r}: {dims[label]} vs {dim}")
        for a, g in self.deltas:
            da, dg = dims.get(a), dims.get(g)
            if da is None and dg is None:
                raise DiagramError(f"delta ({a!r}, {g!r}) has no dimension; pass dims")
            if da is not None and dg is not None and da != dg:
                raise DiagramError(f"delta ({a!r}, {g!r}) joins dimensions {da} and {dg}")
            dims[a] = dims[g] = da if da is not None else dg
        return dims

    def validate(self) -> dict:
        """Check the label rules; return the label dimensions."""
        if not self.nodes and not self.deltas:
            raise DiagramError("empty diagram")
        produced: dict = {}
        consumed: dict = {}
        for node in self.nodes:
            if set(node.inputs) & set(node.outputs):
                raise DiagramError(f"node {node.name!r} feeds itself")
            if node.tensor.ndim != len(node.labels):
                raise DiagramError(f"node {node.name!r} has {node.tensor.ndim} axes for {len(node.labels)} labels")
            for label in node.outputs:
                produced[label] = produced.get(label, 0) + 1
            for label in node.inputs:
                consumed[label] = consumed.get(label, 0) + 1
        for a, g in self.deltas:
            consumed[a] = consumed.get(a, 0) + 1
            produced[g] = produced.get(g, 0) + 1

        free_in, free_out = set(self.free_inputs), set(self.free_outputs)
        if len(free_in) != len(self.free_inputs) or len(free_out) != len(self.free_outputs):
            raise DiagramError("repeated free label")
        if free_in & free_out:
            raise DiagramError(f"labels {sorted(map(str, free_in & free_out))} are both free input and output")
        for label in set(produced) | set(consumed) | free_in | free_out:
            p, c = produced.get(label, 0), consumed.get(label, 0)
            if label in free_in:
                ok = (p, c) == (0, 1)
            elif label in free_out:
                ok = (p, c) == (1, 0)
            else:
                ok = (p, c) == (1, 1)
            if not ok:
                raise DiagramError(f"label {label!r} produced {p}x and consumed {c}x")
        return self.label_dims()


def canonical_diagram(side: str, tensors: dict, d: int | None = None) -> WiringDiagram:
    """Build LHS or RHS of the cubic equations from four 4-site matrices.

    ``tensors`` maps ``"R1".."R4"`` to ``d**4 x d**4`` matrices (checked
    convention).
    """
    side = side.upper()
    if side == "LHS":
        wiring, deltas = LHS_WIRING, LHS_DELTAS
    elif side == "RHS":
        wiring, deltas = RHS_WIRING, RHS_DELTAS
    else:
        raise ArgumentError(f"side must be LHS or RHS, got {side!r}")
    nodes = tuple(Node.from_matrix(tensors[name], ins, outs, name) for name, ins, outs in wiring)
    if d is None:
        d = nodes[0].tensor.shape[0]
    return WiringDiagram(nodes, FREE_INPUTS, FREE_OUTPUTS, deltas, dims={lab: d for pair in deltas for lab in pair})


def contract(diagram: WiringDiagram) -> np.ndarray:
    """Contract the diagram pairwise in node-list order (deltas last).

    Returns the matrix with rows indexed by ``free_outputs`` and columns by
    ``free_inputs``.
    """
    dims = diagram.validate()
    current = None
    labels: list = []
    for node in diagram.items(dims):
        node_labels = list(node.labels)
        if current is None:
            current, labels = node.tensor, node_labels
            continue
        shared = [lab for lab in node_labels if lab in labels]
        current = np.tensordot(
            current,
            node.tensor,
            axes=([labels.index(lab) for lab in shared], [node_labels.index(lab) for lab in shared]),
        )
        labels = [lab for lab in labels if lab not in shared] + [lab for lab in node_labels if lab not in shared]
    order = list(diagram.free_outputs) + list(diagram.free_inputs)
    current = np.transpose(current, [labels.index(lab) for lab in order])
    rows = math.prod(dims[lab] for lab in diagram.free_outputs)
    cols = math.prod(dims[lab] for lab in diagram.free_inputs)
    return np.ascontiguousarray(current).reshape(rows, cols)


def brute_force_contract(diagram: WiringDiagram, max_terms: int = BRUTE_FORCE_MAX_TERMS, impl=None) -> np.ndarray:
    """Independent oracle for :func:`contract`: direct summation over every
    joint assignment of all labels.

    ``impl`` picks a kernel module (``kernels.compiled`` or
    ``kernels.fallback``); the default is the one selected at import.
    """
    dims = diagram.validate()
    items = diagram.items(dims)
    out_order = list(diagram.free_outputs) + list(diagram.free_inputs)
    # summed labels innermost: consecutive terms hit the same output slot
    internal = sorted({lab for node in items for lab in node.labels} - set(out_order), key=str)
    all_labels = out_order + internal
    total = math.prod(dims[lab] for lab in all_labels)
    if total > max_terms:
        raise ResourceError(f"brute-force contraction needs {total} terms (limit {max_terms})")
    position = {lab: i for i, lab in enumerate(all_labels)}

    chunks, offsets = [], []
    step = np.zeros((len(all_labels), len(items)), dtype=np.int64)
    offset = 0
    for k, node in enumerate(items):
        tensor = np.ascontiguousarray(node.tensor, dtype=complex)
        offsets.append(offset)
        chunks.append(tensor.ravel())
        strides = [s // tensor.itemsize for s in tensor.strides]
        for lab, stride in zip(node.labels, strides):
            step[position[lab], k] += stride
        offset += tensor.size

    out_step = np.zeros(len(all_labels), dtype=np.int64)
    stride = 1
    for lab in reversed(out_order):
        out_step[position[lab]] = stride
        stride *= dims[lab]

    out = np.zeros(stride, dtype=complex)
    (impl or kernels).brute_force_sum(
        np.concatenate(chunks),
        np.asarray(offsets, dtype=np.int64),
        step,
        out_step,
        np.asarray([dims[lab] for lab in all_labels], dtype=np.int64),
        out,
    )
    rows = math.prod(dims[lab] for lab in diagram.free_outputs)
    return out.reshape(rows, -1)


def composition_order(diagram: WiringDiagram) -> list[tuple[str, tuple[int, ...]]]:
    """Read an in-place diagram as a product of site-embedded operators.

    Free input ``free_inputs[j]`` is wire ``j+1``; a node's k-th output stays
    on the wire of its k-th input. Returns ``(node name, sites)`` in
    application order (first applied first). Raises :class:`DiagramError`
    when the diagram is not of that form.
    """
    diagram.validate()
    wire = {lab: j + 1 for j, lab in enumerate(diagram.free_inputs)}
    for a, g in diagram.deltas:
        if a in wire:
            wire[g] = wire[a]
    pending = list(diagram.nodes)
    order = []
    while pending:
        for node in pending:
            if all(lab in wire for lab in node.inputs):
                break
        else:
            raise DiagramError("diagram has a cycle or dangling inputs")
        if len(node.inputs) != len(node.outputs):
            raise DiagramError(f"node {node.name!r} is not square")
        sites = tuple(wire[lab] for lab in node.inputs)
        for lab_in, lab_out in zip(node.inputs, node.outputs):
            wire[lab_out] = wire[lab_in]
        order.append((node.name, sites))
        pending.remove(node)
    for a, g in diagram.deltas:
        wire.setdefault(g, wire.get(a))
    for j, lab in enumerate(diagram.free_outputs):
        if wire.get(lab) != j + 1:
            raise DiagramError(f"output {lab!r} does not end on wire {j + 1}")
    return order


# ---------------------------------------------------------------------------
# dense JSON file format


def dense_to_json(matrix) -> dict:
    arr = as_dense(matrix)
    return {
        "shape": list(arr.shape),
        "entries": [[float(z.real), float(z.imag)] for z in arr.ravel()],
    }


def dense_from_json(obj) -> np.ndarray:
    if isinstance(obj, (str, Path)):
        obj = json.loads(Path(obj).read_text())
    try:
        shape = [int(s) for s in obj["shape"]]
        entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ArgumentError(f"dense tensor JSON needs 'shape' and 'entries': {exc}") from None
    if any(s <= 0 for s in shape):
        raise ArgumentError(f"non-positive shape {shape}")
    if len(entries) != math.prod(shape):
        raise ArgumentError(f"{len(entries)} entries for shape {shape}")
    values = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return as_dense(values.reshape(shape))
