import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubiceq.errors import ArgumentError, DiagramError, ResourceError
from cubiceq.tensor_core import (
    FREE_INPUTS,
    FREE_OUTPUTS,
    LHS_WIRING,
    RHS_WIRING,
    Node,
    WiringDiagram,
    brute_force_contract,
    canonical_diagram,
    compose_permutations,
    composition_order,
    contract,
    dense_from_json,
    dense_to_json,
    embed_on_sites,
    embed_on_sites_sparse,
    frobenius_distance,
    permutation_operator,
    relative_frobenius_distance,
)

from conftest import random_complex, random_inplace_diagram

X = np.array([[0, 1], [1, 0]], dtype=complex)
SWAP = np.eye(4)[[0, 2, 1, 3]]


def embed_oracle(op, sites, n, d=2):
    """Nested-loop reference for embed_on_sites."""
    out = np.zeros((d**n, d**n), dtype=complex)
    for row in itertools.product(range(d), repeat=n):
        for col in itertools.product(range(d), repeat=n):
            if any(row[s] != col[s] for s in range(n) if s + 1 not in sites):
                continue
            r = sum(row[s - 1] * d ** (len(sites) - 1 - j) for j, s in enumerate(sites))
            c = sum(col[s - 1] * d ** (len(sites) - 1 - j) for j, s in enumerate(sites))
            ri = sum(v * d ** (n - 1 - j) for j, v in enumerate(row))
            ci = sum(v * d ** (n - 1 - j) for j, v in enumerate(col))
            out[ri, ci] = op[r, c]
    return out


# -- embeddings ---------------------------------------------------------------


def test_embed_single_site_is_kron_with_identity():
    assert np.array_equal(embed_on_sites(X, [1], 2), np.kron(X, np.eye(2)))


def test_embed_identity_is_identity():
    assert np.array_equal(embed_on_sites(np.eye(4), [3, 1], 4), np.eye(16))


def test_embed_reversed_sites_conjugates_by_swap(rng):
    m = random_complex(rng, (4, 4))
    assert np.allclose(embed_on_sites(m, [2, 1], 2), SWAP @ m @ SWAP, atol=1e-15)


@pytest.mark.parametrize("sites", [(1,), (3, 1), (2, 4, 1), (4, 2)])
def test_embed_matches_nested_loop_oracle(rng, sites):
    k = len(sites)
    m = random_complex(rng, (2**k, 2**k))
    assert np.allclose(embed_on_sites(m, sites, 4), embed_oracle(m, sites, 4), atol=1e-14)


def test_sparse_embed_matches_dense(rng):
    m = random_complex(rng, (16, 16))
    sparse = embed_on_sites_sparse(m, (5, 2, 6, 3), 7)
    assert np.array_equal(sparse.toarray(), embed_on_sites(m, (5, 2, 6, 3), 7))


@pytest.mark.parametrize("sites", [(1, 1), (0,), (5,), ()])
def test_embed_rejects_bad_sites(sites):
    with pytest.raises(ArgumentError):
        embed_on_sites(np.eye(2 ** max(len(sites), 1)), sites, 4)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), sites=st.permutations([1, 2, 3]).map(lambda p: p[:2]))
def test_embed_preserves_products(seed, sites):
    rng = np.random.default_rng(seed)
    a, b = random_complex(rng, (4, 4)), random_complex(rng, (4, 4))
    lhs = embed_on_sites(a @ b, sites, 3)
    rhs = embed_on_sites(a, sites, 3) @ embed_on_sites(b, sites, 3)
    assert np.allclose(lhs, rhs, atol=1e-12)


# -- permutations ----------------------------------------------------------------


def test_identity_permutation():
    assert np.array_equal(permutation_operator((1, 2, 3)), np.eye(8))


def test_pair_swap_is_involution():
    p = permutation_operator((3, 4, 1, 2))
    assert np.array_equal(p @ p, np.eye(16))


def test_pair_swap_on_every_basis_state():
    p = permutation_operator((3, 4, 1, 2))
    for a, b, c, d in itertools.product(range(2), repeat=4):
        src = 8 * a + 4 * b + 2 * c + d
        dst = 8 * c + 4 * d + 2 * a + b
        assert p[dst, src] == 1 and p[:, src].sum() == 1


def test_permutation_operator_is_unitary_for_qutrits():
    p = permutation_operator((2, 3, 1), d=3)
    assert np.allclose(p @ p.T, np.eye(27))


@pytest.mark.parametrize("perm", [(1, 1), (0, 1), (1, 3)])
def test_invalid_permutation(perm):
    with pytest.raises(ArgumentError):
        permutation_operator(perm)


@settings(max_examples=50, deadline=None)
@given(p=st.permutations([1, 2, 3, 4]), q=st.permutations([1, 2, 3, 4]))
def test_permutation_composition_law(p, q):
    # p∘q applies q first
    lhs = permutation_operator(compose_permutations(p, q))
    assert np.array_equal(lhs, permutation_operator(p) @ permutation_operator(q))


# -- norms -------------------------------------------------------------------------


def test_frobenius_basics(rng):
    m = random_complex(rng, (5, 5))
    assert frobenius_distance(m, m) == 0.0
    assert math.isclose(frobenius_distance(np.zeros((7, 7)), np.eye(7)), math.sqrt(7))


def test_frobenius_matches_elementwise_sum(rng):
    a, b = random_complex(rng, (6, 4)), random_complex(rng, (6, 4))
    oracle = math.sqrt(sum(abs(a[i, j] - b[i, j]) ** 2 for i in range(6) for j in range(4)))
    assert math.isclose(frobenius_distance(a, b), oracle, rel_tol=1e-13)


def test_relative_distance_uses_larger_norm_and_floor():
    assert relative_frobenius_distance(np.zeros(3), np.zeros(3)) == 0.0
    assert math.isclose(relative_frobenius_distance(np.zeros(4), 2 * np.ones(4)), 1.0)


def test_frobenius_shape_mismatch():
    with pytest.raises(ArgumentError):
        frobenius_distance(np.zeros((2, 2)), np.zeros((2, 3)))


# -- contraction ---------------------------------------------------------------------


def straight_through(m):
    node = Node.from_matrix(m, ("a1", "a2"), ("g1", "g2"), "M")
    return WiringDiagram((node,), ("a1", "a2"), ("g1", "g2"))


def test_single_node_contracts_to_itself(rng, kernel_impl):
    m = random_complex(rng, (4, 4))
    assert np.allclose(contract(straight_through(m)), m)
    assert np.allclose(brute_force_contract(straight_through(m), impl=kernel_impl), m)


def test_single_delta_is_identity(kernel_impl):
    dg = WiringDiagram((), ("a",), ("g",), (("a", "g"),), dims={"a": 3, "g": 3})
    assert np.array_equal(brute_force_contract(dg, impl=kernel_impl), np.eye(3))
    assert np.array_equal(contract(dg), np.eye(3))


@pytest.mark.parametrize("side", ["LHS", "RHS"])
def test_canonical_identity_inputs_give_identity(side):
    eye = {f"R{k}": np.eye(16) for k in range(1, 5)}
    assert np.array_equal(contract(canonical_diagram(side, eye)), np.eye(512))


@pytest.mark.parametrize("side", ["LHS", "RHS"])
def test_canonical_wirings_against_brute_force(rng, side, kernel_impl):
    tensors = {f"R{k}": random_complex(rng, (16, 16)) for k in range(1, 5)}
    dg = canonical_diagram(side, tensors)
    fast = contract(dg)
    slow = brute_force_contract(dg, impl=kernel_impl)
    assert relative_frobenius_distance(fast, slow) <= 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_random_diagrams_against_brute_force(seed, kernel_impl):
    dg = random_inplace_diagram(np.random.default_rng(seed))
    assert relative_frobenius_distance(contract(dg), brute_force_contract(dg, impl=kernel_impl)) <= 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_contract_independent_of_node_order(seed):
    rng = np.random.default_rng(100 + seed)
    dg = random_inplace_diagram(rng, n_nodes=4)
    shuffled = WiringDiagram(
        tuple(dg.nodes[k] for k in rng.permutation(len(dg.nodes))),
        dg.free_inputs,
        dg.free_outputs,
        dg.deltas,
        dims=dg.dims,
    )
    assert np.allclose(contract(dg), contract(shuffled), rtol=0, atol=1e-12 * np.linalg.norm(contract(dg)))


def test_brute_force_size_guard(rng):
    tensors = {f"R{k}": random_complex(rng, (16, 16)) for k in range(1, 5)}
    with pytest.raises(ResourceError):
        brute_force_contract(canonical_diagram("LHS", tensors), max_terms=2**20)


def test_dangling_label_rejected():
    node = Node.from_matrix(np.eye(2), ("a",), ("b",))
    with pytest.raises(DiagramError):
        contract(WiringDiagram((node,), ("a",), ("g",)))


def test_triple_use_rejected():
    n1 = Node.from_matrix(np.eye(2), ("a",), ("b",))
    n2 = Node.from_matrix(np.eye(2), ("b",), ("g",))
    n3 = Node.from_matrix(np.eye(2), ("b",), ("h",))
    with pytest.raises(DiagramError):
        contract(WiringDiagram((n1, n2, n3), ("a",), ("g", "h")))


def test_dimension_mismatch_rejected():
    n1 = Node.from_matrix(np.eye(2), ("a",), ("b",))
    n2 = Node.from_matrix(np.eye(3), ("b",), ("g",))
    with pytest.raises(DiagramError):
        contract(WiringDiagram((n1, n2), ("a",), ("g",)))


def test_self_feeding_node_rejected():
    node = Node.from_matrix(np.eye(4), ("a", "b"), ("b", "g"))
    with pytest.raises(DiagramError):
        WiringDiagram((node,), ("a",), ("g",)).validate()


def test_canonical_wirings_are_well_formed():
    for wiring in (LHS_WIRING, RHS_WIRING):
        assert len(wiring) == 4
        for _, ins, outs in wiring:
            assert len(ins) == len(outs) == 4
    assert FREE_INPUTS == tuple(f"a{j}" for j in range(1, 10))
    assert FREE_OUTPUTS == tuple(f"g{j}" for j in range(1, 10))


def test_composition_order_recovers_site_tuples():
    eye = {f"R{k}": np.eye(16) for k in range(1, 5)}
    assert composition_order(canonical_diagram("LHS", eye)) == [
        ("R4", (5, 2, 6, 3)),
        ("R3", (4, 1, 5, 2)),
        ("R2", (5, 6, 8, 9)),
        ("R1", (2, 3, 5, 6)),
    ]
    assert composition_order(canonical_diagram("RHS", eye)) == [
        ("R1", (4, 5, 7, 8)),
        ("R2", (1, 2, 4, 5)),
        ("R3", (8, 5, 9, 6)),
        ("R4", (7, 4, 8, 5)),
    ]


def test_composition_order_product_equals_contraction(rng):
    tensors = {f"R{k}": random_complex(rng, (16, 16)) for k in range(1, 5)}
    for side in ("LHS", "RHS"):
        dg = canonical_diagram(side, tensors)
        product = np.eye(512, dtype=complex)
        for name, sites in composition_order(dg):
            product = embed_on_sites(tensors[name], sites, 9) @ product
        assert relative_frobenius_distance(product, contract(dg)) <= 1e-13


def test_dense_json_round_trip(rng, tmp_path):
    m = random_complex(rng, (4, 4))
    obj = dense_to_json(m)
    assert obj["shape"] == [4, 4] and len(obj["entries"]) == 16
    path = tmp_path / "m.json"
    import json

    path.write_text(json.dumps(obj))
    assert np.array_equal(dense_from_json(path), m)
    assert np.array_equal(dense_from_json(obj), m)


def test_dense_json_rejects_wrong_entry_count():
    with pytest.raises(ArgumentError):
        dense_from_json({"shape": [2, 2], "entries": [[1, 0]] * 3})
