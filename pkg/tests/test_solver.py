import numpy as np
import pytest

from cubiceq.cubic import cubic_residual, kitaev_quadruple
from cubiceq.errors import ArgumentError
from cubiceq.rmatrix import from_dense, identity_rmatrix
from cubiceq.solver import AlsConfig, als_search, linear_map_for

from conftest import random_complex

U, V = 0.3, 0.7
QUAD = kitaev_quadruple()


@pytest.fixture(scope="module")
def maps():
    return {
        "R3": linear_map_for("R3", QUAD[3], QUAD[0], QUAD[1], U, V),
        "R4": linear_map_for("R4", QUAD[2], QUAD[0], QUAD[1], U, V),
    }


def full_residual(r3, r4):
    quad = (QUAD[0], QUAD[1], from_dense(r3), from_dense(r4))
    return cubic_residual(quad, U, V).absolute


def test_linear_maps_match_the_cubic_residual(maps, rng):
    x = random_complex(rng, (16, 16))
    assert np.isclose(maps["R3"].residual(x), full_residual(x, QUAD[3].dense(U, V)), rtol=1e-10)
    assert np.isclose(maps["R4"].residual(x), full_residual(QUAD[2].dense(U, V), x), rtol=1e-10)


def test_linear_map_is_linear(maps, rng):
    a, b = random_complex(rng, (16, 16)), random_complex(rng, (16, 16))
    lin = maps["R3"]
    assert np.allclose(lin.apply(a + 2j * b), lin.apply(a) + 2j * lin.apply(b), atol=1e-10)


def test_kitaev_intertwiners_are_in_the_kernel(maps):
    assert maps["R3"].residual(QUAD[2].dense(U, V)) < 1e-12
    assert maps["R4"].residual(QUAD[3].dense(U, V)) < 1e-12


def test_gram_consistency(maps, rng):
    lin = maps["R4"]
    g = lin.gram()
    assert np.allclose(g, g.conj().T, atol=1e-9)
    x = random_complex(rng, (16, 16)).ravel()
    assert np.isclose(np.sqrt((x.conj() @ g @ x).real), lin.residual(x.reshape(16, 16)), rtol=1e-8)


def test_apply_many_matches_apply(maps, rng):
    xs = random_complex(rng, (3, 16, 16))
    lin = maps["R3"]
    many = lin.apply_many(xs)
    assert many.shape == (512 * 512, 3)
    for k in range(3):
        assert np.allclose(many[:, k], lin.apply(xs[k]).ravel(), atol=1e-10)


def test_minimize_returns_unit_minimizer(maps, rng):
    lin = maps["R3"]
    x, sv = lin.minimize(random_complex(rng, (16, 16)))
    assert np.isclose(np.linalg.norm(x), 1.0)
    assert lin.residual(x) <= sv[0] + 1e-10
    assert sv[0] <= sv[1]
    # the kernel is at least as good as the Kitaev intertwiner
    kit = QUAD[2].dense(U, V)
    assert lin.residual(x) <= lin.residual(kit / np.linalg.norm(kit)) + 1e-10


def test_minimizer_beats_any_two_dimensional_subspace(maps, rng):
    lin = maps["R4"]
    x, _ = lin.minimize()
    best = lin.residual(x)
    for _ in range(3):
        q, _ = np.linalg.qr(random_complex(rng, (256, 2)))
        w = lin.apply_many(q.T.reshape(2, 16, 16))
        sub = np.linalg.svd(w, compute_uv=False)[-1]
        assert best <= sub + 1e-10
        # brute force over the unit circle of the subspace agrees with its SVD
        t, f = np.meshgrid(np.linspace(0, np.pi, 181), np.linspace(0, 2 * np.pi, 91))
        coeffs = np.stack([np.cos(t).ravel(), (np.exp(1j * f) * np.sin(t)).ravel()])
        g = w.conj().T @ w
        grid = np.sqrt(np.einsum("ik,ij,jk->k", coeffs.conj(), g, coeffs).real)
        assert sub <= grid.min() + 1e-10 and grid.min() <= sub * 1.01


def test_exact_start_converges_at_iteration_zero():
    one = identity_rmatrix()
    trace = als_search(one, one, config=AlsConfig(init="provided", init_pair=(np.eye(16), np.eye(16))))
    assert trace.converged and trace.iterations == 0 and trace.residuals == [0.0]


@pytest.mark.slow
def test_perturbed_kitaev_start_recovers_solution():
    pair = (QUAD[2].dense(U, V), QUAD[3].dense(U, V))
    config = AlsConfig(init="provided", init_pair=pair, init_noise=1e-2, seed=1, residual_tolerance=1e-10, max_iterations=50)
    trace = als_search(QUAD[0], QUAD[1], U, V, config)
    assert trace.converged and trace.final_residual < 1e-10 and trace.monotone
    assert full_residual(trace.R3, trace.R4) < 1e-9


def test_random_start_is_monotone_and_deterministic():
    config = AlsConfig(seed=4, max_iterations=3)
    a = als_search(QUAD[0], QUAD[1], U, V, config)
    b = als_search(QUAD[0], QUAD[1], U, V, config)
    assert a.residuals == b.residuals
    assert a.monotone
    assert all(y <= x + 1e-10 for x, y in zip(a.residuals, a.residuals[1:]))
    assert len(a.residuals) == 1 + 2 * a.iterations


def test_found_pair_satisfies_cubic_equations():
    trace = als_search(QUAD[0], QUAD[1], U, V, AlsConfig(seed=3))
    assert trace.converged
    assert full_residual(trace.R3, trace.R4) < 1e-7
    assert set(trace.condition_numbers) == {"R3", "R4"}


def test_trace_serializes():
    import json

    trace = als_search(QUAD[0], QUAD[1], U, V, AlsConfig(seed=0, max_iterations=1))
    obj = json.loads(json.dumps(trace.to_dict(include_pair=True)))
    assert obj["R3"]["shape"] == [16, 16] and obj["iterations"] == 1


@pytest.mark.parametrize(
    "kwargs",
    [
        {"max_iterations": 0},
        {"residual_tolerance": 0},
        {"stall_patience": 0},
        {"init": "zeros"},
        {"init": "provided"},
        {"init_noise": -1},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ArgumentError):
        AlsConfig(**kwargs)


def test_zero_initial_guess_rejected():
    config = AlsConfig(init="provided", init_pair=(np.zeros((16, 16)), np.eye(16)))
    with pytest.raises(ArgumentError):
        als_search(QUAD[0], QUAD[1], U, V, config)


def test_plain_convention_rejected():
    from cubiceq.rmatrix import to_R

    with pytest.raises(ArgumentError):
        linear_map_for("R3", QUAD[3], to_R(QUAD[0]), QUAD[1], U, V)
