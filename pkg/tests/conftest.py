import numpy as np
import pytest

from cubiceq import kernels
from cubiceq.tensor_core import Node, WiringDiagram

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


KERNEL_IMPLS = [pytest.param(kernels.fallback, id="python")]
if kernels.compiled is not None:
    KERNEL_IMPLS.insert(0, pytest.param(kernels.compiled, id="compiled"))


@pytest.fixture(params=KERNEL_IMPLS)
def kernel_impl(request):
    return request.param


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_inplace_diagram(rng, n_sites=None, n_nodes=None, d=2):
    """Random diagram of k-site gates acting in place on ``n_sites`` wires."""
    n_sites = n_sites or int(rng.integers(3, 6))
    n_nodes = n_nodes or int(rng.integers(1, 5))
    wire = [f"a{j}" for j in range(n_sites)]
    last = {}
    gates = []
    for k in range(n_nodes):
        size = int(rng.integers(1, min(3, n_sites) + 1))
        sites = [int(s) for s in rng.choice(n_sites, size=size, replace=False)]
        gates.append(sites)
        for s in sites:
            last[s] = k
    nodes = []
    for k, sites in enumerate(gates):
        ins = tuple(wire[s] for s in sites)
        outs = tuple(f"g{s}" if last[s] == k else f"x{k}_{s}" for s in sites)
        tensor = random_complex(rng, (d ** len(sites), d ** len(sites)))
        nodes.append(Node.from_matrix(tensor, ins, outs, f"N{k}"))
        for s, o in zip(sites, outs):
            wire[s] = o
    deltas = tuple((f"a{s}", f"g{s}") for s in range(n_sites) if s not in last)
    return WiringDiagram(
        tuple(nodes),
        tuple(f"a{s}" for s in range(n_sites)),
        tuple(f"g{s}" for s in range(n_sites)),
        deltas,
        dims={lab: d for pair in deltas for lab in pair},
    )
