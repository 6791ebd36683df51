import numpy as np
import pytest

from compressed_pd.harness.config import ExperimentConfig
from compressed_pd.harness.data import build_problem
from compressed_pd.objectives import LogisticNonconvex
from compressed_pd.topology import random_geometric_graph


@pytest.fixture(scope="session")
def benchmark():
    """Full-size logistic problem of the default configuration, seed 0."""
    return build_problem(ExperimentConfig(seed=0))


@pytest.fixture
def small_problem():
    """Six agents, dimension 5: quick to run, still nontrivial."""
    rng = np.random.default_rng(11)
    topo = random_geometric_graph(6, 0.7, rng)
    topo = topo.scaled(0.012 / topo.rho)
    Z = rng.standard_normal((6, 40, 5))
    Y = (rng.random((6, 40)) < 0.5).astype(float)
    obj = LogisticNonconvex(list(Z), list(Y))
    x0 = 0.1 * rng.standard_normal((6, 5))
    return topo, obj, x0


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one verdict line per acceptance criterion for the final summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def report(number, passed, detail):
        lines.append((number, f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"))
        return passed

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
