"""Shared fixtures: the bundled six-node scenario and its solved states.

Session-scoped so the reference scenario is solved once per test run.
"""

import numpy as np
import pytest

from queuenet import fixtures
from queuenet.solver import SolverOptions, solve

# (criterion id, label, passed, detail) tuples collected by the acceptance
# tests and echoed one per line at the end of the run
ACCEPTANCE_RESULTS: list[tuple[str, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for cid, label, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"criterion {cid}: {status} - {label}{suffix}")


@pytest.fixture(scope="session")
def six_node():
    return fixtures.six_node_path_set()


@pytest.fixture(scope="session")
def base_solution(six_node):
    """Queue-dependent solve of the six-node scenario (default options)."""
    return solve(six_node)


@pytest.fixture(scope="session")
def base_state(base_solution):
    return base_solution[0]


@pytest.fixture(scope="session")
def fixed_capacity_solution(six_node):
    return solve(six_node, options=SolverOptions(variant="fixed_capacity_queue"))


@pytest.fixture(scope="session")
def traditional_solution(six_node):
    return solve(six_node, options=SolverOptions(variant="traditional_ue"))


@pytest.fixture(scope="session")
def scenario_dir(tmp_path_factory):
    """Six-node scenario written as CSV + config files for CLI tests."""
    d = tmp_path_factory.mktemp("scenario")
    fixtures.write_six_node_scenario(d)
    return d


def feasible_random_state(path_set, rng):
    """Random feasible (path flows, queue allocation) for gradient probes."""
    f = np.zeros(path_set.n_paths)
    for i, group in enumerate(path_set.od_groups):
        if len(group) == 0:
            continue
        f[group] = rng.dirichlet(np.ones(len(group))) * path_set.network.od_pairs[i].demand
    queue_alloc = np.zeros((path_set.n_links, path_set.n_paths))
    for j, idx in enumerate(path_set.path_link_idx):
        # hold back at most 40% of the path's flow, split across its links
        total = 0.4 * f[j] * rng.uniform(0.0, 1.0)
        if len(idx) and total > 0:
            share = rng.dirichlet(np.ones(len(idx)))
            queue_alloc[idx, j] = total * share
    return f, queue_alloc
