from pathlib import Path

import numpy as np
import pytest

from thermnet import cli
from thermnet.network import GROUND, Branch, Node, ThermalNetwork

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fig3() -> ThermalNetwork:
    return cli.parse_network((FIXTURES / "fig3.net").read_text())


@pytest.fixture(scope="session")
def fig3_ca0() -> ThermalNetwork:
    return cli.parse_network((FIXTURES / "fig3_ca0.net").read_text())


def random_network(rng: np.random.Generator, max_nodes: int = 12,
                   ground_sources_only: bool = False) -> ThermalNetwork:
    """Random connected grounded network with building-scale parameters.

    Every node attaches to an earlier node or to ground, so the graph is
    connected and at least one ground branch exists.  Ground branches
    are oriented away from ground and always carry a temperature source.
    With ground_sources_only no internal branch carries one (the setting
    under which the DC gains of the temperature channels sum to one).
    """
    n = int(rng.integers(1, max_nodes + 1))
    caps = [0.0 if rng.random() < 0.4 else 10 ** rng.uniform(3, 7) for _ in range(n)]

    def conductance() -> float:
        return 10 ** rng.uniform(-1, 2.5)

    branches = []
    for i in range(n):
        j = int(rng.integers(-1, i))  # -1 attaches to ground
        k = len(branches)
        if j < 0:
            branches.append(Branch(f"b{k}", GROUND, f"n{i}", conductance(), f"T{k}"))
        else:
            src = f"T{k}" if (not ground_sources_only and rng.random() < 0.3) else None
            branches.append(Branch(f"b{k}", f"n{j}", f"n{i}", conductance(), src))
    for _ in range(int(rng.integers(0, n))):
        i, j = rng.integers(0, n, 2)
        if i != j:
            branches.append(Branch(f"b{len(branches)}", f"n{i}", f"n{j}", conductance(), None))

    nodes = []
    flow_count = 0
    for i in range(n):
        flows = []
        if rng.random() < 0.4:
            flows.append(f"F{flow_count}")
            flow_count += 1
        if rng.random() < 0.1:
            flows.append(f"F{flow_count}")
            flow_count += 1
        nodes.append(Node(f"n{i}", caps[i], tuple(flows)))

    output = f"n{int(rng.integers(0, n))}"
    return ThermalNetwork(tuple(nodes), tuple(branches), output)
