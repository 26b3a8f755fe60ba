"""Thermal-network data model: nodes, branches, incidence and parameter matrices.

A network is a graph of temperature nodes joined by resistive branches.
Heat capacities and flow sources sit on nodes; conductances and optional
temperature sources sit on branches.  The reserved endpoint name
``ground`` is the temperature reference: a branch may touch it on at
most one side and must then carry a temperature source.

Branch direction is declared by the user (``from_node -> to_node``) and
fixes the sign convention: the incidence matrix gets +1 at the `to`
node and -1 at the `from` node, and the temperature drop over branch k
is ``e_k = theta_from + b_k - theta_to``.  Reversing a branch therefore
flips the sign of its drop, its flow, and its source value, but leaves
every assembled operator product unchanged.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidNetworkError

GROUND = "ground"


@dataclass(frozen=True)
class Node:
    """A temperature node: heat capacity [J/K] plus named flow-source slots [W]."""

    name: str
    capacity: float = 0.0
    flow_sources: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "flow_sources", tuple(self.flow_sources))


@dataclass(frozen=True)
class Branch:
    """A resistive branch with conductance [W/K] and optional temperature source.

    Either endpoint may be the reserved name ``ground``; the source value
    is oriented along the declared flow direction (from -> to).
    """

    name: str
    from_node: str
    to_node: str
    conductance: float
    temp_source: str | None = None


@dataclass(frozen=True)
class ThermalNetwork:
    """Ordered nodes and branches plus the designated output node.

    Declaration order fixes every index space: node order is the column
    order of the incidence matrix and the temperature vector, branch
    order is its row order, and source declaration order fixes input
    channel order.
    """

    nodes: tuple[Node, ...]
    branches: tuple[Branch, ...]
    output_node: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "branches", tuple(self.branches))

    @property
    def node_names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes)

    @property
    def branch_names(self) -> tuple[str, ...]:
        return tuple(b.name for b in self.branches)

    def node_index(self, name: str) -> int:
        return self.node_names.index(name)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    @property
    def flow_source_names(self) -> tuple[str, ...]:
        return tuple(s for n in self.nodes for s in n.flow_sources)

    @property
    def temp_source_names(self) -> tuple[str, ...]:
        """Distinct temperature-source names in first-use (branch) order."""
        seen = []
        for b in self.branches:
            if b.temp_source is not None and b.temp_source not in seen:
                seen.append(b.temp_source)
        return tuple(seen)


@dataclass(frozen=True)
class ValidationReport:
    """Every violated invariant, one message per violation, naming the element."""

    problems: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.problems

    def __str__(self) -> str:
        return "\n".join(self.problems) if self.problems else "ok"


def validate(network: ThermalNetwork) -> ValidationReport:
    """Check every structural invariant of a network.

    Returns an empty report for a well-formed network; otherwise one
    entry per violation.  Downstream assembly refuses networks whose
    report is non-empty.
    """
    problems: list[str] = []
    node_names = [n.name for n in network.nodes]
    name_set = set(node_names)

    if not network.nodes:
        problems.append("network has no nodes")
    seen: set[str] = set()
    for n in network.nodes:
        if n.name == GROUND:
            problems.append(f"node {n.name!r}: name is reserved for the reference")
        if n.name in seen:
            problems.append(f"node {n.name!r}: duplicate name")
        seen.add(n.name)
        if not (math.isfinite(n.capacity) and n.capacity >= 0):
            problems.append(f"node {n.name!r}: capacity must be finite and >= 0")

    source_names: set[str] = set()
    for n in network.nodes:
        for s in n.flow_sources:
            if s in source_names:
                problems.append(f"flow source {s!r} on node {n.name!r}: duplicate source name")
            source_names.add(s)
            if s in name_set:
                problems.append(f"flow source {s!r}: collides with a node name")

    seen = set()
    ground_touched = False
    for b in network.branches:
        if b.name in seen:
            problems.append(f"branch {b.name!r}: duplicate name")
        seen.add(b.name)
        if not (math.isfinite(b.conductance) and b.conductance > 0):
            problems.append(f"branch {b.name!r}: conductance must be finite and > 0")
        for end in (b.from_node, b.to_node):
            if end != GROUND and end not in name_set:
                problems.append(f"branch {b.name!r}: endpoint {end!r} is not a declared node")
        if b.from_node == b.to_node:
            problems.append(f"branch {b.name!r}: endpoints must differ")
        if GROUND in (b.from_node, b.to_node):
            ground_touched = True
            if b.temp_source is None:
                problems.append(
                    f"branch {b.name!r}: a ground branch needs a temperature source"
                )
        if b.temp_source is not None and b.temp_source in name_set:
            problems.append(f"temperature source {b.temp_source!r}: collides with a node name")
        if b.temp_source is not None and b.temp_source in network.flow_source_names:
            problems.append(
                f"temperature source {b.temp_source!r}: collides with a flow-source name"
            )

    if not ground_touched:
        problems.append("no branch touches ground: the network has no temperature reference")

    if network.output_node not in name_set:
        problems.append(f"output node {network.output_node!r} is not a declared node")

    # connectivity of the resistive graph, ground included as a vertex
    if network.nodes:
        adjacency: dict[str, set[str]] = {name: set() for name in node_names}
        adjacency[GROUND] = set()
        for b in network.branches:
            if b.from_node in adjacency and b.to_node in adjacency:
                adjacency[b.from_node].add(b.to_node)
                adjacency[b.to_node].add(b.from_node)
        stack = [node_names[0]]
        reached = {node_names[0]}
        while stack:
            for other in adjacency[stack.pop()]:
                if other not in reached:
                    reached.add(other)
                    stack.append(other)
        unreached = [n for n in node_names if n not in reached]
        if unreached:
            problems.append(
                "network is not connected; unreachable from "
                f"{node_names[0]!r}: {', '.join(repr(n) for n in unreached)}"
            )

    return ValidationReport(tuple(problems))


def require_valid(network: ThermalNetwork) -> None:
    report = validate(network)
    if not report.ok:
        raise InvalidNetworkError(str(report))


@dataclass(frozen=True)
class IncidenceMatrix:
    """Branch-by-node signed incidence matrix with its row/column labels."""

    entries: np.ndarray
    branch_names: tuple[str, ...]
    node_names: tuple[str, ...]


def build_incidence(network: ThermalNetwork) -> IncidenceMatrix:
    """Assemble the m-by-n incidence matrix.

    Row k gets +1 in the column of the branch's `to` node and -1 in the
    column of its `from` node; a ground endpoint contributes no column.
    """
    require_valid(network)
    index = {n.name: j for j, n in enumerate(network.nodes)}
    a = np.zeros((network.n_branches, network.n_nodes))
    for k, b in enumerate(network.branches):
        if b.to_node != GROUND:
            a[k, index[b.to_node]] = 1.0
        if b.from_node != GROUND:
            a[k, index[b.from_node]] = -1.0
    return IncidenceMatrix(a, network.branch_names, network.node_names)


@dataclass(frozen=True)
class ParameterMatrices:
    """Diagonal conductance/capacity matrices plus the source-slot templates.

    ``branch_sources[k]`` is the temperature-source name on branch row k
    (None when the branch has no source); ``node_sources[l]`` is the
    tuple of flow-source names attached to node row l.  Scattering a
    name->value mapping produces the full b and f vectors, with the same
    value fanned out to every slot sharing a name and co-resident flow
    sources summed into their node row.
    """

    conductance: np.ndarray
    capacity: np.ndarray
    branch_sources: tuple[str | None, ...]
    node_sources: tuple[tuple[str, ...], ...]

    def scatter_branch(self, values: dict[str, float]) -> np.ndarray:
        b = np.zeros(len(self.branch_sources))
        for k, name in enumerate(self.branch_sources):
            if name is not None:
                b[k] = values.get(name, 0.0)
        return b

    def scatter_node(self, values: dict[str, float]) -> np.ndarray:
        f = np.zeros(len(self.node_sources))
        for l, names in enumerate(self.node_sources):
            f[l] = sum(values.get(name, 0.0) for name in names)
        return f


def build_parameter_matrices(network: ThermalNetwork) -> ParameterMatrices:
    """Diagonal G (branch conductances) and C (node capacities) plus templates."""
    require_valid(network)
    g = np.diag([b.conductance for b in network.branches]) if network.branches else np.zeros((0, 0))
    c = np.diag([n.capacity for n in network.nodes])
    return ParameterMatrices(
        conductance=g,
        capacity=c,
        branch_sources=tuple(b.temp_source for b in network.branches),
        node_sources=tuple(n.flow_sources for n in network.nodes),
    )
