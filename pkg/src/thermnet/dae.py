"""Differential-algebraic assembly: C·dtheta/dt = K·theta + K_b·b + f.

K = -A'GA couples the node temperatures through the branch conductances
and K_b = A'G maps branch temperature sources onto nodes.  Rows of the
system whose capacity is exactly zero are algebraic constraints; the
partition by capacity is what the state-space reduction consumes.
"""

from dataclasses import dataclass

import numpy as np

from . import network as netmod
from .errors import SingularSystemError
from .network import ThermalNetwork

# a matrix counts as singular when smallest/largest singular value drops below this
SINGULAR_RTOL = 1e-10


@dataclass(frozen=True)
class DaeSystem:
    """Capacity diagonal, stiffness matrix, source map, and channel labels.

    ``capacity`` holds the diagonal of C as a 1-D array.  Input channels
    come in two families: one slot per branch (temperature sources, the
    b vector) and one slot per node (flow sources, the f vector), both
    in declaration order.
    """

    capacity: np.ndarray
    stiffness: np.ndarray
    source_map: np.ndarray
    node_names: tuple[str, ...]
    branch_names: tuple[str, ...]
    branch_sources: tuple[str | None, ...]
    node_sources: tuple[tuple[str, ...], ...]

    @property
    def n(self) -> int:
        return len(self.capacity)

    @property
    def m(self) -> int:
        return self.source_map.shape[1]

    def source_values(self, values: dict[str, float]) -> tuple[np.ndarray, np.ndarray]:
        """Scatter named source values into full (b, f) vectors."""
        b = np.zeros(self.m)
        for k, name in enumerate(self.branch_sources):
            if name is not None:
                b[k] = values.get(name, 0.0)
        f = np.zeros(self.n)
        for l, names in enumerate(self.node_sources):
            f[l] = sum(values.get(name, 0.0) for name in names)
        return b, f


def assemble_dae(network: ThermalNetwork) -> DaeSystem:
    """Build the DAE operators from the incidence and parameter matrices."""
    netmod.require_valid(network)
    a = netmod.build_incidence(network).entries
    params = netmod.build_parameter_matrices(network)
    g = params.conductance
    return DaeSystem(
        capacity=np.diag(params.capacity).copy() if network.nodes else np.zeros(0),
        stiffness=-a.T @ g @ a,
        source_map=a.T @ g,
        node_names=network.node_names,
        branch_names=network.branch_names,
        branch_sources=params.branch_sources,
        node_sources=params.node_sources,
    )


@dataclass(frozen=True)
class Partition:
    """Capacity-based block split of a DAE system.

    Index arrays keep the original node order within each group, so the
    extracted blocks match a stable permutation of K and K_b.
    """

    dae: DaeSystem
    zero_idx: np.ndarray
    cap_idx: np.ndarray
    k11: np.ndarray
    k12: np.ndarray
    k21: np.ndarray
    k22: np.ndarray
    kb1: np.ndarray
    kb2: np.ndarray
    c_cap: np.ndarray

    @property
    def zero_names(self) -> tuple[str, ...]:
        return tuple(self.dae.node_names[i] for i in self.zero_idx)

    @property
    def cap_names(self) -> tuple[str, ...]:
        return tuple(self.dae.node_names[i] for i in self.cap_idx)


def partition(dae: DaeSystem) -> Partition:
    """Split K, K_b, and C into zero-capacity and capacitive blocks.

    A node is algebraic iff its declared capacity is exactly zero (no
    epsilon thresholding: capacities are user input, not computed).
    Either group may be empty.
    """
    zero = np.flatnonzero(dae.capacity == 0.0)
    cap = np.flatnonzero(dae.capacity != 0.0)
    k = dae.stiffness
    kb = dae.source_map
    return Partition(
        dae=dae,
        zero_idx=zero,
        cap_idx=cap,
        k11=k[np.ix_(zero, zero)],
        k12=k[np.ix_(zero, cap)],
        k21=k[np.ix_(cap, zero)],
        k22=k[np.ix_(cap, cap)],
        kb1=kb[zero, :],
        kb2=kb[cap, :],
        c_cap=dae.capacity[cap],
    )


def is_singular(matrix: np.ndarray, rtol: float = SINGULAR_RTOL) -> bool:
    if matrix.size == 0:
        return False
    s = np.linalg.svd(matrix, compute_uv=False)
    return s[0] == 0.0 or s[-1] < rtol * s[0]


def steady_state(dae: DaeSystem, b: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Equilibrium temperatures: solve 0 = K·theta + K_b·b + f.

    Serves as the independent oracle for DC gains and long-horizon
    simulations.  Raises SingularSystemError when K has no inverse
    within tolerance (no resistive path to ground).
    """
    k = dae.stiffness
    if is_singular(k):
        raise SingularSystemError("stiffness matrix is singular: no path to ground")
    return np.linalg.solve(k, -(dae.source_map @ b + f))
