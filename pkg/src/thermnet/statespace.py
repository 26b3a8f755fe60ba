"""State-space reduction: eliminate zero-capacity nodes via the K11 Schur complement.

The reduced model is

    dtheta_C/dt = A_S·theta_C + B_S·u,      y = C_S·theta_C + D_S·u

with the input vector u stacking branch temperature channels first,
then the flow channels of the zero-capacity nodes, then the flow
channels of the capacitive nodes.  When the output node is capacitive,
C_S selects its state and D_S is zero; when it is algebraic, both rows
come from the recovery relation for the eliminated temperatures.
"""

from dataclasses import dataclass

import numpy as np

from .dae import Partition, is_singular
from .errors import DegenerateNetworkError, UnknownOutputNodeError


@dataclass(frozen=True)
class StateSpace:
    """Reduced model matrices with state/input/output labeling.

    ``input_names[j]`` lists the declared source names feeding slot j
    (empty for a slot with no source); ``input_labels[j]`` is the
    display label ``names@element``.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    state_names: tuple[str, ...]
    input_labels: tuple[str, ...]
    input_names: tuple[tuple[str, ...], ...]
    output_name: str

    @property
    def n_states(self) -> int:
        return self.a.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.b.shape[1] if self.n_states else self.d.shape[0]

    def find_channel(self, source_name: str) -> int:
        """Index of the input slot fed by a given source name."""
        hits = [j for j, names in enumerate(self.input_names) if source_name in names]
        if not hits:
            raise KeyError(f"no input channel carries source {source_name!r}")
        return hits[0]


@dataclass(frozen=True)
class CompactInputMap:
    """Strictly increasing full-space indices of the channels kept by compaction."""

    kept: tuple[int, ...]
    labels: tuple[str, ...]


def _slot_label(names: tuple[str, ...], element: str) -> str:
    return f"{'+'.join(names) if names else '0'}@{element}"


def _input_slots(part: Partition) -> tuple[tuple[str, ...], tuple[tuple[str, ...], ...]]:
    dae = part.dae
    labels: list[str] = []
    names: list[tuple[str, ...]] = []
    for k, src in enumerate(dae.branch_sources):
        tup = (src,) if src is not None else ()
        names.append(tup)
        labels.append(_slot_label(tup, dae.branch_names[k]))
    for idx in (*part.zero_idx, *part.cap_idx):
        tup = tuple(dae.node_sources[idx])
        names.append(tup)
        labels.append(_slot_label(tup, dae.node_names[idx]))
    return tuple(labels), tuple(names)


def _eliminate(part: Partition) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schur pieces: returns (X, A_S, B_S) with X = K11^-1.

    K11 of a connected grounded network is negative definite, so a
    singular K11 means a zero-capacity cluster with no resistive path
    out, which is a modeling error rather than a numerical edge case.
    """
    if is_singular(part.k11):
        raise DegenerateNetworkError(
            "zero-capacity block is singular: nodes "
            f"{part.zero_names} have no resistive path out"
        )
    n0 = len(part.zero_idx)
    nc = len(part.cap_idx)
    x = np.linalg.solve(part.k11, np.eye(n0)) if n0 else np.zeros((0, 0))
    cc = part.c_cap[:, None]
    a_s = (part.k22 - part.k21 @ x @ part.k12) / cc if nc else np.zeros((0, 0))
    b_s = (
        np.hstack([part.kb2 - part.k21 @ x @ part.kb1, -part.k21 @ x, np.eye(nc)]) / cc
        if nc
        else np.zeros((0, part.dae.m + n0))
    )
    return x, a_s, b_s


def reduce(part: Partition, output_node: str) -> StateSpace:
    """Reduce a partitioned DAE to state-space form for one output node."""
    dae = part.dae
    if output_node not in dae.node_names:
        raise UnknownOutputNodeError(f"output node {output_node!r} is not in the network")
    x, a_s, b_s = _eliminate(part)
    labels, names = _input_slots(part)
    n0 = len(part.zero_idx)
    nc = len(part.cap_idx)
    n_inputs = dae.m + dae.n
    out = dae.node_names.index(output_node)
    if out in part.cap_idx:
        c = np.zeros(nc)
        c[list(part.cap_idx).index(out)] = 1.0
        d = np.zeros(n_inputs)
    else:
        r = list(part.zero_idx).index(out)
        c = (-x @ part.k12)[r, :] if nc else np.zeros(0)
        d = np.hstack([(-x @ part.kb1)[r, :], -x[r, :], np.zeros(nc)])
    return StateSpace(
        a=a_s,
        b=b_s,
        c=c,
        d=d,
        state_names=part.cap_names,
        input_labels=labels,
        input_names=names,
        output_name=output_node,
    )


def compact_inputs(ss: StateSpace) -> tuple[StateSpace, CompactInputMap]:
    """Drop every input channel that carries no declared source.

    Unsourced channels are identically zero, so removing their columns
    changes nothing; the map records the kept full-space indices.
    """
    kept = tuple(j for j, names in enumerate(ss.input_names) if names)
    idx = list(kept)
    compacted = StateSpace(
        a=ss.a,
        b=ss.b[:, idx],
        c=ss.c,
        d=ss.d[idx],
        state_names=ss.state_names,
        input_labels=tuple(ss.input_labels[j] for j in kept),
        input_names=tuple(ss.input_names[j] for j in kept),
        output_name=ss.output_name,
    )
    return compacted, CompactInputMap(kept, compacted.input_labels)


def recover_algebraic(part: Partition, theta_cap: np.ndarray, b: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Temperatures of the eliminated nodes for given states and inputs.

    Solves the algebraic block row:
    theta_0 = -K11^-1 (K12·theta_C + K_b1·b + f_0).
    """
    if len(part.zero_idx) == 0:
        return np.zeros(0)
    x, _, _ = _eliminate(part)
    f0 = np.asarray(f)[part.zero_idx]
    rhs = part.kb1 @ b + f0
    if len(part.cap_idx):
        rhs = rhs + part.k12 @ theta_cap
    return -x @ rhs
