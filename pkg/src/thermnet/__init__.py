"""thermnet: thermal RC networks as DAE, state-space, and transfer-matrix models.

Build a network of temperature nodes and resistive branches, reduce it
to state space by eliminating the zero-capacity nodes, derive its exact
rational transfer matrix, classify the causality of the direct and the
inverted (load-calculation) relations, and demonstrate in the time
domain why the inverted heat balance diverges as the step shrinks.
"""

from .dae import DaeSystem, Partition, assemble_dae, partition, steady_state
from .errors import (
    DegenerateNetworkError,
    DimensionTooLargeError,
    InsufficientOrderError,
    InvalidNetworkError,
    NetworkParseError,
    PoleAtZeroError,
    PoleEvaluationError,
    ScheduleError,
    SingularSystemError,
    ThermalModelError,
    UnknownOutputNodeError,
    UnstableStepError,
    ZeroHvacPathError,
)
from .network import (
    GROUND,
    Branch,
    IncidenceMatrix,
    Node,
    ThermalNetwork,
    ValidationReport,
    build_incidence,
    build_parameter_matrices,
    validate,
)
from .simulate import (
    InputSchedule,
    SweepResult,
    Trajectory,
    replay_schedule,
    simulate_direct,
    simulate_inverse_load,
    timestep_sweep,
)
from .statespace import CompactInputMap, StateSpace, compact_inputs, recover_algebraic, reduce
from .transfer import (
    LoadTransferSet,
    Polynomial,
    Properness,
    PropernessClass,
    RationalFunction,
    TransferMatrix,
    classify,
    dc_gain,
    evaluate,
    frequency_response,
    load_transfer_set,
    regularize,
    resolvent,
    transfer_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "GROUND",
    "Branch",
    "CompactInputMap",
    "DaeSystem",
    "IncidenceMatrix",
    "InputSchedule",
    "LoadTransferSet",
    "Node",
    "Partition",
    "Polynomial",
    "Properness",
    "PropernessClass",
    "RationalFunction",
    "StateSpace",
    "SweepResult",
    "ThermalNetwork",
    "Trajectory",
    "TransferMatrix",
    "ValidationReport",
    "assemble_dae",
    "build_incidence",
    "build_parameter_matrices",
    "classify",
    "compact_inputs",
    "dc_gain",
    "evaluate",
    "frequency_response",
    "load_transfer_set",
    "partition",
    "recover_algebraic",
    "reduce",
    "regularize",
    "replay_schedule",
    "resolvent",
    "simulate_direct",
    "simulate_inverse_load",
    "steady_state",
    "timestep_sweep",
    "transfer_matrix",
    "validate",
    # errors
    "ThermalModelError",
    "InvalidNetworkError",
    "SingularSystemError",
    "DegenerateNetworkError",
    "UnknownOutputNodeError",
    "DimensionTooLargeError",
    "PoleEvaluationError",
    "PoleAtZeroError",
    "ZeroHvacPathError",
    "InsufficientOrderError",
    "UnstableStepError",
    "ScheduleError",
    "NetworkParseError",
]
