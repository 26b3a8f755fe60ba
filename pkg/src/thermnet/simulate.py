"""Time-domain engines: direct temperature simulation and inverse load calculation.

All integrators share one input convention: schedule values are
zero-order held, and the value in force over a step [t_k, t_k + dt) is
the held value at t_k.  Backward Euler is implicit in the state only.
This keeps the three methods consistent with each other and makes the
discrete inverse problem reproduce the algebraic (capacity-free) load
exactly, independent of the step size.

The inverse engine turns the output node into a boundary: its column of
the stiffness matrix becomes an extra input channel carrying the
prescribed temperature (exactly equivalent to folding that temperature
into the sources of every incident branch), the remaining network is
reduced and integrated, and the load at each sample is the backward
difference of the stored heat minus the resistive inflow and the known
flow sources:

    load[k] = C_out·(T[k] - T[k-1])/dt - inflow[k] - f_known[k]

The first sample uses T[-1] = T[0], so a step "at t = 0" means the
prescribed value changes between samples 0 and 1.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import dae as daemod
from . import network as netmod
from . import statespace as ssmod
from .errors import ScheduleError, UnstableStepError
from .network import GROUND, ThermalNetwork

METHODS = ("backward-euler", "forward-euler", "exact-hold")

AIR_CAPACITY_MODES = ("declared", "zero")


@dataclass(frozen=True)
class InputSchedule:
    """Piecewise-constant named input channels on a strictly increasing grid."""

    times: np.ndarray
    values: dict[str, np.ndarray]

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        if t.ndim != 1 or len(t) == 0:
            raise ScheduleError("schedule needs at least one time row")
        if np.any(np.diff(t) <= 0):
            raise ScheduleError("schedule times must be strictly increasing")
        vals = {}
        for name, series in self.values.items():
            arr = np.asarray(series, dtype=float)
            if arr.shape != t.shape:
                raise ScheduleError(
                    f"channel {name!r} has {arr.size} values for {t.size} time rows"
                )
            vals[name] = arr
        object.__setattr__(self, "values", vals)

    @property
    def channels(self) -> tuple[str, ...]:
        return tuple(self.values)

    @classmethod
    def constant(cls, t0: float, values: dict[str, float]) -> "InputSchedule":
        return cls(np.array([t0]), {k: np.array([v]) for k, v in values.items()})

    def sample(self, name: str, grid: np.ndarray) -> np.ndarray:
        """Zero-order-hold values of one channel on an arbitrary grid.

        Times before the first row clamp to the first value; a channel
        the schedule does not carry is identically zero.
        """
        if name not in self.values:
            return np.zeros(len(grid))
        idx = np.searchsorted(self.times, np.asarray(grid) * (1 + 1e-15), side="right") - 1
        return self.values[name][np.clip(idx, 0, len(self.times) - 1)]


@dataclass(frozen=True)
class Trajectory:
    """Sampled node temperatures, branch flows, and (inverse mode) the load series."""

    times: np.ndarray
    node_names: tuple[str, ...]
    branch_names: tuple[str, ...]
    temperatures: np.ndarray
    flows: np.ndarray
    output_node: str
    load: np.ndarray | None = None

    def temperature(self, node: str) -> np.ndarray:
        return self.temperatures[:, self.node_names.index(node)]

    def flow(self, branch: str) -> np.ndarray:
        return self.flows[:, self.branch_names.index(branch)]


@dataclass(frozen=True)
class SweepPoint:
    dt: float
    peak_load: float
    t_peak: float


@dataclass(frozen=True)
class SweepResult:
    """Peak loads down a strictly decreasing time-step ladder.

    ``ratios[i]`` is peak(dt[i+1]) / peak(dt[i]), i.e. the growth factor
    gained by refining the step.
    """

    points: tuple[SweepPoint, ...]
    ratios: tuple[float, ...]


def _pade6_expm(m: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a degree-6 Pade approximant."""
    n = m.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    norm = np.abs(m).sum(axis=1).max()
    squarings = max(0, int(math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0)
    a = m / 2.0**squarings
    c = [1.0, 1 / 2, 5 / 44, 1 / 66, 1 / 792, 1 / 15840, 1 / 665280]
    eye = np.eye(n)
    power = eye
    num = c[0] * eye
    den = c[0] * eye
    for k in range(1, 7):
        power = power @ a
        num = num + c[k] * power
        den = den + c[k] * (-1) ** k * power
    f = np.linalg.solve(den, num)
    for _ in range(squarings):
        f = f @ f
    return f


def _grid(t0: float, t_end: float, dt: float) -> np.ndarray:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end <= t0:
        raise ScheduleError("simulation horizon is empty; extend the schedule or pass t_end")
    n_steps = max(1, int(math.ceil((t_end - t0) / dt - 1e-9)))
    return t0 + dt * np.arange(n_steps + 1)


def _check_channels(network: ThermalNetwork, schedule: InputSchedule, allow_output: bool):
    known = set(network.flow_source_names) | set(network.temp_source_names)
    if allow_output:
        known.add(network.output_node)
    for name in schedule.channels:
        if name not in known:
            raise ScheduleError(f"schedule channel {name!r} matches no declared source")


def _initial_uniform(network: ThermalNetwork, schedule: InputSchedule, t0: float) -> float:
    """Default start: uniform at the first temperature-source value (equilibrium)."""
    for b in network.branches:
        if b.temp_source is not None:
            return float(schedule.sample(b.temp_source, np.array([t0]))[0])
    return 0.0


def _initial_state(initial, n_states: int, uniform_value: float) -> np.ndarray:
    if initial is None:
        return np.full(n_states, uniform_value)
    arr = np.atleast_1d(np.asarray(initial, dtype=float))
    if arr.size == 1:
        return np.full(n_states, arr[0])
    if arr.size != n_states:
        raise ValueError(f"initial state needs {n_states} values, got {arr.size}")
    return arr.copy()


def _integrate(a: np.ndarray, b: np.ndarray, u: np.ndarray, x0: np.ndarray,
               dt: float, method: str) -> np.ndarray:
    """March dx/dt = a·x + b·u with held inputs; returns states, shape (n_samples, n)."""
    n = a.shape[0]
    n_samples = u.shape[1]
    states = np.empty((n_samples, n))
    states[0] = x0
    if n == 0:
        return states
    drive = dt * (b @ u)  # (n, n_samples), held value per step start
    if method == "backward-euler":
        m_inv = np.linalg.inv(np.eye(n) - dt * a)
        x = x0
        for k in range(1, n_samples):
            x = m_inv @ (x + drive[:, k - 1])
            states[k] = x
    elif method == "forward-euler":
        lam = np.linalg.eigvals(a)
        bound = 2.0 / np.abs(lam).max()
        if dt > bound:
            raise UnstableStepError(
                f"forward Euler unstable at dt = {dt:g} s; use dt <= {bound:.6g} s"
            )
        m = np.eye(n) + dt * a
        x = x0
        for k in range(1, n_samples):
            x = m @ x + drive[:, k - 1]
            states[k] = x
    elif method == "exact-hold":
        aug = np.zeros((n + b.shape[1], n + b.shape[1]))
        aug[:n, :n] = a * dt
        aug[:n, n:] = b * dt
        phi = _pade6_expm(aug)
        ad = phi[:n, :n]
        bd = phi[:n, n:]
        x = x0
        for k in range(1, n_samples):
            x = ad @ x + bd @ u[:, k - 1]
            states[k] = x
    else:
        raise ValueError(f"unknown method {method!r}; pick one of {METHODS}")
    return states


def _branch_flows(network: ThermalNetwork, temps: np.ndarray, b_samples: np.ndarray) -> np.ndarray:
    """q = G·(-A·theta + b) for every sample; shapes (N, n) and (m, N) -> (N, m)."""
    a = netmod.build_incidence(network).entries
    g = np.array([br.conductance for br in network.branches])
    drops = b_samples.T - temps @ a.T
    return drops * g


def simulate_direct(network: ThermalNetwork, schedule: InputSchedule, dt: float,
                    method: str = "backward-euler", t_end: float | None = None,
                    initial_state=None) -> Trajectory:
    """Advance the reduced model and report all temperatures and branch flows.

    Parameters
    ----------
    network : ThermalNetwork
        Validated network; its output node only labels the trajectory.
    schedule : InputSchedule
        Named source values, zero-order held.  Channels must match
        declared sources; missing sources are zero.
    dt : float
        Step size in seconds.
    method : str
        'backward-euler' (default, unconditionally stable),
        'forward-euler' (refused beyond its stability bound), or
        'exact-hold' (matrix-exponential stepping).
    t_end : float, optional
        Horizon end; defaults to the last schedule row.
    initial_state : float or array, optional
        Uniform value or per-capacitive-node values; defaults to the
        first temperature-source value at the start of the horizon.
    """
    netmod.require_valid(network)
    _check_channels(network, schedule, allow_output=False)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; pick one of {METHODS}")
    system = daemod.assemble_dae(network)
    part = daemod.partition(system)
    x, a_s, b_s = ssmod._eliminate(part)

    t0 = float(schedule.times[0])
    grid = _grid(t0, float(t_end) if t_end is not None else float(schedule.times[-1]), dt)
    n_samples = len(grid)

    b_samples = np.zeros((system.m, n_samples))
    for k, name in enumerate(system.branch_sources):
        if name is not None:
            b_samples[k] = schedule.sample(name, grid)
    f_samples = np.zeros((system.n, n_samples))
    for l, names in enumerate(system.node_sources):
        for name in names:
            f_samples[l] += schedule.sample(name, grid)

    n0 = len(part.zero_idx)
    u = np.vstack([b_samples, f_samples[part.zero_idx], f_samples[part.cap_idx]])
    x0 = _initial_state(initial_state, len(part.cap_idx),
                        _initial_uniform(network, schedule, t0))
    theta_cap = _integrate(a_s, b_s, u, x0, dt, method)

    temps = np.empty((n_samples, system.n))
    temps[:, part.cap_idx] = theta_cap
    if n0:
        rhs = part.kb1 @ b_samples + f_samples[part.zero_idx]
        if len(part.cap_idx):
            rhs = rhs + part.k12 @ theta_cap.T
        temps[:, part.zero_idx] = (-x @ rhs).T
    flows = _branch_flows(network, temps, b_samples)
    return Trajectory(
        times=grid,
        node_names=system.node_names,
        branch_names=system.branch_names,
        temperatures=temps,
        flows=flows,
        output_node=network.output_node,
    )


def simulate_inverse_load(network: ThermalNetwork, schedule: InputSchedule, dt: float,
                          air_capacity_mode: str = "declared",
                          hvac_source: str | None = None,
                          t_end: float | None = None,
                          initial_state=None) -> Trajectory:
    """Prescribe the output-node temperature and compute the power it requires.

    The schedule must carry a channel named after the output node (the
    prescribed temperature).  Scheduled flow sources on the output node
    count as known gains and are subtracted from the load; name one of
    them as ``hvac_source`` to exclude it (it is the unknown).  With
    ``air_capacity_mode='zero'`` the storage term of the output node is
    dropped, which makes the load a purely algebraic function of the
    current sample.
    """
    netmod.require_valid(network)
    _check_channels(network, schedule, allow_output=True)
    if air_capacity_mode not in AIR_CAPACITY_MODES:
        raise ValueError(
            f"unknown air_capacity_mode {air_capacity_mode!r}; pick one of {AIR_CAPACITY_MODES}"
        )
    out_name = network.output_node
    if out_name not in schedule.channels:
        raise ScheduleError(
            f"load mode needs a schedule channel named after the output node ({out_name!r})"
        )
    system = daemod.assemble_dae(network)
    o = system.node_names.index(out_name)
    out_node = network.nodes[o]
    if hvac_source is not None and hvac_source not in out_node.flow_sources:
        raise ScheduleError(
            f"hvac source {hvac_source!r} is not a flow source on the output node"
        )

    keep = [i for i in range(system.n) if i != o]
    sub = daemod.DaeSystem(
        capacity=system.capacity[keep],
        stiffness=system.stiffness[np.ix_(keep, keep)],
        source_map=np.hstack([system.source_map[keep, :], system.stiffness[keep, o:o + 1]]),
        node_names=tuple(system.node_names[i] for i in keep),
        branch_names=system.branch_names + ("__boundary__",),
        branch_sources=system.branch_sources + (out_name,),
        node_sources=tuple(system.node_sources[i] for i in keep),
    )
    part = daemod.partition(sub)
    x, a_s, b_s = ssmod._eliminate(part)

    t0 = float(schedule.times[0])
    grid = _grid(t0, float(t_end) if t_end is not None else float(schedule.times[-1]), dt)
    n_samples = len(grid)

    b_samples = np.zeros((system.m, n_samples))
    for k, name in enumerate(system.branch_sources):
        if name is not None:
            b_samples[k] = schedule.sample(name, grid)
    prescribed = schedule.sample(out_name, grid)
    bx_samples = np.vstack([b_samples, prescribed])
    f_sub = np.zeros((sub.n, n_samples))
    for l, names in enumerate(sub.node_sources):
        for name in names:
            f_sub[l] += schedule.sample(name, grid)

    u = np.vstack([bx_samples, f_sub[part.zero_idx], f_sub[part.cap_idx]])
    x0 = _initial_state(initial_state, len(part.cap_idx),
                        _initial_uniform(network, schedule, t0))
    theta_cap = _integrate(a_s, b_s, u, x0, dt, "backward-euler")

    sub_temps = np.empty((n_samples, sub.n))
    sub_temps[:, part.cap_idx] = theta_cap
    if len(part.zero_idx):
        rhs = part.kb1 @ bx_samples + f_sub[part.zero_idx]
        if len(part.cap_idx):
            rhs = rhs + part.k12 @ theta_cap.T
        sub_temps[:, part.zero_idx] = (-x @ rhs).T

    temps = np.empty((n_samples, system.n))
    temps[:, keep] = sub_temps
    temps[:, o] = prescribed
    flows = _branch_flows(network, temps, b_samples)

    a_inc = netmod.build_incidence(network).entries
    inflow = flows @ a_inc[:, o]
    f_known = np.zeros(n_samples)
    for name in out_node.flow_sources:
        if name != hvac_source:
            f_known += schedule.sample(name, grid)
    c_out = out_node.capacity if air_capacity_mode == "declared" else 0.0
    storage = np.zeros(n_samples)
    storage[1:] = c_out * np.diff(prescribed) / dt
    load = storage - inflow - f_known
    return Trajectory(
        times=grid,
        node_names=system.node_names,
        branch_names=system.branch_names,
        temperatures=temps,
        flows=flows,
        output_node=out_name,
        load=load,
    )


def timestep_sweep(network: ThermalNetwork, schedule: InputSchedule, dts,
                   air_capacity_mode: str = "declared",
                   hvac_source: str | None = None,
                   t_end: float | None = None) -> SweepResult:
    """Rerun the inverse calculation down a ladder of shrinking steps.

    Every rung simulates the same horizon, which defaults to two steps
    of the coarsest rung past the schedule start so each run captures
    the transient.  Reports the peak |load|, its time, and successive
    peak ratios.
    """
    dts = [float(v) for v in dts]
    if len(dts) < 2:
        raise ValueError("time-step ladder needs at least two entries")
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise ValueError("time-step ladder must be strictly decreasing")
    if t_end is None:
        t_end = max(float(schedule.times[-1]), float(schedule.times[0]) + 2 * max(dts))
    points = []
    for dt in dts:
        traj = simulate_inverse_load(
            network, schedule, dt,
            air_capacity_mode=air_capacity_mode,
            hvac_source=hvac_source,
            t_end=t_end,
        )
        k = int(np.argmax(np.abs(traj.load)))
        points.append(SweepPoint(dt=dt, peak_load=float(abs(traj.load[k])),
                                 t_peak=float(traj.times[k])))
    ratios = tuple(b.peak_load / a.peak_load for a, b in zip(points, points[1:]))
    return SweepResult(tuple(points), ratios)


def replay_schedule(trajectory: Trajectory, hvac_name: str,
                    constants: dict[str, float] | None = None,
                    shift: bool = True) -> InputSchedule:
    """Turn an inverse-run load series into a direct-run input schedule.

    With a capacitive output node the load acts through a state row, and
    load[k] is the mean power over the step ending at t[k]: as a held
    input it belongs one row earlier (``shift=True``, the default; the
    last value is repeated to fill the final row).  With a zero-capacity
    output node the load acts through the instantaneous algebraic row
    and must stay on its own sample (``shift=False``).  Extra channels
    are laid out as constants on the same grid.
    """
    if trajectory.load is None:
        raise ValueError("trajectory carries no load series")
    load = trajectory.load
    if shift:
        load = np.concatenate([load[1:], load[-1:]])
    values = {hvac_name: load}
    for name, value in (constants or {}).items():
        values[name] = np.full(len(trajectory.times), value)
    return InputSchedule(trajectory.times, values)
