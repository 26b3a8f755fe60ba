"""Network-file parsing, schedule ingestion, and the command-line front end.

Network files are line oriented; ``#`` starts a comment.  Directives:

    node <name> C=<J/K>
    branch <name> <from> <to> G=<W/K> [T=<srcname>]     (R=<K/W> accepted)
    flow <srcname> <node>
    output <node>

``<from>``/``<to>`` name a node or the keyword ``ground``.  Declaration
order fixes every index order.  Schedules are CSV with header
``t,<channel names...>`` and zero-order-hold semantics; in load mode the
prescribed temperature channel is named after the output node.
"""

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import dae as daemod
from . import network as netmod
from . import simulate as simmod
from . import statespace as ssmod
from . import transfer as tfmod
from .errors import (
    DuplicateNameError,
    GroundWithoutSourceError,
    MissingOutputError,
    NetSyntaxError,
    ScheduleError,
    ThermalModelError,
    UnknownNodeError,
)
from .network import GROUND, Branch, Node, ThermalNetwork


def _parse_number(token: str, line: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise NetSyntaxError(line, f"{what}: not a number: {token!r}") from None
    if math.isnan(value):
        raise NetSyntaxError(line, f"{what}: not a number: {token!r}")
    return value


def parse_network(text: str) -> ThermalNetwork:
    """Parse a network file; every error names its source line."""
    nodes: dict[str, dict] = {}
    branches: list[dict] = []
    branch_names: set[str] = set()
    flows: list[tuple[str, str, int]] = []
    flow_names: set[str] = set()
    output: str | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        directive = tokens[0]

        if directive == "node":
            if len(tokens) != 3 or not tokens[2].startswith("C="):
                raise NetSyntaxError(lineno, "expected: node <name> C=<J/K>")
            name = tokens[1]
            if name in nodes:
                raise DuplicateNameError(lineno, f"node {name!r} already declared")
            if name == GROUND:
                raise NetSyntaxError(lineno, f"{GROUND!r} is reserved for the reference")
            nodes[name] = {
                "capacity": _parse_number(tokens[2][2:], lineno, "capacity"),
                "flows": [],
            }

        elif directive == "branch":
            if len(tokens) not in (5, 6):
                raise NetSyntaxError(
                    lineno, "expected: branch <name> <from> <to> G=<W/K> [T=<srcname>]"
                )
            name, from_node, to_node = tokens[1], tokens[2], tokens[3]
            if name in branch_names:
                raise DuplicateNameError(lineno, f"branch {name!r} already declared")
            branch_names.add(name)
            if tokens[4].startswith("G="):
                g = _parse_number(tokens[4][2:], lineno, "conductance")
            elif tokens[4].startswith("R="):
                r = _parse_number(tokens[4][2:], lineno, "resistance")
                if r == 0:
                    raise NetSyntaxError(lineno, "resistance must be nonzero")
                g = 1.0 / r
            else:
                raise NetSyntaxError(lineno, "expected G=<W/K> or R=<K/W>")
            temp_source = None
            if len(tokens) == 6:
                if not tokens[5].startswith("T="):
                    raise NetSyntaxError(lineno, "expected T=<srcname>")
                temp_source = tokens[5][2:]
                if not temp_source:
                    raise NetSyntaxError(lineno, "empty temperature-source name")
            branches.append({
                "name": name, "from": from_node, "to": to_node,
                "g": g, "temp": temp_source, "line": lineno,
            })

        elif directive == "flow":
            if len(tokens) != 3:
                raise NetSyntaxError(lineno, "expected: flow <srcname> <node>")
            src, node = tokens[1], tokens[2]
            if src in flow_names:
                raise DuplicateNameError(lineno, f"flow source {src!r} already declared")
            flow_names.add(src)
            flows.append((src, node, lineno))

        elif directive == "output":
            if len(tokens) != 2:
                raise NetSyntaxError(lineno, "expected: output <node>")
            if output is not None:
                raise NetSyntaxError(lineno, "duplicate output directive")
            output = tokens[1]

        else:
            raise NetSyntaxError(lineno, f"unknown directive {directive!r}")

    for src, node, lineno in flows:
        if node not in nodes:
            raise UnknownNodeError(lineno, f"flow source {src!r}: unknown node {node!r}")
        nodes[node]["flows"].append(src)
    for spec in branches:
        for end in (spec["from"], spec["to"]):
            if end != GROUND and end not in nodes:
                raise UnknownNodeError(
                    spec["line"], f"branch {spec['name']!r}: unknown node {end!r}"
                )
        if GROUND in (spec["from"], spec["to"]) and spec["temp"] is None:
            raise GroundWithoutSourceError(
                spec["line"],
                f"branch {spec['name']!r}: a ground branch needs T=<srcname>",
            )
    if output is None:
        raise MissingOutputError()

    return ThermalNetwork(
        nodes=tuple(
            Node(name, info["capacity"], tuple(info["flows"]))
            for name, info in nodes.items()
        ),
        branches=tuple(
            Branch(s["name"], s["from"], s["to"], s["g"], s["temp"]) for s in branches
        ),
        output_node=output,
    )


def render_network(network: ThermalNetwork) -> str:
    """Emit a network back in the file grammar (round-trips through parse)."""
    lines = []
    flows = []
    for node in network.nodes:
        lines.append(f"node {node.name} C={node.capacity!r}")
        flows.extend(f"flow {src} {node.name}" for src in node.flow_sources)
    for b in network.branches:
        suffix = f" T={b.temp_source}" if b.temp_source is not None else ""
        lines.append(f"branch {b.name} {b.from_node} {b.to_node} G={b.conductance!r}{suffix}")
    lines.extend(flows)
    lines.append(f"output {network.output_node}")
    return "\n".join(lines) + "\n"


def read_schedule(text: str, source: str = "<schedule>") -> simmod.InputSchedule:
    """Parse a schedule CSV; errors carry the source line number."""
    rows = list(csv.reader(io.StringIO(text)))
    rows = [(i + 1, r) for i, r in enumerate(rows) if any(cell.strip() for cell in r)]
    if not rows:
        raise ScheduleError(f"{source}: line 1: empty schedule file")
    header_line, header = rows[0]
    header = [h.strip() for h in header]
    if not header or header[0] != "t":
        raise ScheduleError(f"{source}: line {header_line}: header must start with 't'")
    channels = header[1:]
    if len(set(channels)) != len(channels):
        raise ScheduleError(f"{source}: line {header_line}: duplicate channel names")
    if any(not name for name in channels):
        raise ScheduleError(f"{source}: line {header_line}: empty channel name")
    times = []
    series: list[list[float]] = [[] for _ in channels]
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ScheduleError(
                f"{source}: line {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        try:
            values = [float(cell) for cell in row]
        except ValueError:
            raise ScheduleError(f"{source}: line {lineno}: not a number") from None
        if times and values[0] <= times[-1]:
            raise ScheduleError(f"{source}: line {lineno}: times must be strictly increasing")
        times.append(values[0])
        for j, v in enumerate(values[1:]):
            series[j].append(v)
    if not times:
        raise ScheduleError(f"{source}: line {header_line}: schedule has no data rows")
    return simmod.InputSchedule(
        np.array(times), {name: np.array(col) for name, col in zip(channels, series)}
    )


# ---------------------------------------------------------------------------
# deterministic formatting

def _num(x: float) -> str:
    return f"{x:.17g}"


def _short(x: float) -> str:
    return f"{x:.10g}"


def _matrix_block(matrix: np.ndarray, row_labels, col_labels) -> str:
    cells = [[""] + list(col_labels)]
    for label, row in zip(row_labels, np.atleast_2d(matrix)):
        cells.append([label] + [_short(v) for v in row])
    widths = [max(len(r[j]) for r in cells) for j in range(len(cells[0]))]
    return "\n".join(
        "  ".join(cell.rjust(w) for cell, w in zip(row, widths)).rstrip()
        for row in cells
    )


def trajectory_csv(traj: simmod.Trajectory) -> str:
    """Deterministic trajectory CSV: 17 significant digits, LF endings."""
    header = ["t", *traj.node_names, *(f"q:{name}" for name in traj.branch_names)]
    if traj.load is not None:
        header.append("load")
    out = [",".join(header)]
    for k in range(len(traj.times)):
        row = [_num(traj.times[k])]
        row += [_num(v) for v in traj.temperatures[k]]
        row += [_num(v) for v in traj.flows[k]]
        if traj.load is not None:
            row.append(_num(traj.load[k]))
        out.append(",".join(row))
    return "\n".join(out) + "\n"


def sweep_csv(result: simmod.SweepResult) -> str:
    out = ["dt,peak_load,t_peak,ratio_to_prev"]
    for i, point in enumerate(result.points):
        ratio = _num(result.ratios[i - 1]) if i > 0 else ""
        out.append(f"{_num(point.dt)},{_num(point.peak_load)},{_num(point.t_peak)},{ratio}")
    return "\n".join(out) + "\n"


def frequency_csv(tfm: tfmod.TransferMatrix, omegas: np.ndarray) -> str:
    response = tfmod.frequency_response(tfm, omegas)
    header = ["omega"]
    for label in tfm.input_labels:
        header += [f"mag:{label}", f"phase:{label}"]
    out = [",".join(header)]
    for k, w in enumerate(omegas):
        row = [_num(w)]
        for i in range(len(tfm.entries)):
            h = response[i, k]
            row += [_num(abs(h)), _num(float(np.angle(h)))]
        out.append(",".join(row))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# subcommands

def _load_network(path: str) -> ThermalNetwork:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ThermalModelError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_network(text)
    except ThermalModelError as exc:
        raise ThermalModelError(f"{path}: {exc}") from None


def _load_schedule(path: str) -> simmod.InputSchedule:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return read_schedule(fh.read(), source=path)
    except OSError as exc:
        raise ThermalModelError(f"cannot read {path}: {exc.strerror}") from None


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _reduced(network: ThermalNetwork, compact: bool):
    system = daemod.assemble_dae(network)
    ss = ssmod.reduce(daemod.partition(system), network.output_node)
    if compact:
        ss, _ = ssmod.compact_inputs(ss)
    return ss


def _cmd_check(args) -> int:
    report = netmod.validate(_load_network(args.network))
    if report.ok:
        print("ok")
        return 0
    for problem in report.problems:
        print(problem)
    return 1


def _cmd_dae(args) -> int:
    system = daemod.assemble_dae(_load_network(args.network))
    print("nodes:", " ".join(system.node_names))
    print("branches:", " ".join(system.branch_names))
    print("C (diagonal):")
    for name, c in zip(system.node_names, system.capacity):
        print(f"  {name}  {_short(c)}")
    print("K:")
    print(_matrix_block(system.stiffness, system.node_names, system.node_names))
    print("K_b:")
    print(_matrix_block(system.source_map, system.node_names, system.branch_names))
    return 0


def _cmd_ss(args) -> int:
    ss = _reduced(_load_network(args.network), args.compact)
    print("states:", " ".join(ss.state_names) if ss.state_names else "(none)")
    print("inputs:", " ".join(ss.input_labels))
    print("output:", ss.output_name)
    print("A_S:")
    print(_matrix_block(ss.a, ss.state_names, ss.state_names))
    print("B_S:")
    print(_matrix_block(ss.b, ss.state_names, ss.input_labels))
    print("C_S:")
    print(_matrix_block(ss.c.reshape(1, -1), (ss.output_name,), ss.state_names))
    print("D_S:")
    print(_matrix_block(ss.d.reshape(1, -1), (ss.output_name,), ss.input_labels))
    return 0


def _cmd_tf(args) -> int:
    tfm = tfmod.transfer_matrix(_reduced(_load_network(args.network), args.compact))
    den = tfm.denominator
    print(f"output: {tfm.output_label}")
    print(f"denominator (ascending): [{', '.join(_short(c) for c in den.coeffs)}]")
    print(f"denominator: {tfmod.format_polynomial(den)}")
    for label, entry in zip(tfm.input_labels, tfm.entries):
        print(f"H[{label}]:")
        print(f"  numerator (ascending): [{', '.join(_short(c) for c in entry.num.coeffs)}]")
        print(f"  = ({tfmod.format_polynomial(entry.num)}) / ({tfmod.format_polynomial(entry.den)})")
    return 0


def _cmd_classify(args) -> int:
    tfm = tfmod.transfer_matrix(_reduced(_load_network(args.network), compact=True))
    load_set = tfmod.load_transfer_set(tfm, args.hvac) if args.hvac else None
    rows = [("input", "forward", "load-set")]
    load_by_label = {}
    if load_set:
        load_by_label = {label: str(prop) for label, _, prop in load_set.cross_terms}
    for label, entry in zip(tfm.input_labels, tfm.entries):
        fwd = str(tfmod.classify(entry))
        if load_set is None:
            rows.append((label, fwd, ""))
        elif label == load_set.hvac_label:
            rows.append((label, fwd, "(solved for)"))
        else:
            rows.append((label, fwd, load_by_label[label]))
    if load_set:
        rows.append((f"{tfm.output_label} (prescribed)", "-", str(load_set.output_properness)))
        for name, gain in load_set.passthrough:
            rows.append((f"{name} (passthrough)", "-", f"biproper (gain {_short(gain)})"))
    widths = [max(len(r[j]) for r in rows) for j in range(3)]
    for row in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return 0


def _cmd_sim(args) -> int:
    trajectory = simmod.simulate_direct(
        _load_network(args.network),
        _load_schedule(args.sched),
        dt=args.dt,
        method=args.method,
        t_end=args.t_end,
        initial_state=args.init,
    )
    _write_text(args.out, trajectory_csv(trajectory))
    return 0


def _cmd_load(args) -> int:
    trajectory = simmod.simulate_inverse_load(
        _load_network(args.network),
        _load_schedule(args.sched),
        dt=args.dt,
        air_capacity_mode=args.air_capacity,
        hvac_source=args.hvac,
        t_end=args.t_end,
        initial_state=args.init,
    )
    _write_text(args.out, trajectory_csv(trajectory))
    return 0


def _cmd_sweep(args) -> int:
    try:
        dts = [float(v) for v in args.dts.split(",") if v.strip()]
    except ValueError:
        print(f"error: --dts must be a comma-separated list of numbers: {args.dts!r}",
              file=sys.stderr)
        return 2
    result = simmod.timestep_sweep(
        _load_network(args.network),
        _load_schedule(args.sched),
        dts,
        air_capacity_mode=args.air_capacity,
        hvac_source=args.hvac,
        t_end=args.t_end,
    )
    _write_text(args.out, sweep_csv(result))
    return 0


def _cmd_freq(args) -> int:
    tfm = tfmod.transfer_matrix(_reduced(_load_network(args.network), compact=True))
    if args.wmin <= 0 or args.wmax <= args.wmin or args.points < 2:
        print("error: need 0 < wmin < wmax and points >= 2", file=sys.stderr)
        return 2
    omegas = np.logspace(math.log10(args.wmin), math.log10(args.wmax), args.points)
    _write_text(args.out, frequency_csv(tfm, omegas))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermnet",
        description="Thermal RC networks: causality analysis and load simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("network", help="network file")
        p.set_defaults(func=func)
        return p

    add("check", _cmd_check, "validate a network file and print the report")
    add("dae", _cmd_dae, "print the assembled C, K, and K_b with labels")

    p = add("ss", _cmd_ss, "print the reduced state-space matrices")
    p.add_argument("--compact", action="store_true", help="drop sourceless input channels")

    p = add("tf", _cmd_tf, "print every transfer-function entry")
    p.add_argument("--compact", action="store_true", help="drop sourceless input channels")

    p = add("classify", _cmd_classify, "properness table for forward and load transfer")
    p.add_argument("--hvac", help="flow-source name of the HVAC channel")

    for name, func, help_text in (
        ("sim", _cmd_sim, "simulate temperatures for given inputs"),
        ("load", _cmd_load, "compute the load for a prescribed output temperature"),
    ):
        p = add(name, func, help_text)
        p.add_argument("--sched", "--temp", dest="sched", required=True,
                       help="schedule CSV (header: t,<channels...>)")
        p.add_argument("--dt", type=float, required=True, help="time step [s]")
        p.add_argument("--t-end", type=float, default=None, help="horizon end [s]")
        p.add_argument("--init", type=float, default=None, help="uniform initial temperature")
        p.add_argument("--out", required=True, help="output CSV path")
        if name == "sim":
            p.add_argument("--method", choices=simmod.METHODS, default="backward-euler")
        else:
            p.add_argument("--air-capacity", choices=simmod.AIR_CAPACITY_MODES,
                           default="declared")
            p.add_argument("--hvac", default=None,
                           help="flow source treated as the unknown load")

    p = add("sweep", _cmd_sweep, "rerun the load calculation down a time-step ladder")
    p.add_argument("--sched", "--temp", dest="sched", required=True,
                   help="schedule CSV with the prescribed output temperature")
    p.add_argument("--dts", required=True, help="comma list of steps, strictly decreasing")
    p.add_argument("--t-end", type=float, default=None, help="horizon end [s]")
    p.add_argument("--air-capacity", choices=simmod.AIR_CAPACITY_MODES, default="declared")
    p.add_argument("--hvac", default=None, help="flow source treated as the unknown load")
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")

    p = add("freq", _cmd_freq, "tabulate magnitude and phase over a log frequency grid")
    p.add_argument("--wmin", type=float, default=1e-7, help="lowest angular frequency [rad/s]")
    p.add_argument("--wmax", type=float, default=1e-1, help="highest angular frequency [rad/s]")
    p.add_argument("--points", type=int, default=50, help="number of grid points")
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ThermalModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
