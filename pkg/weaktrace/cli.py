# weaktrace/cli.py
# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The weaktrace developers
from ._version import __version__

# import required packages
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
import argparse
import csv
import io
import json
import sys

# bring in other sibling modules
from .circuitfile import CircuitParseError, parse
from .config import MODES, config
from .engine import Circuit, ImpossibleBranchError, ProbabilityLedger, evolve_forward, postselect_policy
from .firstorder import to_complex
from .hilbert import RegistryError, projector
from .optics import DEFAULT_CONVENTION
from .scenarios import SCENARIOS, ScenarioConfig, ScenarioConfigError, ScenarioReport, build_one_cycle_fig2, build_salih_fig1, run_scenario
from .trace import TraceReport, trace_exact, trace_first_order
from .tsvf import UndefinedWeakValueError, two_state_vector_at, weak_value

"""
Command-line front end.

``weaktrace scenario NAME``   run a built-in scenario and print its checks
``weaktrace run FILE``        trace every mirror of a circuit file for one outcome
``weaktrace sweep``           exact deficits over a list of coupling strengths
``weaktrace verify``          every built-in check; exit status 1 on any failure

Exit status is 0 on success, 1 when a check fails and 2 for bad input
(unknown scenario, unknown outcome, unreadable or invalid circuit file).
"""

SCHEMA = "weaktrace.report/1"
CSV_COLUMNS = (
    "scenario",
    "outcome",
    "mirror",
    "epsilon",
    "fidelity_deficit",
    "predicted_deficit",
    "coherence",
    "verdict",
)
VERIFY_SUITE = ("paradox", "fig1", "fig1-nofilter", "strategy-a", "strategy-b", "strategy-c", "fig2-shutter", "fig2-open")

# units of every numeric field a report or a CSV row carries
UNITS = {
    "epsilon": "dimensionless coupling strength",
    "coefficient": "units of epsilon",
    "coherence": "units of epsilon",
    "fidelity_deficit": "probability",
    "predicted_deficit": "probability",
    "probability": "probability",
    "click_probability": "probability",
    "null_probability": "probability",
    "unconditional_click": "probability",
    "tolerance": "dimensionless",
    "stage": "stage index",
    "weak_value": "dimensionless",
    "values": "dimensionless unless the name carries a '/ eps' or '/ eps^2' scaling",
}

# circuits the sweep knows, with the outcome it postselects on
SWEEP_TARGETS = {
    "fig1": (lambda: build_salih_fig1(), "D0"),
    "fig1-nofilter": (lambda: build_salih_fig1(ScenarioConfig(include_final_filter=False)), "D0"),
    "fig2-shutter": (lambda: build_one_cycle_fig2(True)[0], "D1"),
    "fig2-open": (lambda: build_one_cycle_fig2(False)[0], "D3"),
}


class UsageError(Exception):
    """Bad command-line input; reported with exit status 2."""


# -- report assembly -------------------------------------------------------

def _number(value: Any) -> Any:
    if value is None:
        return None
    value = to_complex(value)
    return value.real if value.imag == 0 else {"re": value.real, "im": value.imag}


def _envelope(command: str, epsilon: float, mode: str, reports: List[Dict[str, Any]]) -> Dict[str, Any]:
    return {
        "schema": SCHEMA,
        "version": __version__,
        "convention": DEFAULT_CONVENTION,
        "command": command,
        "config": {"epsilon": epsilon, "mode": mode, "tolerance": config.tolerance},
        "units": UNITS,
        "reports": reports,
    }


def _ledger_dict(ledger: ProbabilityLedger) -> List[Dict[str, Any]]:
    return [
        {
            "outcome": event.outcome,
            "action": event.action,
            "stage": event.stage,
            "click_probability": _number(event.click_probability),
            "null_probability": _number(event.null_probability),
            "unconditional_click": _number(event.unconditional_click),
        }
        for event in ledger.events
    ]


def _csv_row(scenario: str, trace: TraceReport, predicted: Optional[float] = None) -> Dict[str, Any]:
    """One plot-ready record; ``coherence`` is the real part of rho[chi_perp, chi] / epsilon."""
    predicted = trace.predicted_deficit if predicted is None else predicted
    return {
        "scenario": scenario,
        "outcome": trace.outcome or "",
        "mirror": trace.mirror_id,
        "epsilon": trace.epsilon,
        "fidelity_deficit": "" if trace.fidelity_deficit is None else trace.fidelity_deficit,
        "predicted_deficit": "" if predicted is None else predicted,
        "coherence": "" if trace.coherence is None else complex(trace.coherence).real,
        "verdict": trace.verdict,
    }


def _write_json(document: Dict[str, Any], path: str) -> None:
    text = json.dumps(document, indent=2, sort_keys=True)
    if path == "-":
        print(text)
        return
    Path(path).write_text(text + "\n", encoding="utf-8")


def _write_csv(rows: Sequence[Dict[str, Any]], path: str) -> None:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if path == "-":
        sys.stdout.write(buffer.getvalue())
        return
    Path(path).write_text(buffer.getvalue(), encoding="utf-8")


def _print_report(report: ScenarioReport) -> None:
    status = "PASS" if report.passed else "FAIL"
    print(f"{status} {report.scenario} (epsilon={report.epsilon:g}, mode={report.mode})")
    for check in report.checks:
        mark = "ok  " if check.passed else "FAIL"
        print(f"  {mark} {check.name}: expected {_number_text(check.expected)}, got {_number_text(check.actual)}")


def _number_text(value: Any) -> str:
    if isinstance(value, (str, bool)) or value is None:
        return str(value)
    try:
        value = to_complex(value)
    except (TypeError, ValueError):
        return str(value)
    return f"{value.real:.6g}" if value.imag == 0 else f"{value:.6g}"


# -- subcommands -----------------------------------------------------------

def _scenario(args: argparse.Namespace) -> int:
    if args.name not in SCENARIOS:
        raise UsageError(f"unknown scenario {args.name!r}; known: {', '.join(SCENARIOS)}")
    report = run_scenario(args.name, args.eps, args.mode, debug=args.debug)
    _print_report(report)
    if args.json:
        _write_json(_envelope("scenario", report.epsilon, report.mode, [report.as_dict()]), args.json)
    if args.csv:
        _write_csv([_csv_row(report.scenario, trace) for trace in report.traces], args.csv)
    return 0 if report.passed else 1


def _parse_weak(spec: str) -> Tuple[str, str]:
    path, sep, time = spec.partition("@")
    if not sep or not path or not time:
        raise UsageError(f"--weak expects PATH@TIME, got {spec!r}")
    return path, time


def _file_epsilon(circuit: Circuit) -> float:
    """Coupling strength of the first coupled mirror in the file, else the configured default."""
    for stage in circuit.stages:
        for element in stage.elements:
            if element.coupling is not None:
                return element.coupling.epsilon
    return config.epsilon


def _run(args: argparse.Namespace) -> int:
    try:
        source = Path(args.file).read_bytes()
    except OSError as err:
        raise UsageError(f"cannot read {args.file}: {err.strerror}") from err
    circuit: Circuit = parse(source)
    epsilon = _file_epsilon(circuit) if args.eps is None else args.eps
    mode = config.mode if args.mode is None else args.mode
    circuit = circuit.with_mode(mode, epsilon)
    if args.postselect not in circuit.outcomes():
        raise UsageError(f"unknown outcome {args.postselect!r}; circuit has: {', '.join(circuit.outcomes()) or 'none'}")

    _, ledger = evolve_forward(circuit, policy=postselect_policy(circuit, args.postselect), debug=args.debug)
    first = trace_first_order(circuit, args.postselect, epsilon=epsilon, debug=args.debug)
    exact = trace_exact(circuit, args.postselect, epsilon=epsilon, debug=args.debug)

    weak_values = []
    for spec in args.weak or ():
        path, time = _parse_weak(spec)
        if time not in circuit.timepoints():
            raise UsageError(f"unknown time point {time!r}")
        tsv = two_state_vector_at(circuit, time, args.postselect, debug=args.debug)
        value = weak_value(tsv, projector(paths=[path], name=f"P_{path}"), debug=args.debug)
        weak_values.append({"operator": f"P_{path}", "time": time, "kind": "weak_value", "value": _number(value)})
        print(f"(P_{path})_w at {time} = {_number_text(value)}")

    print(f"P({args.postselect}) = {_number_text(ledger.probability(args.postselect))}")
    for mirror_id in circuit.mirrors:
        print(
            f"  {mirror_id}: coefficient={_number_text(first[mirror_id].coefficient)}"
            f" deficit={_number_text(exact[mirror_id].fidelity_deficit)} verdict={exact[mirror_id].verdict}"
        )

    if args.json:
        report = {
            "circuit": circuit.name,
            "outcome": args.postselect,
            "ledger": _ledger_dict(ledger),
            "weak_values": weak_values,
            "traces": [first[m].as_dict() for m in circuit.mirrors] + [exact[m].as_dict() for m in circuit.mirrors],
        }
        _write_json(_envelope("run", epsilon, mode, [report]), args.json)
    if args.csv:
        rows = [_csv_row(circuit.name, exact[m], first[m].predicted_deficit) for m in circuit.mirrors]
        _write_csv(rows, args.csv)
    return 0


def _eps_list(text: str) -> List[float]:
    values = []
    for item in text.split(","):
        try:
            value = float(item)
        except ValueError:
            raise UsageError(f"--eps-list: {item!r} is not a number") from None
        if value < 0:
            raise UsageError(f"--eps-list: coupling strength must be >= 0, got {value}")
        values.append(value)
    return values


def _sweep_point(target: str, epsilon: float, debug: bool) -> List[Dict[str, Any]]:
    build, outcome = SWEEP_TARGETS[target]
    circuit = build()
    first = trace_first_order(circuit, outcome, epsilon=epsilon, debug=debug)
    exact = trace_exact(circuit, outcome, epsilon=epsilon, debug=debug)
    return [_csv_row(target, exact[m], first[m].predicted_deficit) for m in circuit.mirrors]


def _sweep(args: argparse.Namespace) -> int:
    if args.scenario not in SWEEP_TARGETS:
        raise UsageError(f"cannot sweep {args.scenario!r}; choose from {', '.join(SWEEP_TARGETS)}")
    epsilons = _eps_list(args.eps_list)
    workers = args.workers or min(4, len(epsilons))
    with ThreadPoolExecutor(max_workers=workers) as executor:
        # map keeps the input order
        points = list(executor.map(lambda eps: _sweep_point(args.scenario, eps, args.debug), epsilons))
    rows = [row for point in points for row in point]
    _write_csv(rows, args.csv or "-")
    if args.json:
        _write_json(_envelope("sweep", epsilons[0], "exact", rows), args.json)
    return 0


def _verify(args: argparse.Namespace) -> int:
    reports = [run_scenario(name, args.eps, args.mode, debug=args.debug) for name in VERIFY_SUITE]
    for report in reports:
        _print_report(report)
    failed = [report.scenario for report in reports if not report.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} scenarios passed")
    if args.json:
        epsilon = config.epsilon if args.eps is None else args.eps
        mode = config.mode if args.mode is None else args.mode
        _write_json(_envelope("verify", epsilon, mode, [r.as_dict() for r in reports]), args.json)
    return 1 if failed else 0


# -- entry points ----------------------------------------------------------

def _non_negative(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"coupling strength must be >= 0, got {value}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weaktrace",
        description="Weak traces of pre- and postselected photons in nested interferometers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--debug", action="store_true", help="Print trace messages from the engine")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--eps", type=_non_negative, default=None, help=f"Coupling strength (default {config.epsilon})")
        p.add_argument("--mode", choices=MODES, default=None, help=f"Coupling mode (default {config.mode})")
        p.add_argument("--json", metavar="PATH", help="Write the JSON report here ('-' for stdout)")

    p = sub.add_parser("scenario", help="Run a built-in scenario")
    p.add_argument("name", help=f"One of: {', '.join(SCENARIOS)}")
    common(p)
    p.add_argument("--csv", metavar="PATH", help="Write the trace table here ('-' for stdout)")
    p.set_defaults(handler=_scenario)

    p = sub.add_parser("run", help="Trace the mirrors of a circuit file")
    p.add_argument("file", help="Circuit file")
    p.add_argument("--postselect", required=True, metavar="OUTCOME", help="Outcome to condition on")
    p.add_argument("--weak", action="append", metavar="PATH@TIME", help="Weak value of a path projector; repeatable")
    common(p)
    p.add_argument("--csv", metavar="PATH", help="Write the trace table here ('-' for stdout)")
    p.set_defaults(handler=_run)

    p = sub.add_parser("sweep", help="Exact mirror deficits over several coupling strengths")
    p.add_argument("--eps-list", required=True, metavar="E1,E2,...", help="Comma-separated coupling strengths")
    p.add_argument("--scenario", default="fig1", help=f"One of: {', '.join(SWEEP_TARGETS)} (default fig1)")
    p.add_argument("--workers", type=_positive_int, default=None, help="Worker threads (default: up to 4)")
    p.add_argument("--csv", metavar="PATH", help="Write the table here (default stdout)")
    p.add_argument("--json", metavar="PATH", help="Also write the rows as a JSON report")
    p.set_defaults(handler=_sweep)

    p = sub.add_parser("verify", help="Run every built-in check")
    common(p)
    p.set_defaults(handler=_verify)
    return parser


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one command line and return its exit status.

    Args:
    -----

        :argv (Sequence[str]): Optional argument. Arguments without the program name; defaults to ``sys.argv[1:]``.

    Returns:
    --------

        :int: 0 on success, 1 when a check fails, 2 for bad input.

    Example:
    --------

        .. code-block:: python

            run_command(["scenario", "fig1", "--eps", "0.001", "--json", "fig1.json"])
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    try:
        return args.handler(args)
    except CircuitParseError as err:
        for diagnostic in err.diagnostics:
            print(f"{getattr(args, 'file', '<circuit>')}:{diagnostic}", file=sys.stderr)
        return 2
    except (UsageError, ScenarioConfigError, RegistryError, ImpossibleBranchError, UndefinedWeakValueError) as err:
        print(f"weaktrace: error: {err}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command())
