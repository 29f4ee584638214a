"""Command-line interface: run scenarios headless, tune gains, serve live
sessions.

Exit codes: 0 success, 2 unreadable input file, 3 validation failure,
4 output write failure, 5 server error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from buoysim.engine import run_scenario
from buoysim.metrics import write_metrics_json
from buoysim.scenario import ScenarioValidationError, load_scenario
from buoysim.telemetry import write_csv
from buoysim.tuner import load_tune_spec, tune, write_trace_csv, write_tune_result

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VALIDATION = 3
EXIT_WRITE = 4
EXIT_SERVER = 5


def _load_script(path: str | None):
    if path is None:
        return None
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, list):
        raise ScenarioValidationError(["script: expected a JSON list of commands"])
    return doc


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
        script = _load_script(args.script)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ScenarioValidationError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    result = run_scenario(
        scenario, seed=args.seed, verbose=args.verbose_telemetry, script=script
    )
    out = Path(args.out)
    metrics_path = out.with_suffix(".metrics.json") if out.suffix else Path(str(out) + ".metrics.json")
    try:
        write_csv(result.telemetry, out)
        write_metrics_json(
            result.metrics,
            metrics_path,
            extra={
                "scenario_label": scenario.label,
                "conservation_residual": result.conservation_residual,
                "total_energy_j": result.telemetry[-1].cumulative_energy,
                "gas_ledger_m3": {
                    "source": result.ledger.source,
                    "escaped": result.ledger.escaped,
                    "released": result.ledger.released,
                    "dissolved": result.ledger.dissolved,
                    "overflow": result.ledger.overflow,
                    "disturbed": result.ledger.disturbed,
                },
            },
        )
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_WRITE
    print(f"wrote {out} ({len(result.telemetry)} records) and {metrics_path}")
    return EXIT_OK


def _cmd_tune(args: argparse.Namespace) -> int:
    try:
        spec = load_tune_spec(args.spec)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.seed is not None:
        spec = type(spec)(
            scenario_template=spec.scenario_template,
            bounds=spec.bounds,
            weights=spec.weights,
            budget=spec.budget,
            seed=args.seed,
        )
    result = tune(spec)
    try:
        write_tune_result(result, args.out)
        if args.trace_csv:
            write_trace_csv(result, args.trace_csv)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_WRITE
    kp, ki, kd = result.best_gains
    flag = " (budget exhausted)" if result.truncated else ""
    print(
        f"best gains kp={kp:.4g} ki={ki:.4g} kd={kd:.4g} cost={result.best_cost:.4g} "
        f"after {len(result.trace)} evaluations{flag}"
    )
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    from buoysim.gateway.server import SessionServer

    try:
        scenario = load_scenario(args.scenario)
        script = _load_script(args.script)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ScenarioValidationError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        server = SessionServer(
            scenario, port=args.port, pacing=args.pacing, seed=args.seed, script=script
        )
    except OSError as exc:
        print(f"error: cannot bind port {args.port}: {exc}", file=sys.stderr)
        return EXIT_SERVER
    print(
        f"serving '{scenario.label}' on port {server.port} at {args.pacing}x real time",
        flush=True,
    )
    server.serve_forever()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="buoysim",
        description="Buoyancy-robot simulator: headless runs, gain tuning, live sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario headless, write telemetry CSV + metrics JSON")
    p_run.add_argument("--scenario", required=True, help="scenario JSON file")
    p_run.add_argument("--out", required=True, help="telemetry CSV output path")
    p_run.add_argument("--seed", type=int, default=None, help="override the sensor noise seed")
    p_run.add_argument("--script", default=None, help="timed command script JSON file")
    p_run.add_argument(
        "--verbose-telemetry",
        action="store_true",
        help="emit one record per physics step instead of per control tick",
    )
    p_run.set_defaults(func=_cmd_run)

    p_tune = sub.add_parser("tune", help="search PID gains against a scenario template")
    p_tune.add_argument("--spec", required=True, help="tune spec JSON file")
    p_tune.add_argument("--out", required=True, help="result JSON output path")
    p_tune.add_argument("--trace-csv", default=None, help="also export the evaluation trace as CSV")
    p_tune.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p_tune.set_defaults(func=_cmd_tune)

    p_serve = sub.add_parser("serve", help="serve a live paced session for operator consoles")
    p_serve.add_argument("--scenario", required=True, help="scenario JSON file")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--pacing", type=float, default=1.0, help="real-time factor")
    p_serve.add_argument("--seed", type=int, default=None)
    p_serve.add_argument("--script", default=None, help="timed command script JSON file")
    p_serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
