"""Command-line entry points: run, replay, metrics, experiment, serve.

Exit codes: 0 ok, 2 validation failure, 3 chain/replay failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .canonical import canonical_json
from .errors import ChainError, ReplayError, ScenarioError, WorldError
from .eventlog import read_log
from .kernel import Kernel, KernelConfig, replay, run_simulation, value_injection_experiment
from .runtime import KernelRuntime
from .world import load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_REPLAY = 3

logger = logging.getLogger("socmatrix")


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_run(args: argparse.Namespace) -> int:
    config = KernelConfig()
    if args.snapshot_every is not None:
        config.snapshot_every = args.snapshot_every
    result = run_simulation(args.scenario, args.ticks, args.seed, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / "events.ndjson"
    result.kernel.log.write(log_path)
    state_path = out / "state.json"
    state_path.write_text(
        canonical_json({"state_hash": result.final_state_hash,
                        "state": result.kernel.state_dict()}) + "\n",
        encoding="utf-8",
    )
    _emit({
        "final_state_hash": result.final_state_hash,
        "ticks": args.ticks,
        "records": len(result.records),
        "elapsed_seconds": round(result.elapsed_seconds, 3),
        "log": str(log_path),
        "state": str(state_path),
    })
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    records = read_log(args.log)
    result = replay(records)
    _emit({"final_state_hash": result.final_state_hash, "ticks": result.ticks,
           "records": len(records)})
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    records = read_log(args.log)
    reports = [r.payload["metrics"] for r in records if r.kind == "METRICS"]
    if not reports:
        _emit({"latest": None, "window": args.window, "mean": None})
        return EXIT_OK
    window = reports if args.window is None else reports[-args.window:]
    mean = {
        key: sum(report[key] for report in window) / len(window)
        for key in ("clustering", "sync", "consistency")
    }
    _emit({"latest": reports[-1], "window": len(window), "mean": mean})
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    result = value_injection_experiment(
        args.scenario, args.beta, args.ticks, args.seed, value_name=args.value
    )
    _emit(result)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .gateway import create_app

    host, _, port = args.addr.rpartition(":")
    if not host or not port.isdigit():
        raise WorldError(f"--addr must look like HOST:PORT, got '{args.addr}'")
    world = load_scenario(args.scenario)
    runtime = KernelRuntime(Kernel(world, args.seed))
    runtime.start(args.tick_interval, max_ticks=args.max_ticks)
    app = create_app(runtime, token=args.token)
    logger.info("serving scenario %s on %s", args.scenario, args.addr)
    try:
        uvicorn.run(app, host=host, port=int(port), log_level="warning")
    finally:
        runtime.stop()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socmatrix",
        description="Deterministic society-centric multi-agent simulation kernel.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write the event log")
    run_p.add_argument("--scenario", required=True)
    run_p.add_argument("--ticks", type=int, required=True)
    run_p.add_argument("--seed", type=int, required=True)
    run_p.add_argument("--out", required=True)
    run_p.add_argument("--snapshot-every", type=int, default=None)
    run_p.set_defaults(func=cmd_run)

    replay_p = sub.add_parser("replay", help="rebuild state from an event log")
    replay_p.add_argument("--log", required=True)
    replay_p.set_defaults(func=cmd_replay)

    metrics_p = sub.add_parser("metrics", help="report metrics from an event log")
    metrics_p.add_argument("--log", required=True)
    metrics_p.add_argument("--window", type=int, default=None)
    metrics_p.set_defaults(func=cmd_metrics)

    exp_p = sub.add_parser("experiment", help="value-injection treatment vs control")
    exp_p.add_argument("--scenario", required=True)
    exp_p.add_argument("--beta", type=float, required=True)
    exp_p.add_argument("--ticks", type=int, required=True)
    exp_p.add_argument("--seed", type=int, required=True)
    exp_p.add_argument("--value", default=None)
    exp_p.set_defaults(func=cmd_experiment)

    serve_p = sub.add_parser("serve", help="serve the gateway API for a live run")
    serve_p.add_argument("--scenario", required=True)
    serve_p.add_argument("--addr", default="127.0.0.1:8420")
    serve_p.add_argument("--seed", type=int, required=True)
    serve_p.add_argument("--token", default="change-me")
    serve_p.add_argument("--tick-interval", type=float, default=1.0)
    serve_p.add_argument("--max-ticks", type=int, default=None)
    serve_p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("MATRIX_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, WorldError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ChainError, ReplayError) as exc:
        print(f"replay error: {exc}", file=sys.stderr)
        return EXIT_REPLAY


if __name__ == "__main__":
    sys.exit(main())
