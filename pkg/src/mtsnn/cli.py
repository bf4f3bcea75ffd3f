"""Command line entry point: ``mtsnn run | calibrate | export-network``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from mtsnn.bench import RasterMismatch, RunSpec, build_network, run_dca, run_sweep

EXIT_CONFIG = 2
EXIT_MISMATCH = 3
EXIT_IO = 4


def _threads(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad thread list {s!r}") from None


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON RunSpec; flags override its keys")
    p.add_argument("--model", choices=["synfire", "chainfire", "from-file"])
    p.add_argument("--network-file", help="network JSON for --model from-file")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="model parameter override (JSON value), repeatable")
    p.add_argument("--seed", type=int)


def _spec_from_args(args) -> RunSpec:
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
    overrides = {
        "model": args.model,
        "network_file": args.network_file,
        "seed": args.seed,
        "duration_ms": getattr(args, "duration_ms", None),
        "threads": getattr(args, "threads", None),
        "steps_per_ms": getattr(args, "steps_per_ms", None),
        "integrator": getattr(args, "integrator", None),
        "synapse_mode": getattr(args, "synapse_mode", None),
        "out": getattr(args, "out", None),
        "warmup_ms": getattr(args, "warmup_ms", None),
    }
    doc.update({k: v for k, v in overrides.items() if v is not None})
    if getattr(args, "dca", False):
        doc["dca"] = True
    if getattr(args, "format", None):
        doc["formats"] = [args.format]
    if getattr(args, "no_plots", False):
        doc["plots"] = False
    params = dict(doc.get("model_params", {}))
    for item in args.param:
        key, _, value = item.partition("=")
        if not key or not _:
            raise ValueError(f"--param needs KEY=VALUE, got {item!r}")
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    doc["model_params"] = params
    return RunSpec.from_dict(doc)


def cmd_run(args) -> int:
    spec = _spec_from_args(args)
    if spec.dca:
        report, _ = run_dca(spec)
        print(report.format_table())
        d = report.dca
        print(
            f"DCA: worker-ms {d['worker_ms']} vs fixed {d['fixed_max_worker_ms']} "
            f"({100 * d['worker_ms_ratio']:.1f}%), real-time compliance {d['realtime_compliance']:.3f}, "
            f"final workers {d['final_workers']}"
        )
    else:
        report = run_sweep(spec)
        print(report.format_table())
    if spec.out:
        print(f"outputs written to {spec.out}")
    return 0


def cmd_calibrate(args) -> int:
    from mtsnn.netmodels.synfire import SynfireConfig, calibrate_synfire

    result = calibrate_synfire(SynfireConfig(synapse_mode=args.synapse_mode or "cuba"), duration_ms=args.duration_ms)
    for row in result["scan"]:
        print(f"w_ee={row['w_ee']:<5} {'ok' if row['ok'] else '--'} spikes={row['spikes']} onsets={row['first_onsets']}")
    if result["config"] is None:
        print("no passing weight in grid", file=sys.stderr)
        return 1
    doc = {
        "description": "Synfire defaults pinned by calibrate_synfire",
        "version": 1,
        "config": result["config"],
        "passing": result["passing"],
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return 0


def cmd_export(args) -> int:
    from mtsnn.netmodels.io import save_network

    spec = _spec_from_args(args)
    net = build_network(spec)
    save_network(net, args.out)
    print(json.dumps(net.summary()))
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtsnn", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="thread-count sweep, or a DCA run with --dca")
    _add_model_args(p)
    p.add_argument("--duration-ms", type=int)
    p.add_argument("--threads", type=_threads, help="comma list; more than one entry is a sweep")
    p.add_argument("--dca", action="store_true")
    p.add_argument("--steps-per-ms", type=int)
    p.add_argument("--integrator", choices=["euler", "rk4"])
    p.add_argument("--synapse-mode", choices=["cuba", "coba"])
    p.add_argument("--warmup-ms", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("calibrate", help="scan Synfire w_ee and print/write the pinned config")
    p.add_argument("--synapse-mode", choices=["cuba", "coba"])
    p.add_argument("--duration-ms", type=int, default=600)
    p.add_argument("--out")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("export-network", help="write a built network as JSON")
    _add_model_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except RasterMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
