"""Command-line entry point.

Subcommands:
  run <config>              execute the strategy x repeat grid
  audit <config>            trainable-parameter accounting, no training
  report <results_dir>      aggregate persisted results and emit tables
  synth                     generate a phantom dataset on disk
  convert-weights SRC DST   upstream MobileNetV2 checkpoint -> .wts archive
"""

from __future__ import annotations

import argparse
import json
import sys

from .. import data_pipeline
from ..net_core import convert_checkpoint_file
from .config import load_spec
from .runner import aggregate, audit, emit_report, load_results, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ftseg")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment grid from a config")
    p_run.add_argument("config")
    p_run.add_argument("--device", default="cpu")
    p_run.add_argument("--output-dir", default=None)

    p_audit = sub.add_parser("audit", help="trainable-parameter audit")
    p_audit.add_argument("config")

    p_report = sub.add_parser("report", help="aggregate results and emit tables")
    p_report.add_argument("results_dir")
    p_report.add_argument("--formats", default="csv,json")
    p_report.add_argument("--literature", action="store_true",
                          help="append reference rows from the literature table")

    p_synth = sub.add_parser("synth", help="generate a phantom dataset")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--n", type=int, default=60)
    p_synth.add_argument("--seed", type=int, default=7)
    p_synth.add_argument("--size", type=int, default=128)

    p_conv = sub.add_parser("convert-weights",
                            help="convert a MobileNetV2 checkpoint to .wts")
    p_conv.add_argument("src")
    p_conv.add_argument("dst")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except Exception as exc:  # noqa: BLE001 - single machine-readable exit path
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "run":
        spec = load_spec(args.config)
        if args.output_dir:
            spec.output_dir = args.output_dir
        results = run_experiment(spec, device=args.device)
        table = aggregate(results, repeats=spec.repeats)
        emit_report(table, spec.output_dir)
        print(f"completed {len(results)} runs; aggregate written to {spec.output_dir}")
        return 0

    if args.command == "audit":
        spec = load_spec(args.config)
        rows = audit(spec)
        for row in rows:
            print(f"{row['strategy']:>16}: trainable {row['trainable']:>11,}  "
                  f"frozen {row['frozen']:>11,}  "
                  f"reduction vs baseline {row['reduction_vs_baseline']:5.1f}%")
        return 0

    if args.command == "report":
        results = load_results(args.results_dir)
        table = aggregate(results)
        formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())
        written = emit_report(table, args.results_dir, formats,
                              include_literature=args.literature)
        for path in written:
            print(path)
        return 0

    if args.command == "synth":
        samples = data_pipeline.synthesize_phantoms(args.n, args.seed, args.size)
        data_pipeline.save_dataset(samples, args.out)
        print(f"wrote {len(samples)} phantoms to {args.out}")
        return 0

    if args.command == "convert-weights":
        archive = convert_checkpoint_file(args.src, args.dst)
        print(f"wrote {len(archive.tensors)} tensors to {args.dst}")
        return 0

    raise ValueError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
