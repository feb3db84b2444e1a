"""Command line entry point ``maxwave``.

    maxwave list
    maxwave run <experiment> [--scales 16,32,64] [--seed 7] [--dt 0.125] [--out results/]
    maxwave run --config run.json
    maxwave verify

Exit status: 0 when every check passes, 2 on a tolerance failure, 1 on error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import MaxwaveError
from .explab import EXPERIMENTS, ExperimentConfig, emit_report, run_experiment
from .properties import property_suite

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="maxwave", description="Scaling experiments for the free Schrodinger maximal function.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list experiments and the estimate each one probes")
    run = sub.add_parser("run", help="run one experiment sweep")
    run.add_argument("experiment", nargs="?", help="experiment id (see 'maxwave list')")
    run.add_argument("--scales", type=_int_list, help="comma-separated dyadic scales")
    run.add_argument("--smoke", action="store_true", help="use the small smoke-test scales")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--seeds", type=_int_list, default=None, help="comma-separated seeds")
    run.add_argument("--dt", type=float, default=None)
    run.add_argument("--data", choices=("knapp", "random"), default=None)
    run.add_argument("--out", default=None, help="directory for the CSV and JSON reports")
    run.add_argument("--config", type=Path, help="JSON file with the same fields")
    sub.add_parser("verify", help="run the structural property checks")
    return p


def _config_from_args(args) -> ExperimentConfig:
    fields = {}
    if args.config is not None:
        base = ExperimentConfig.from_json(args.config.read_text())
        fields = base.to_dict()
        fields["out"] = base.out
    if args.experiment:
        fields["experiment"] = args.experiment
    if "experiment" not in fields:
        raise ValueError("an experiment id is required (positional or in --config)")
    if args.smoke:
        fields["scales"] = EXPERIMENTS[fields["experiment"]].smoke_scales
    if args.scales:
        fields["scales"] = args.scales
    if args.seed is not None:
        fields["seeds"] = (args.seed,)
    if args.seeds:
        fields["seeds"] = args.seeds
    if args.dt is not None:
        fields["dt"] = args.dt
    if args.data is not None:
        fields["data"] = args.data
    if args.out is not None:
        fields["out"] = args.out
    return ExperimentConfig(fields.pop("experiment"), tuple(fields.get("scales", ())),
                            tuple(fields.get("seeds", ())), float(fields.get("dt", 0.125)),
                            fields.get("out", ""), fields.get("data", ""))


def _cmd_list() -> int:
    for eid, exp in EXPERIMENTS.items():
        ref = exp.reference
        print(f"{eid:22s} {exp.description}")
        print(f"{'':22s}   reference ({ref.provenance}): {ref.statement}")
    return EXIT_PASS


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)

    def progress(rec):
        print(f"  scale {rec.scale:4d}  lhs {rec.lhs:.6g}  rhs {rec.rhs:.6g}  ratio {rec.ratio:.6g}", flush=True)

    print(f"{cfg.experiment}: scales {list(cfg.scales)}, dt {cfg.dt}, seeds {list(cfg.seeds)}", flush=True)
    run = run_experiment(cfg, progress)
    if run.alpha is not None:
        print(f"  fitted exponent {run.alpha:.4f}, log-RMS residual {run.residual:.4f}")
    for k, v in sorted(run.summary.items()):
        print(f"  {k} {v:.4f}")
    ref = run.reference
    print(f"  reference {ref.exponent} ({ref.kind}, {ref.provenance}): {'PASS' if run.passed else 'FAIL'}")
    if cfg.out:
        for path in emit_report(run, cfg.out):
            print(f"  wrote {path}")
    return EXIT_PASS if run.passed else EXIT_FAIL


def _cmd_verify() -> int:
    results = property_suite()
    for r in results:
        print(r.line())
    return EXIT_PASS if all(r.passed for r in results) else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            return _cmd_list()
        if args.command == "verify":
            return _cmd_verify()
        return _cmd_run(args)
    except (MaxwaveError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
