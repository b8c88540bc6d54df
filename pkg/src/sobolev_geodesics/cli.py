"""Command line entry point: ``sobolev-geodesics list`` and ``sobolev-geodesics run <name>``."""

from __future__ import annotations

import argparse
import sys

from .experiments import ConfigError, ExperimentConfig, list_experiments, load_config, run_experiment


def _parser():
    ap = argparse.ArgumentParser(prog="sobolev-geodesics", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list the named experiments")
    run = sub.add_parser("run", help="run one experiment and write report.csv / report.json")
    run.add_argument("name")
    run.add_argument("--config", help="flat key: value YAML file of parameter overrides")
    run.add_argument("--out", help="output directory (default: reports/<name>)")
    run.add_argument("--seed", type=int)
    run.add_argument("--grid", type=int, help="grid cells per axis for the main grid")
    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "list":
        for name, desc in list_experiments():
            print(f"{name:22s} {desc}")
        return 0
    try:
        mapping = load_config(args.config) if args.config else {}
        for key in ("seed", "grid", "out"):
            val = getattr(args, key)
            if val is not None:
                mapping[key] = val
        mapping.setdefault("out", f"reports/{args.name}")
        cfg = ExperimentConfig.from_mapping(args.name, mapping)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rep = run_experiment(cfg)
    failed = rep.failures()
    print(f"{cfg.name}: {len(rep.rows)} rows, {len(failed)} failing; report in {cfg.out}")
    for r in failed:
        print(f"  FAIL {r.case} | {r.quantity}: computed {r.computed:.6g}, reference {r.reference:.6g}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
