"""Command-line experiment driver.

    attsafe --study compare --out results/compare
    attsafe --study pareto --config my.cfg --out results/pareto --jobs 4
    attsafe --study montecarlo --seed 7 --out results/mc

Without --config the built-in defaults (the published simulation parameters
and tunings) are used, so `attsafe --study compare` reproduces the
comparative table out of the box.  Exit code 0 means every requested run
completed (converged or cleanly reported); 1 flags run failures; 2 flags
configuration errors.
"""

from __future__ import annotations

import argparse
import sys

from .config import STUDIES, load_config
from .errors import ConfigError
from .studies import run_compare, run_montecarlo, run_pareto


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="attsafe", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--study", choices=STUDIES, default=None,
                   help="study to run (overrides the config file)")
    p.add_argument("--config", default=None, help="config file (default: built-in)")
    p.add_argument("--out", default=None, help="output directory (default: out-<study>)")
    p.add_argument("--seed", type=int, default=None, help="base seed (overrides the config)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent runs")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, overrides={"study": args.study, "seed": args.seed})
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out_dir = args.out or f"out-{config.study}"
    try:
        if config.study == "compare":
            report = run_compare(config, out_dir, jobs=args.jobs)
            failures = report["failures"]
        elif config.study == "pareto":
            report = run_pareto(config, out_dir, jobs=args.jobs)
            failures = []
        else:
            report = run_montecarlo(config, out_dir, jobs=args.jobs)
            failures = []
    except Exception as exc:  # noqa: BLE001 - surface anything to the exit code
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(f"{config.study} study complete; outputs in {out_dir}")
    if failures:
        print(f"failed runs: {failures}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
