"""Command-line interface.

Subcommands: run (one experiment), sweep (smoothing sweep), oracle (print
reference values on a grid), selftest (estimator and gradient suites).
"""

import argparse
import sys

import numpy as np

from dmlab import checks, figures
from dmlab.experiments import ExperimentKit, EXPERIMENTS, default_config
from dmlab.harness import (emit_results, load_config, run_experiment,
                           run_smoothing_sweep)


def _base_config(args) -> dict:
    if args.config:
        cfg = load_config(args.config)
    else:
        if not args.experiment:
            raise SystemExit("need --config or --experiment")
        cfg = default_config(args.experiment)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["output"] = args.out
    if args.replications is not None:
        cfg["replications"] = args.replications
    if getattr(args, "method", None):
        cfg["methods"] = [m.strip() for m in args.method.split(",")]
    return cfg


def _add_common(p):
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--experiment", choices=EXPERIMENTS,
                   help="experiment name (built-in default config)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--replications", type=int)


def cmd_run(args) -> int:
    cfg = _base_config(args)
    if cfg["experiment"] == "smoothing_sweep":
        return cmd_sweep(args)
    sizes = cfg.get("sample_sizes") or [cfg["m"]]
    all_reports, all_failures = [], []
    for m in sizes:
        reports, fails = run_experiment(cfg, m=m)
        all_reports.extend(reports)
        all_failures.extend(fails)
    paths = emit_results(all_reports, all_failures, cfg, cfg["output"])
    if not args.no_figures:
        paths += figures.render_experiment(all_reports, cfg, cfg["output"])
        if len(sizes) > 1:
            rows = [{"method": r.method, "m": r.m, "gamma_rmse": r.gamma_rmse}
                    for r in all_reports
                    if r.replication is None and r.gamma_rmse is not None]
            if rows:
                paths += figures.render_gamma_sizes(rows, cfg["output"])
    for p in paths:
        print(p)
    for f in all_failures:
        print(f"FAILED cell {f.method} rep {f.replication}: {f.message}",
              file=sys.stderr)
    return 1 if all_failures else 0


def cmd_sweep(args) -> int:
    cfg = _base_config(args)
    if cfg["experiment"] != "smoothing_sweep":
        raise SystemExit("sweep requires a smoothing_sweep config")
    rows, reports, failures = run_smoothing_sweep(cfg)
    paths = emit_results(reports, failures, cfg, cfg["output"],
                         sweep_rows=rows)
    if not args.no_figures:
        paths += figures.render_sweep(rows, cfg["output"])
    for p in paths:
        print(p)
    for f in failures:
        print(f"FAILED cell {f.method} rep {f.replication}: {f.message}",
              file=sys.stderr)
    return 1 if failures else 0


def cmd_oracle(args) -> int:
    cfg = _base_config(args)
    kit = ExperimentKit(cfg)
    if args.grid:
        lo, hi, n = args.grid
        grid = np.linspace(lo, hi, int(n))
    else:
        grid = kit.grid()
    price, delta, gamma = kit.oracle_on_grid(grid)
    cols = "spot,price,delta" + (",gamma" if gamma is not None else "")
    print(cols)
    for i, s in enumerate(grid):
        row = f"{s:.12g},{price[i]:.12g},{delta[i]:.12g}"
        if gamma is not None:
            row += f",{gamma[i]:.12g}"
        print(row)
    return 0


def cmd_selftest(args) -> int:
    results = []
    results += checks.unbiasedness_checks(n_samples=args.samples)
    results += checks.bias_exhibit_checks()
    results += checks.gradient_checks(n_configs=args.grad_configs)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.detail}")
        failed += 0 if r.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dmlab",
        description="differential ML option-pricing experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config")
    _add_common(p_run)
    p_run.add_argument("--method", help="comma-separated method override")
    p_run.add_argument("--no-figures", action="store_true")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the smoothing sweep")
    _add_common(p_sweep)
    p_sweep.add_argument("--no-figures", action="store_true")
    p_sweep.set_defaults(func=cmd_sweep, experiment="smoothing_sweep")

    p_oracle = sub.add_parser("oracle", help="print oracle values on a grid")
    _add_common(p_oracle)
    p_oracle.add_argument("--grid", nargs=3, type=float,
                          metavar=("LO", "HI", "N"))
    p_oracle.set_defaults(func=cmd_oracle)

    p_self = sub.add_parser("selftest", help="estimator and gradient suites")
    p_self.add_argument("--samples", type=int, default=1_000_000)
    p_self.add_argument("--grad-configs", type=int, default=100)
    p_self.set_defaults(func=cmd_selftest)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
