"""Command line front end: run experiments, aggregate results, dump one demo run."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .framework import certify_equilibrium, run_bca, scheme_config
from .harness import (
    ExperimentConfig,
    aggregate,
    derive_stream,
    parse_config,
    read_results_csv,
    run_experiment,
    sample_cell_scenario,
    write_results_csv,
    write_summary_csv,
)
from .positioning import deployment_rows
from .power import secure_allocate
from .radio import build_snapshot, write_snapshot_csv


def _cmd_run(args: argparse.Namespace) -> int:
    config = parse_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        from dataclasses import replace

        config = replace(config, master_seed=args.seed)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / ".write_probe"
    try:
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output path not writable: {exc}", file=sys.stderr)
        return 2

    rows = run_experiment(config, workers=args.workers)
    write_results_csv(rows, out_dir / "results.csv")
    write_summary_csv(aggregate(rows), out_dir / "summary.csv")
    print(f"wrote {len(rows)} result rows to {out_dir / 'results.csv'}")
    print(f"wrote summary to {out_dir / 'summary.csv'}")
    return 0


def _cmd_aggregate(args: argparse.Namespace) -> int:
    rows = []
    for path in args.results:
        rows.extend(read_results_csv(path))
    write_summary_csv(aggregate(rows), args.out)
    print(f"wrote summary of {len(rows)} rows to {args.out}")
    return 0


def _cmd_demo(args: argparse.Namespace) -> int:
    config = parse_config(args.config) if args.config else ExperimentConfig()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    value = config.sweep_values[0]
    cell_cfg = config.at_sweep_value(value)
    scenario = sample_cell_scenario(cell_cfg, value, 0)
    rng = derive_stream(config.master_seed, config.sweep_axis, value, 0, "bca")
    record = run_bca(
        scenario,
        cell_cfg.system_params(),
        scheme_config(args.scheme, cell_cfg.bca_config()),
        rng,
        record_f_trace=True,
    )

    (out_dir / "scenario.txt").write_text(scenario.to_text())
    with open(out_dir / "deployment.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("uav", "x", "y", "z"))
        writer.writerows(deployment_rows(record.state))
    with open(out_dir / "iterations.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("iteration", "sum_secrecy_rate", "positive_secrecy_pct",
                         "assoc_rounds", "alt_rounds"))
        writer.writerows(record.iteration_rows())
    write_snapshot_csv(build_snapshot(record.state), out_dir / "snapshot.csv")

    trace: list = []
    secure_allocate(record.state, cell_cfg.bca_config().power_config, trace=trace)
    with open(out_dir / "power_trace.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("sweep", "uav", "subchannel", "node", "floor", "topup", "fallback",
                         "gamma_s"))
        for entry in trace:
            for c, n, floor, topup in zip(
                entry.channels, entry.nodes, entry.floor, entry.topup
            ):
                writer.writerow(
                    [entry.sweep, entry.uav, int(c), int(n), repr(float(floor)),
                     repr(float(topup)), int(entry.fallback), repr(float(entry.gamma_s))]
                )

    report = certify_equilibrium(record.state)
    print(f"scheme: {args.scheme}")
    print(f"uavs: {record.n_uavs}  legit: {scenario.n_legit}  eave: {scenario.n_eave}")
    print(f"iterations executed: {record.iterations_executed}"
          f"  settled: {record.bca_converged}")
    print(f"sum secrecy rate: {record.final_sum_rate:.4f} bits/s/Hz")
    print(f"positive-secrecy nodes: {record.final_positive_fraction:.1f}%")
    print(f"equilibrium clean: {report.ok}")
    print(f"artifacts in {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uavsecsim",
        description="Monte Carlo experiments for secure IoT uplinks served by UAVs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep and write results.csv + summary.csv")
    p_run.add_argument("--config", help="flat key = value parameter file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override the master seed")
    p_run.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p_run.set_defaults(fn=_cmd_run)

    p_agg = sub.add_parser("aggregate", help="aggregate one or more results.csv files")
    p_agg.add_argument("results", nargs="+", help="results.csv paths")
    p_agg.add_argument("--out", required=True, help="summary.csv path")
    p_agg.set_defaults(fn=_cmd_aggregate)

    p_demo = sub.add_parser("demo", help="run one realization and dump its artifacts")
    p_demo.add_argument("--config", help="flat key = value parameter file")
    p_demo.add_argument("--out", required=True, help="output directory")
    p_demo.add_argument("--scheme", default="proposed", help="scheme preset name")
    p_demo.set_defaults(fn=_cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
