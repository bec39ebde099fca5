"""Regenerate the packaged example summary from a desk-scale sweep run.

Runs the simulation harness over all three sweep axes at a reduced
realization count and concatenates the aggregates into one summary CSV.
Needs the simulation package installed; the plotting package itself does
not depend on it at runtime.
"""

from dataclasses import replace
from pathlib import Path

from uavsecsim.harness import (
    ExperimentConfig,
    aggregate,
    run_experiment,
    write_summary_csv,
)

OUT = Path(__file__).resolve().parents[1] / "src" / "secrecyplots" / "fixtures" / "summary.csv"


def main() -> None:
    base = ExperimentConfig(realizations=3)
    sweeps = (
        replace(base, sweep_axis="gamma0_db", sweep_values=(-20.0, 0.0, 20.0)),
        replace(base, sweep_axis="n_nodes", sweep_values=(20, 40, 60)),
        replace(base, sweep_axis="gamma_p_db", sweep_values=(-10.0, 5.0, 20.0)),
    )
    summary = []
    for cfg in sweeps:
        summary.extend(aggregate(run_experiment(cfg)))
    OUT.parent.mkdir(parents=True, exist_ok=True)
    write_summary_csv(summary, OUT)
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
