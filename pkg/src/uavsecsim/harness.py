"""Monte Carlo experiment harness with a paired design across schemes.

Every (sweep value, realization) cell owns two derived random streams, one
for the scenario draw and one for the pipeline; every scheme replays the
same pipeline stream, so all schemes see the identical scenario and the
identical initial deployment and differ only through their own decisions.
Streams are derived by hashing (master seed, axis, value, realization, tag),
which keeps cells independent of execution order and worker count.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import EnvParams
from .framework import BcaConfig, SystemParams, run_bca, scheme_config
from .power import PowerConfig
from .scenario import EmptyLegitimateSetError, Region, sample_scenario

SWEEP_AXES = ("gamma0_db", "n_nodes", "gamma_p_db")

DEFAULT_SCHEMES = ("proposed", "br_assoc", "greedy_assoc", "adapted_greedy")

RESULT_COLUMNS = (
    "scheme",
    "sweep_axis",
    "sweep_value",
    "realization",
    "sum_secrecy_rate",
    "positive_secrecy_pct",
    "assoc_rounds",
    "alt_rounds",
    "runtime_ms",
)

SUMMARY_COLUMNS = (
    "scheme",
    "sweep_axis",
    "sweep_value",
    "n_realizations",
    "sum_secrecy_rate_mean",
    "sum_secrecy_rate_stderr",
    "positive_secrecy_pct_mean",
    "positive_secrecy_pct_stderr",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Base parameters (defaults reproduce the reference setup) plus one sweep."""

    n_nodes: int = 80
    n_subchannels: int = 8
    n_it: int = 5
    gamma_p_db: float = 20.0
    q: float = 0.5
    x_min: float = 0.0
    x_max: float = 1000.0
    y_min: float = 0.0
    y_max: float = 1000.0
    z_min: float = 20.0
    z_max: float = 300.0
    n_z: int = 8
    psi: float = 9.61
    omega: float = 0.16
    eta_los: float = 1.0
    eta_nlos: float = 20.0
    alpha_j: float = 0.3
    alpha_g: float = 0.3
    gamma0_db: float = -10.0
    n_iter_pow: int = 3
    n_iter_bis: int = 50
    bisection_tol: float = 1e-6
    assoc_max_rounds: int = 10
    alt_max_rounds: int = 10
    power_each_iteration: bool = False
    sweep_axis: str = "gamma0_db"
    sweep_values: tuple = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    realizations: int = 200
    schemes: tuple = DEFAULT_SCHEMES
    master_seed: int = 1

    def __post_init__(self) -> None:
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError(f"sweep_axis must be one of {SWEEP_AXES}")
        if len(self.sweep_values) == 0:
            raise ValueError("sweep_values must be nonempty")
        if list(self.sweep_values) != sorted(self.sweep_values):
            raise ValueError("sweep_values must be sorted ascending")
        if self.realizations < 1:
            raise ValueError("need at least one realization")
        if not self.schemes:
            raise ValueError("need at least one scheme")

    def region(self) -> Region:
        return Region(
            self.x_min, self.x_max, self.y_min, self.y_max, self.z_min, self.z_max, self.n_z
        )

    def env(self) -> EnvParams:
        return EnvParams(
            psi=self.psi,
            omega=self.omega,
            eta_los=self.eta_los,
            eta_nlos=self.eta_nlos,
            alpha_j=self.alpha_j,
            alpha_g=self.alpha_g,
        )

    def at_sweep_value(self, value) -> "ExperimentConfig":
        """Config with the sweep axis pinned to one value."""
        if self.sweep_axis == "n_nodes":
            return replace(self, n_nodes=int(value))
        return replace(self, **{self.sweep_axis: float(value)})

    def system_params(self) -> SystemParams:
        return SystemParams(
            region=self.region(),
            env=self.env(),
            n_subchannels=self.n_subchannels,
            gamma_p=10.0 ** (self.gamma_p_db / 10.0),
        )

    def bca_config(self) -> BcaConfig:
        return BcaConfig(
            n_it=self.n_it,
            assoc_max_rounds=self.assoc_max_rounds,
            alt_max_rounds=self.alt_max_rounds,
            power_each_iteration=self.power_each_iteration,
            power_config=PowerConfig(
                gamma0=10.0 ** (self.gamma0_db / 10.0),
                n_iter_pow=self.n_iter_pow,
                n_iter_bis=self.n_iter_bis,
                gamma_s_tol=self.bisection_tol,
            ),
        )


@dataclass
class ResultRow:
    scheme: str
    sweep_axis: str
    sweep_value: float
    realization: int
    sum_secrecy_rate: float
    positive_secrecy_pct: float
    assoc_rounds: int
    alt_rounds: int
    runtime_ms: float


def derive_stream(*key) -> np.random.Generator:
    """Platform-independent generator from an arbitrary hashable key.

    The key's repr is SHA-256 hashed into seed words, so any (master seed,
    axis, value, realization, tag) tuple maps to its own PCG64 stream.
    """
    digest = hashlib.sha256(repr(key).encode("utf-8")).digest()
    words = np.frombuffer(digest, dtype=np.uint32)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words.tolist())))


def sample_cell_scenario(config: ExperimentConfig, value, realization: int):
    """Scenario for one cell, redrawing with the next sub-stream until nonempty."""
    region = config.region()
    for attempt in range(1000):
        rng = derive_stream(config.master_seed, config.sweep_axis, value, realization,
                            "scenario", attempt)
        scenario = sample_scenario(region, config.n_nodes, config.q, rng)
        if scenario.n_legit >= 1:
            return scenario
    raise EmptyLegitimateSetError("could not draw a scenario with legitimate nodes")


def run_cell(config: ExperimentConfig, value, realization: int) -> list[ResultRow]:
    """Run every scheme on one (sweep value, realization) cell."""
    cell_cfg = config.at_sweep_value(value)
    scenario = sample_cell_scenario(cell_cfg, value, realization)
    params = cell_cfg.system_params()
    base = cell_cfg.bca_config()

    rows = []
    for scheme in config.schemes:
        rng = derive_stream(config.master_seed, config.sweep_axis, value, realization, "bca")
        t0 = time.perf_counter()
        record = run_bca(scenario, params, scheme_config(scheme, base), rng)
        elapsed_ms = (time.perf_counter() - t0) * 1e3
        upto = record.iterations_executed
        rows.append(
            ResultRow(
                scheme=scheme,
                sweep_axis=config.sweep_axis,
                sweep_value=float(value),
                realization=realization,
                sum_secrecy_rate=record.final_sum_rate,
                positive_secrecy_pct=record.final_positive_fraction,
                assoc_rounds=int(record.assoc_rounds[:upto].max(initial=0)),
                alt_rounds=int(record.alt_rounds[:upto].max(initial=0)),
                runtime_ms=elapsed_ms,
            )
        )
    return rows


def _run_cell_task(args) -> tuple[tuple[int, int], list[ResultRow]]:
    config, value_idx, value, realization = args
    return (value_idx, realization), run_cell(config, value, realization)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list[ResultRow]:
    """All cells of the sweep, rows in (value, realization, scheme) order."""
    tasks = [
        (config, vi, value, r)
        for vi, value in enumerate(config.sweep_values)
        for r in range(config.realizations)
    ]
    if workers <= 1:
        keyed = [_run_cell_task(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            keyed = list(pool.map(_run_cell_task, tasks, chunksize=4))
    keyed.sort(key=lambda kr: kr[0])
    rows: list[ResultRow] = []
    for _, cell_rows in keyed:
        rows.extend(cell_rows)
    return rows


@dataclass
class SummaryRow:
    scheme: str
    sweep_axis: str
    sweep_value: float
    n_realizations: int
    sum_secrecy_rate_mean: float
    sum_secrecy_rate_stderr: float
    positive_secrecy_pct_mean: float
    positive_secrecy_pct_stderr: float


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if len(values) < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / np.sqrt(len(values)))


def aggregate(rows: list[ResultRow]) -> list[SummaryRow]:
    """Mean and standard error of both metrics per (scheme, axis, value)."""
    groups: dict[tuple, list[ResultRow]] = {}
    order: list[tuple] = []
    for row in rows:
        key = (row.scheme, row.sweep_axis, row.sweep_value)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)

    out = []
    for key in order:
        block = groups[key]
        rates = np.array([r.sum_secrecy_rate for r in block])
        pcts = np.array([r.positive_secrecy_pct for r in block])
        rate_mean, rate_se = _mean_stderr(rates)
        pct_mean, pct_se = _mean_stderr(pcts)
        out.append(
            SummaryRow(
                scheme=key[0],
                sweep_axis=key[1],
                sweep_value=key[2],
                n_realizations=len(block),
                sum_secrecy_rate_mean=rate_mean,
                sum_secrecy_rate_stderr=rate_se,
                positive_secrecy_pct_mean=pct_mean,
                positive_secrecy_pct_stderr=pct_se,
            )
        )
    return out


def write_results_csv(rows: list[ResultRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.scheme,
                    r.sweep_axis,
                    repr(r.sweep_value),
                    r.realization,
                    repr(r.sum_secrecy_rate),
                    repr(r.positive_secrecy_pct),
                    r.assoc_rounds,
                    r.alt_rounds,
                    f"{r.runtime_ms:.3f}",
                ]
            )


def read_results_csv(path: str | Path) -> list[ResultRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RESULT_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"results file lacks columns: {sorted(missing)}")
        for rec in reader:
            rows.append(
                ResultRow(
                    scheme=rec["scheme"],
                    sweep_axis=rec["sweep_axis"],
                    sweep_value=float(rec["sweep_value"]),
                    realization=int(rec["realization"]),
                    sum_secrecy_rate=float(rec["sum_secrecy_rate"]),
                    positive_secrecy_pct=float(rec["positive_secrecy_pct"]),
                    assoc_rounds=int(rec["assoc_rounds"]),
                    alt_rounds=int(rec["alt_rounds"]),
                    runtime_ms=float(rec["runtime_ms"]),
                )
            )
    return rows


def write_summary_csv(rows: list[SummaryRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.scheme,
                    r.sweep_axis,
                    repr(r.sweep_value),
                    r.n_realizations,
                    repr(r.sum_secrecy_rate_mean),
                    repr(r.sum_secrecy_rate_stderr),
                    repr(r.positive_secrecy_pct_mean),
                    repr(r.positive_secrecy_pct_stderr),
                ]
            )


# Flat key=value config file support ---------------------------------------

_INT_KEYS = {
    "n_nodes", "n_subchannels", "n_it", "n_z", "n_iter_pow", "n_iter_bis",
    "assoc_max_rounds", "alt_max_rounds", "realizations", "master_seed",
}
_FLOAT_KEYS = {
    "gamma_p_db", "q", "x_min", "x_max", "y_min", "y_max", "z_min", "z_max",
    "psi", "omega", "eta_los", "eta_nlos", "alpha_j", "alpha_g",
    "gamma0_db", "bisection_tol",
}
_BOOL_KEYS = {"power_each_iteration"}
_STR_KEYS = {"sweep_axis"}
_LIST_KEYS = {"sweep_values", "schemes"}


def parse_config(path: str | Path) -> ExperimentConfig:
    """Read a flat key = value file; '#' starts a comment, unknown keys fail."""
    overrides: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in _INT_KEYS:
                overrides[key] = int(value)
            elif key in _FLOAT_KEYS:
                overrides[key] = float(value)
            elif key in _BOOL_KEYS:
                if value.lower() not in ("true", "false"):
                    raise ValueError(f"{path}:{lineno}: {key} must be true or false")
                overrides[key] = value.lower() == "true"
            elif key in _STR_KEYS:
                overrides[key] = value
            elif key == "sweep_values":
                overrides[key] = tuple(float(v) for v in value.split(",") if v.strip())
            elif key == "schemes":
                overrides[key] = tuple(v.strip() for v in value.split(",") if v.strip())
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    cfg = ExperimentConfig(**overrides)
    if cfg.sweep_axis == "n_nodes":
        cfg = replace(cfg, sweep_values=tuple(int(v) for v in cfg.sweep_values))
    return cfg
