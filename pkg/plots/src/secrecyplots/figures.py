"""Rendering of sweep summary tables as multi-series line figures.

The simulation harness aggregates each parameter sweep into a summary CSV
with one row per (scheme, sweep value): means and standard errors of the
sum secrecy rate and of the positive-secrecy percentage. This module turns
such tables into the four standard figures, one error-bar series per scheme.
A single summary file may hold rows from several sweeps; each figure reads
only the rows of its own axis.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "secrecyplots"

import matplotlib.pyplot as plt
import numpy as np

# Layout columns every summary must have; metric columns are checked per figure.
REQUIRED_COLUMNS = ("scheme", "sweep_axis", "sweep_value", "n_realizations")

# Fixed labels and markers for the scheme names the harness emits. Unknown
# schemes keep their raw name and draw a fallback marker by series position.
SCHEME_STYLE = {
    "proposed": ("Proposed", "o"),
    "br_assoc": ("Best-response association", "s"),
    "greedy_assoc": ("Greedy association", "^"),
    "adapted_greedy": ("Adapted greedy", "D"),
    "maxmin_sinr": ("Max-min SINR power", "v"),
    "max_sumrate": ("Max sum rate power", "P"),
}
_PRESET_ORDER = tuple(SCHEME_STYLE)
_FALLBACK_MARKERS = ("X", "*", "<", ">", "p", "h")

# Colors bind to series position, so a given set of scheme names always
# renders with the same assignment.
PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
)

# figure name -> (x key, x unit, x label, y key, y label)
FIGURE_AXES = {
    "fig3": (
        "gamma0_db", "db", "SINR floor (dB)",
        "sum_secrecy_rate_mean", "Average sum secrecy rate (bits/s/Hz)",
    ),
    "fig4": (
        "n_nodes", "count", "Number of nodes",
        "positive_secrecy_pct_mean", "Nodes with positive secrecy rate (%)",
    ),
    "fig5": (
        "gamma_p_db", "db", "Per-UAV transmit SNR budget (dB)",
        "sum_secrecy_rate_mean", "Average sum secrecy rate (bits/s/Hz)",
    ),
    "fig6": (
        "gamma_p_db", "db", "Per-UAV transmit SNR budget (dB)",
        "positive_secrecy_pct_mean", "Nodes with positive secrecy rate (%)",
    ),
}


class MissingColumnError(ValueError):
    """A referenced column is absent from the summary CSV header."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure: which axis to read, which metric to draw, where to save."""

    summary_path: Path
    x_key: str  # sweep axis name selecting this figure's rows
    x_unit: str  # "db" or "count", axis labeling only
    x_label: str
    y_key: str  # mean column to plot; its _stderr twin gives the error bars
    y_label: str
    out_path: Path
    schemes: tuple = ()  # (name, label, marker) triples; () derives them from the CSV

    def __post_init__(self) -> None:
        if self.x_unit not in ("db", "count"):
            raise ValueError("x_unit must be 'db' or 'count'")

    @property
    def stderr_key(self) -> str:
        return self.y_key.replace("_mean", "_stderr")


def figure_spec(name: str, summary_path, out_path=None, schemes=()) -> FigureSpec:
    """Spec for one of the four standard figures."""
    if name not in FIGURE_AXES:
        raise ValueError(f"unknown figure {name!r}, expected one of {sorted(FIGURE_AXES)}")
    x_key, x_unit, x_label, y_key, y_label = FIGURE_AXES[name]
    if out_path is None:
        out_path = Path(f"{name}.svg")
    return FigureSpec(
        summary_path=Path(summary_path),
        x_key=x_key,
        x_unit=x_unit,
        x_label=x_label,
        y_key=y_key,
        y_label=y_label,
        out_path=Path(out_path),
        schemes=tuple(schemes),
    )


def load_summary(path, required=()) -> list[dict]:
    """Parse a summary CSV into row dicts, converting the numeric fields.

    Raises MissingColumnError naming the first absent column.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or ()
        for col in (*REQUIRED_COLUMNS, *required):
            if col not in header:
                raise MissingColumnError(f"{path} has no column {col!r}")
        rows = []
        for raw in reader:
            row = dict(raw)
            row["sweep_value"] = float(raw["sweep_value"])
            row["n_realizations"] = int(raw["n_realizations"])
            for col in header:
                if col.endswith("_mean") or col.endswith("_stderr"):
                    row[col] = float(raw[col])
            rows.append(row)
    if not rows:
        raise ValueError(f"{path} has no data rows")
    return rows


def scheme_styles(names) -> tuple:
    """Deterministic (name, label, marker) triples for a set of scheme names.

    Known presets come first in their fixed order, anything else follows
    alphabetically, so series order depends only on which names are present.
    """
    present = set(names)
    ordered = [n for n in _PRESET_ORDER if n in present]
    ordered += sorted(present - set(_PRESET_ORDER))
    triples = []
    for i, name in enumerate(ordered):
        label, marker = SCHEME_STYLE.get(
            name, (name, _FALLBACK_MARKERS[i % len(_FALLBACK_MARKERS)])
        )
        triples.append((name, label, marker))
    return tuple(triples)


def build_figure(spec: FigureSpec):
    """Assemble the figure; returns (figure, drawn series keyed by label).

    A scheme with no rows on this figure's axis is skipped with a warning.
    The caller owns the figure and should close it.
    """
    rows = load_summary(spec.summary_path, required=(spec.y_key, spec.stderr_key))
    axis_rows = [r for r in rows if r["sweep_axis"] == spec.x_key]
    schemes = spec.schemes or scheme_styles(r["scheme"] for r in rows)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    drawn = {}
    for i, (name, label, marker) in enumerate(schemes):
        series = sorted(
            (r for r in axis_rows if r["scheme"] == name),
            key=lambda r: r["sweep_value"],
        )
        if not series:
            warnings.warn(
                f"scheme {name!r} has no rows for axis {spec.x_key!r}; series skipped"
            )
            continue
        x = np.array([r["sweep_value"] for r in series])
        y = np.array([r[spec.y_key] for r in series])
        err = np.array([r[spec.stderr_key] for r in series])
        ax.errorbar(
            x, y, yerr=err,
            color=PALETTE[i % len(PALETTE)], marker=marker, markersize=5.0,
            capsize=3.0, label=label,
        )
        drawn[label] = (x, y, err)

    ax.set_xlabel(spec.x_label)
    ax.set_ylabel(spec.y_label)
    ax.grid(True, alpha=0.3)
    if drawn:
        ax.legend()
    fig.tight_layout()
    return fig, drawn


def extract_series(ax) -> dict:
    """Read back the numbers actually drawn on the axes, keyed by legend label.

    Error bar half-heights are reconstructed from the bar segments, so they
    round-trip through one addition and one subtraction.
    """
    found = {}
    for container in ax.containers:
        data_line, _, barlinecols = container.lines
        segments = barlinecols[0].get_segments()
        x = np.asarray(data_line.get_xdata(), dtype=float)
        y = np.asarray(data_line.get_ydata(), dtype=float)
        err = np.array([(seg[1, 1] - seg[0, 1]) / 2.0 for seg in segments])
        found[container.get_label()] = (x, y, err)
    return found


def verify_figure(ax, drawn) -> None:
    """Cross-check the rendered artists against the series they came from.

    Points must match exactly; error bars to 1e-9 relative (reconstruction
    is not bitwise, see extract_series).
    """
    found = extract_series(ax)
    if set(found) != set(drawn):
        raise AssertionError(
            f"rendered series {sorted(found)} != requested {sorted(drawn)}"
        )
    for label, (x, y, err) in drawn.items():
        fx, fy, ferr = found[label]
        if not (np.array_equal(fx, x) and np.array_equal(fy, y)):
            raise AssertionError(f"series {label!r} does not match its source data")
        if not np.allclose(ferr, err, rtol=1e-9, atol=0.0):
            raise AssertionError(f"error bars of {label!r} do not match their source data")


def render_figure(spec: FigureSpec) -> Path:
    """Render one spec to disk and return the output path.

    The drawn artists are re-read and compared against the source series
    before saving, so a figure that reaches disk is known to plot the CSV
    numbers unchanged. SVG output omits the creation date, making the bytes
    a pure function of the input table.
    """
    fig, drawn = build_figure(spec)
    try:
        verify_figure(fig.axes[0], drawn)
        spec.out_path.parent.mkdir(parents=True, exist_ok=True)
        metadata = {"Date": None} if spec.out_path.suffix == ".svg" else None
        fig.savefig(spec.out_path, metadata=metadata)
    finally:
        plt.close(fig)
    return spec.out_path
