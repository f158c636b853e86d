"""Curves with mean +- std bands from walkgossip metrics CSVs.

Input files follow the ``walkgossip-csv v1`` layout: ``#`` comment lines,
one header row, then long-format records with one row per (run, eval
point). Runs inside a group are aligned by evaluation-point index; the
band half-width at each point is the population standard deviation of the
y values across the group's runs (x is averaged, which is exact for the
shared ``t``/``B`` grids and gives the mean checkpoint time for ``Z``).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

X_COLUMNS = ("t", "Z", "B")
Y_COLUMNS = ("loss", "grad_norm")


class PlotError(ValueError):
    """Bad figure spec or input CSVs."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: axes, grouping columns, and the output image path."""

    x: str = "t"
    y: str = "loss"
    group_by: tuple = ("algo",)
    out: str = "figure.png"
    title: str | None = None
    log_y: bool = True

    def __post_init__(self):
        if self.x not in X_COLUMNS:
            raise PlotError(f"x axis must be one of {X_COLUMNS}, got {self.x!r}")
        if self.y not in Y_COLUMNS:
            raise PlotError(f"y axis must be one of {Y_COLUMNS}, got {self.y!r}")
        if not self.group_by:
            raise PlotError("group_by needs at least one column")


@dataclass
class GroupCurve:
    """Aggregated curve for one group: per-point x, mean, and std across runs."""

    key: tuple
    x: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    n_runs: int = field(default=0)


def read_rows(csv_paths):
    """Data rows from one or more metrics CSVs, comments stripped."""
    paths = list(csv_paths)
    if not paths:
        raise PlotError("no input CSV files given")
    rows = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
        rows.extend(csv.DictReader(lines))
    if not rows:
        raise PlotError(f"no data rows in {', '.join(str(p) for p in paths)}")
    return rows


def _require_columns(rows, needed):
    have = rows[0].keys()
    missing = [c for c in needed if c not in have]
    if missing:
        raise PlotError(f"missing CSV columns: {', '.join(missing)}")


def aggregate(rows, spec: FigureSpec):
    """One GroupCurve per group_by value combination.

    Runs are identified by ``run_id``; their records are sorted by ``t``
    and aligned by index, so every run in a group must have the same number
    of evaluation points.
    """
    _require_columns(rows, [spec.x, spec.y, "run_id", "t", *spec.group_by])
    groups: dict[tuple, dict[str, list]] = {}
    for row in rows:
        key = tuple(row[c] for c in spec.group_by)
        groups.setdefault(key, {}).setdefault(row["run_id"], []).append(row)
    curves = []
    for key in sorted(groups):
        runs = []
        for run_id, rs in sorted(groups[key].items()):
            rs = sorted(rs, key=lambda r: int(r["t"]))
            runs.append((
                np.array([float(r[spec.x]) for r in rs]),
                np.array([float(r[spec.y]) for r in rs]),
            ))
        lengths = {len(x) for x, _ in runs}
        if len(lengths) != 1:
            raise PlotError(f"group {key}: runs have differing record counts {sorted(lengths)}")
        xs = np.stack([x for x, _ in runs])
        ys = np.stack([y for _, y in runs])
        curves.append(GroupCurve(key=key, x=xs.mean(axis=0), mean=ys.mean(axis=0),
                                 std=ys.std(axis=0), n_runs=len(runs)))
    return curves


def plot(csv_paths, spec: FigureSpec):
    """Render one image for the spec; returns the aggregated curves drawn."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    curves = aggregate(read_rows(csv_paths), spec)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for curve in curves:
        label = ", ".join(f"{c}={v}" for c, v in zip(spec.group_by, curve.key))
        (line,) = ax.plot(curve.x, curve.mean, label=label)
        ax.fill_between(curve.x, curve.mean - curve.std, curve.mean + curve.std,
                        color=line.get_color(), alpha=0.25, linewidth=0)
    xlabel = {"t": "iterations", "Z": "simulated time", "B": "transmitted bits"}
    ax.set_xlabel(xlabel[spec.x])
    ax.set_ylabel(spec.y.replace("_", " "))
    if spec.log_y:
        ax.set_yscale("log")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.out, dpi=150)
    plt.close(fig)
    return curves
