"""Render the two figure families from a simulation CSV.

es_comparison: optimized per-owner objective vs sensitive-set size, with the
uniform baseline as a horizontal reference. mdrq_bounds: empirical mean
squared error (points) and the analytic bound (line) vs epsilon, log-scale y.

Rendering is a pure function of the CSV; the input file is never modified.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

KINDS = ("es_comparison", "mdrq_bounds")

REQUIRED_COLUMNS = {
    "task",
    "epsilon",
    "D",
    "D_R",
    "m",
    "n",
    "trials",
    "empirical_mse",
    "analytic_bound",
    "wall_time_ms",
}


class PlotError(Exception):
    """Raised for unusable input: bad kind, missing columns, no data."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    kind: str
    out_path: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")


def load_rows(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = set(reader.fieldnames or ())
        missing = REQUIRED_COLUMNS - header
        if missing:
            raise PlotError(f"missing columns: {', '.join(sorted(missing))}")
        rows = [
            {
                "task": rec["task"],
                "epsilon": float(rec["epsilon"]),
                "D": int(rec["D"]),
                "D_R": int(rec["D_R"]),
                "m": int(rec["m"]),
                "n": int(rec["n"]),
                "trials": int(rec["trials"]),
                "empirical_mse": float(rec["empirical_mse"]),
                "analytic_bound": float(rec["analytic_bound"]),
            }
            for rec in reader
        ]
    if not rows:
        raise PlotError("no data rows")
    return rows


def _render_es_comparison(rows, out_path):
    rows = [r for r in rows if r["task"] == "es_comparison"] or rows
    rows = sorted(rows, key=lambda r: r["D_R"])  # sensitive-set size column
    sizes = [r["D_R"] for r in rows]
    objectives = [r["empirical_mse"] for r in rows]
    baseline = rows[0]["analytic_bound"]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(sizes, objectives, "o-", label="optimized objective")
    ax.axhline(baseline, color="gray", linestyle="--", label="uniform baseline")
    ax.set_xlabel("sensitive-set size")
    ax.set_ylabel("total expected squared error per owner batch")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def _render_mdrq_bounds(rows, out_path):
    by_eps: dict[float, list[dict]] = {}
    for r in rows:
        by_eps.setdefault(r["epsilon"], []).append(r)
    epsilons = sorted(by_eps)
    bounds = [max(r["analytic_bound"] for r in by_eps[e]) for e in epsilons]
    fig, ax = plt.subplots(figsize=(6, 4))
    markers = {"frequency": "o", "range": "s"}
    tasks = sorted({r["task"] for r in rows})
    for task in tasks:
        xs = [r["epsilon"] for r in rows if r["task"] == task]
        ys = [r["empirical_mse"] for r in rows if r["task"] == task]
        ax.plot(xs, ys, markers.get(task, "x"), linestyle="none", label=task)
    ax.plot(epsilons, bounds, "-", color="black", label="analytic bound")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("mean squared error")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render(spec: PlotSpec) -> str:
    """Render the figure and return the output path."""
    rows = load_rows(spec.csv_path)
    if spec.kind == "es_comparison":
        _render_es_comparison(rows, spec.out_path)
    else:
        _render_mdrq_bounds(rows, spec.out_path)
    return spec.out_path
