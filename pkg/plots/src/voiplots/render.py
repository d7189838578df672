"""Pure renderer for the simulator's CSV outputs.

Reads selection.csv (policy,sensor,count) and cdf.csv
(policy,statistic,error,cum_fraction) and draws grouped selection-frequency
bars and per-statistic error CDF step curves. Nothing is recomputed from
the simulation; the files are the contract, and any schema drift raises
SchemaError naming the offending header.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SELECTION_HEADER = ["policy", "sensor", "count"]
CDF_HEADER = ["policy", "statistic", "error", "cum_fraction"]

FIGSIZE = (8.0, 4.5)
DPI = 120


class SchemaError(ValueError):
    """CSV input does not match the documented schema."""


@dataclass
class PlotJob:
    input_dir: str
    output_dir: str
    fmt: str = "svg"
    policies: list[str] | None = None
    statistics: list[str] | None = None

    def __post_init__(self):
        if self.fmt not in ("svg", "png"):
            raise ValueError(f"unsupported figure format {self.fmt!r}")


def _read_rows(path: str, expected_header: list[str]) -> list[dict[str, str]]:
    if not os.path.exists(path):
        raise SchemaError(f"missing input file {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header "
                              f"{','.join(expected_header)}") from None
        if header != expected_header:
            raise SchemaError(f"{path}: bad header {','.join(header)!r}, "
                              f"expected {','.join(expected_header)!r}")
        rows = [dict(zip(expected_header, row)) for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def load_selection(path: str) -> dict[str, np.ndarray]:
    """Per-policy selection fractions indexed by sensor (position 0 = sensor 1)."""
    rows = _read_rows(path, SELECTION_HEADER)
    counts: dict[str, dict[int, int]] = {}
    for row in rows:
        try:
            sensor = int(row["sensor"])
            count = int(row["count"])
        except (ValueError, TypeError):
            raise SchemaError(f"{path}: non-integer row {row}") from None
        counts.setdefault(row["policy"], {})[sensor] = count
    n = max(max(c) for c in counts.values())
    out = {}
    for policy, per_sensor in counts.items():
        vec = np.zeros(n)
        for sensor, count in per_sensor.items():
            if not 1 <= sensor <= n:
                raise SchemaError(f"{path}: sensor {sensor} out of range")
            vec[sensor - 1] = count
        total = vec.sum()
        out[policy] = vec / total if total > 0 else vec
    return out


def load_cdfs(path: str) -> dict[str, dict[str, tuple[np.ndarray, np.ndarray]]]:
    """Nested statistic -> policy -> (errors, cumulative fractions)."""
    rows = _read_rows(path, CDF_HEADER)
    curves: dict[str, dict[str, list[tuple[float, float]]]] = {}
    for row in rows:
        try:
            err = float(row["error"])
            frac = float(row["cum_fraction"])
        except (ValueError, TypeError):
            raise SchemaError(f"{path}: non-numeric row {row}") from None
        curves.setdefault(row["statistic"], {}).setdefault(row["policy"], []) \
            .append((err, frac))
    out: dict[str, dict[str, tuple[np.ndarray, np.ndarray]]] = {}
    for stat, per_policy in curves.items():
        out[stat] = {}
        for policy, pairs in per_policy.items():
            errors = np.array([p[0] for p in pairs])
            fractions = np.array([p[1] for p in pairs])
            if np.any(np.diff(errors) < 0) or np.any(np.diff(fractions) < 0):
                raise SchemaError(f"{path}: CDF rows for ({policy}, {stat}) "
                                  f"are not sorted")
            if fractions.size and not (0 < fractions[0] <= 1 and
                                       abs(fractions[-1] - 1.0) < 1e-9):
                raise SchemaError(f"{path}: CDF for ({policy}, {stat}) does "
                                  f"not end at 1")
            out[stat][policy] = (errors, fractions)
    return out


def _filtered(names, wanted, what):
    if wanted is None:
        return list(names)
    missing = [w for w in wanted if w not in names]
    if missing:
        raise SchemaError(f"requested {what} not present in input: {missing}")
    return [w for w in wanted]


def _save(fig, path: str, fmt: str) -> None:
    # fixed metadata keeps reruns byte-identical
    if fmt == "svg":
        fig.savefig(path, format="svg", metadata={"Date": None})
    else:
        fig.savefig(path, format="png", dpi=DPI)
    plt.close(fig)


def plot_selection(job: PlotJob) -> dict[str, np.ndarray]:
    """Grouped selection-frequency bars; returns the plotted fractions."""
    fractions = load_selection(os.path.join(job.input_dir, "selection.csv"))
    policies = _filtered(fractions, job.policies, "policies")
    n = fractions[policies[0]].shape[0]
    os.makedirs(job.output_dir, exist_ok=True)

    with plt.rc_context({"svg.hashsalt": "voiplots"}):
        fig, ax = plt.subplots(figsize=FIGSIZE)
        width = 0.8 / len(policies)
        x = np.arange(1, n + 1)
        for i, policy in enumerate(policies):
            offset = (i - (len(policies) - 1) / 2) * width
            ax.bar(x + offset, fractions[policy], width=width, label=policy)
        ax.set_xlabel("sensor")
        ax.set_ylabel("selection fraction")
        ax.set_xticks(x)
        ax.legend()
        _save(fig, os.path.join(job.output_dir, f"selection.{job.fmt}"), job.fmt)
    return {p: fractions[p] for p in policies}


def plot_cdfs(job: PlotJob) -> dict[str, dict[str, tuple[np.ndarray, np.ndarray]]]:
    """One step-curve figure per statistic; returns the plotted curves."""
    curves = load_cdfs(os.path.join(job.input_dir, "cdf.csv"))
    statistics = _filtered(curves, job.statistics, "statistics")
    os.makedirs(job.output_dir, exist_ok=True)

    plotted: dict[str, dict[str, tuple[np.ndarray, np.ndarray]]] = {}
    with plt.rc_context({"svg.hashsalt": "voiplots"}):
        for stat in statistics:
            per_policy = curves[stat]
            policies = _filtered(per_policy, job.policies, "policies")
            fig, ax = plt.subplots(figsize=FIGSIZE)
            for policy in policies:
                errors, fractions = per_policy[policy]
                ax.step(errors, fractions, where="post", label=policy)
            ax.set_xlabel(f"nu_{stat}")
            ax.set_ylabel("cumulative fraction")
            ax.set_ylim(0.0, 1.02)
            ax.legend()
            _save(fig, os.path.join(job.output_dir, f"cdf_{stat}.{job.fmt}"),
                  job.fmt)
            plotted[stat] = {p: per_policy[p] for p in policies}
    return plotted


def render_all(job: PlotJob) -> list[str]:
    """Render every figure; returns the written paths."""
    plot_selection(job)
    plotted = plot_cdfs(job)
    paths = [os.path.join(job.output_dir, f"selection.{job.fmt}")]
    paths += [os.path.join(job.output_dir, f"cdf_{stat}.{job.fmt}")
              for stat in plotted]
    return paths
