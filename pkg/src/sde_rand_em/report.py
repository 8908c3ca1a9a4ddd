"""Result persistence: delimited per-point output, key:value summaries, figures.

Floating-point fields are serialised with 17 significant digits so parsing an
emitted file and re-serialising it reproduces the bytes exactly.  Figures are
rendered with matplotlib next to the delimited output when requested.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CSV_COLUMNS = ("n", "scheme", "p", "estimate", "std_error", "M", "master_seed")


def format_float(x: float) -> str:
    """Lossless decimal form of a double (17 significant digits)."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ResultRow:
    """One ladder point in the delimited output."""

    n: int
    scheme: str
    p: float
    estimate: float
    std_error: float
    samples: int
    master_seed: int


def write_csv(path: Path, rows: list[ResultRow]) -> None:
    """Write rows sorted by (scheme, n); the header is always present."""
    ordered = sorted(rows, key=lambda r: (r.scheme, r.n))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in ordered:
            writer.writerow(
                [
                    str(row.n),
                    row.scheme,
                    format_float(row.p),
                    format_float(row.estimate),
                    format_float(row.std_error),
                    str(row.samples),
                    str(row.master_seed),
                ]
            )


def read_csv(path: Path) -> list[ResultRow]:
    """Parse a file produced by ``write_csv`` back into typed rows."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected header {header}, want {list(CSV_COLUMNS)}")
        rows = [
            ResultRow(
                n=int(rec[0]),
                scheme=rec[1],
                p=float(rec[2]),
                estimate=float(rec[3]),
                std_error=float(rec[4]),
                samples=int(rec[5]),
                master_seed=int(rec[6]),
            )
            for rec in reader
        ]
    return rows


def write_summary(path: Path, entries: list[tuple[str, object]]) -> None:
    """Line-oriented ``key: value`` report; floats get the lossless form."""
    with open(path, "w") as fh:
        for key, value in entries:
            if isinstance(value, float):
                value = format_float(value)
            fh.write(f"{key}: {value}\n")


def read_summary(path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        if ": " in line:
            key, value = line.split(": ", 1)
            out[key] = value
    return out


def render_ladder_figure(
    path: Path,
    series: list[dict],
    title: str,
    xlabel: str = "n",
    ylabel: str = "error",
) -> None:
    """Log-log error-vs-resolution figure with fitted lines.

    Each series is a dict with keys ``label``, ``ns``, ``estimates`` and
    optionally ``std_errors`` and ``fit`` (an OrderFit).  Series whose
    estimates are not strictly positive are drawn without a fitted line.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for entry in series:
        ns = np.asarray(entry["ns"], dtype=float)
        est = np.asarray(entry["estimates"], dtype=float)
        ses = entry.get("std_errors")
        label = entry["label"]
        if np.all(est > 0):
            if ses is not None:
                ax.errorbar(ns, est, yerr=1.96 * np.asarray(ses), fmt="o", capsize=3,
                            label=label)
            else:
                ax.plot(ns, est, "o", label=label)
            fit = entry.get("fit")
            if fit is not None and not fit.degenerate:
                grid = np.geomspace(ns.min(), ns.max(), 64)
                line = np.exp(fit.intercept + fit.slope * np.log(1.0 / grid))
                ax.plot(grid, line, "--",
                        label=f"{label} fit: slope {fit.slope:.3f}")
        else:
            ax.plot(ns, np.maximum(est, 1e-300), "x", label=f"{label} (degenerate)")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
