"""Report rendering: summary CSV plus matplotlib figures for result tables.

Reads the per-trial CSVs that ``run`` and ``sweep`` emit, recomputes means
and standard deviations from the trial records, and writes a summary table
next to bar/line figures (PNG, headless backend).
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import DataFormatError
from .io import fmt_float

SUMMARY_HEADER = ("dataset,featurization,landmarks,classifier,"
                  "parameter,value,trials,mean,std")


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False


def read_result_rows(path):
    """Parse a result or sweep CSV into per-trial row dicts.

    Summary rows (non-integer trial field) are dropped; means are recomputed
    downstream from the trial records.
    """
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file", path) from None
        plain = header == ["dataset", "featurization", "landmarks", "classifier", "trial", "error"]
        swept = header == ["parameter", "value", "dataset", "featurization",
                           "landmarks", "classifier", "trial", "error"]
        if not (plain or swept):
            raise DataFormatError(f"unrecognized result header {header!r}", path, 1)
        for line_no, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) != len(header):
                raise DataFormatError(f"expected {len(header)} fields, got {len(raw)}", path, line_no)
            row = dict(zip(header, raw))
            if not _is_int(row["trial"]):
                continue
            try:
                row["error"] = float(row["error"])
            except ValueError:
                raise DataFormatError(f"bad error value {row['error']!r}", path, line_no) from None
            rows.append(row)
    if not rows:
        raise DataFormatError("no trial rows", path)
    return rows


def _group(rows, keys):
    out = {}
    for row in rows:
        out.setdefault(tuple(row[k] for k in keys), []).append(row["error"])
    return out


def _bar_figure(groups, out_path):
    labels = ["{}\n{} {} {}".format(*key) for key in groups]
    means = [float(np.mean(v)) for v in groups.values()]
    stds = [float(np.std(v)) for v in groups.values()]
    fig, ax = plt.subplots(figsize=(max(6.0, 1.6 * len(groups)), 4.5))
    x = np.arange(len(groups))
    ax.bar(x, means, yerr=stds, capsize=4, color="#4878a8")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("misclassification error")
    ax.set_ylim(bottom=0)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def _sweep_figure(parameter, series, out_path):
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for key, points in series.items():
        points = sorted(points)
        xs = [p[0] for p in points]
        means = [p[1] for p in points]
        stds = [p[2] for p in points]
        ax.errorbar(xs, means, yerr=stds, marker="o", capsize=3,
                    label="{} {} {} {}".format(*key))
    ax.set_xlabel(parameter)
    ax.set_ylabel("misclassification error")
    ax.set_ylim(bottom=0)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_report(result_paths, out_dir) -> list:
    """Summarize result CSVs into out_dir; returns the written paths.

    Plain run tables become one grouped bar chart; each swept parameter
    becomes one line chart. summary.csv always accompanies the figures.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plain_rows = []
    sweep_rows = []
    for path in result_paths:
        rows = read_result_rows(path)
        (sweep_rows if "parameter" in rows[0] else plain_rows).extend(rows)

    written = []
    summary_lines = [SUMMARY_HEADER]
    if plain_rows:
        groups = _group(plain_rows, ("dataset", "featurization", "landmarks", "classifier"))
        for key, errs in groups.items():
            summary_lines.append(",".join(key) + ",,,{},{},{}".format(
                len(errs), fmt_float(np.mean(errs)), fmt_float(np.std(errs))))
        fig_path = out / "errors.png"
        _bar_figure(groups, fig_path)
        written.append(fig_path)
    if sweep_rows:
        by_param = _group(sweep_rows, ("parameter",))
        for (parameter,), _ in by_param.items():
            rows_p = [r for r in sweep_rows if r["parameter"] == parameter]
            groups = _group(rows_p, ("value", "dataset", "featurization", "landmarks", "classifier"))
            series = {}
            for (value, *rest), errs in groups.items():
                mean, std = float(np.mean(errs)), float(np.std(errs))
                series.setdefault(tuple(rest), []).append((int(value), mean, std))
                summary_lines.append(",".join(rest) + ",{},{},{},{},{}".format(
                    parameter, value, len(errs), fmt_float(mean), fmt_float(std)))
            fig_path = out / f"sweep_{parameter}.png"
            _sweep_figure(parameter, series, fig_path)
            written.append(fig_path)

    summary_path = out / "summary.csv"
    with open(summary_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(summary_lines) + "\n")
    written.append(summary_path)
    return written
