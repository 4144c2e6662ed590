"""Regenerate rate-sweep charts and the timing table from CSV files.

Reads the CSV schemas written by the simulation harness and produces a
line chart (one series per selection scheme and codebook mode) or a
formatted text table for the timing benchmark. Strictly read-only over
its inputs; no numbers are recomputed beyond the displayed ratios.

Usage: render --kind {rate_vs_elements,rate_vs_distance,timing_table}
              --in <csv> --out <path>
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

KINDS = ("rate_vs_elements", "rate_vs_distance", "timing_table")

_REQUIRED_COLUMNS = {
    "rate_vs_elements": ("N", "mode", "es_rate", "dnn_rate", "random_rate"),
    "rate_vs_distance": ("d_r", "mode", "es_rate", "dnn_rate", "random_rate"),
    "timing_table": ("N", "es_seconds", "dnn_seconds", "speedup", "dnn_over_es_rate"),
}

_SCHEME_COLUMNS = (("es_rate", "ES"), ("dnn_rate", "DNN"), ("random_rate", "random"))


class SchemaError(ValueError):
    """CSV header does not match the expected schema for the chart kind."""


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    in_path: Path
    out_path: Path


@dataclass(frozen=True)
class RenderResult:
    kind: str
    out_path: Path
    n_rows: int
    n_series: int = 0


def read_rows(spec: PlotSpec) -> list:
    if spec.kind not in KINDS:
        raise SchemaError(f"unknown chart kind {spec.kind!r}")
    with open(spec.in_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in _REQUIRED_COLUMNS[spec.kind]:
            if column not in header:
                raise SchemaError(f"{spec.in_path}: missing column {column!r} for kind {spec.kind}")
        return list(reader)


def _chart(spec: PlotSpec, rows: list, x_column: str, x_label: str) -> RenderResult:
    fig, ax = plt.subplots(figsize=(7, 5))
    modes = sorted({row["mode"] for row in rows})
    n_series = 0
    for mode in modes:
        subset = [row for row in rows if row["mode"] == mode]
        subset.sort(key=lambda row: float(row[x_column]))
        xs = [float(row[x_column]) for row in subset]
        for column, scheme in _SCHEME_COLUMNS:
            ax.plot(
                xs,
                [float(row[column]) for row in subset],
                marker="o",
                label=f"{scheme} ({mode})",
            )
            n_series += 1
    ax.set_xlabel(x_label)
    ax.set_ylabel("spectral efficiency (bps/Hz)")
    ax.grid(True, alpha=0.3)
    if n_series:
        ax.legend()
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return RenderResult(kind=spec.kind, out_path=spec.out_path, n_rows=len(rows), n_series=n_series)


def format_ratio(ratio: float) -> str:
    """DNN/ES rate ratio as a percentage, trailing zeros trimmed."""
    return f"{round(ratio * 100, 2):g}%"


def _timing_table(spec: PlotSpec, rows: list) -> RenderResult:
    table = [["N", "ES (s)", "DNN (s)", "speedup", "DNN/ES rate"]]
    for row in rows:
        table.append(
            [
                row["N"],
                f"{float(row['es_seconds']):g}",
                f"{float(row['dnn_seconds']):g}",
                f"{float(row['speedup']):.2f}x",
                format_ratio(float(row["dnn_over_es_rate"])),
            ]
        )
    widths = [max(len(line[col]) for line in table) for col in range(len(table[0]))]
    rendered = []
    for index, line in enumerate(table):
        rendered.append("  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip())
        if index == 0:
            rendered.append("  ".join("-" * width for width in widths))
    Path(spec.out_path).write_text("\n".join(rendered) + "\n")
    return RenderResult(kind=spec.kind, out_path=spec.out_path, n_rows=len(rows))


def render(spec: PlotSpec) -> RenderResult:
    rows = read_rows(spec)
    if spec.kind == "rate_vs_elements":
        return _chart(spec, rows, "N", "RIS elements N")
    if spec.kind == "rate_vs_distance":
        return _chart(spec, rows, "d_r", "receiver distance d_r (m)")
    return _timing_table(spec, rows)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render ris-beamsel CSV outputs into charts and tables."
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="in_path", required=True, metavar="CSV")
    parser.add_argument("--out", dest="out_path", required=True, metavar="PATH")
    args = parser.parse_args(argv)
    spec = PlotSpec(kind=args.kind, in_path=Path(args.in_path), out_path=Path(args.out_path))
    try:
        result = render(spec)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.out_path} ({result.n_rows} data rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
