"""Report export: CSV rows, full JSON, and grouped-bar plot data."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

from blockmit.harness import ExperimentReport, ReproductionReport

FORMATS = ("csv", "json", "svg-plotdata")
CSV_COLUMNS = (
    "run_id", "method", "n_qubits", "target", "p1", "p2", "shots", "lambda_or_2k",
    "raw_value", "fitted_f", "fitted_c", "estimate", "clipped", "discarded",
)
BAR_NAMES = ("theoretical", "unmitigated", "zne", "blockfit")


def atomic_write(path: Path, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _join(values) -> str:
    return ";".join(repr(v) if isinstance(v, float) else str(v) for v in values)


def csv_rows(report: ExperimentReport) -> list[dict]:
    """One row per (run, method); per-scale values are ``;``-joined."""
    cfg = report.config
    common = {k: cfg[k] for k in ("n_qubits", "target", "p1", "p2", "shots")}
    rows = []
    for rec in report.runs:
        rows.append(dict(common, run_id=rec["run_id"], method="unmitigated", lambda_or_2k="1",
                         raw_value=repr(rec["p_raw"]), fitted_f="", fitted_c="",
                         estimate=repr(rec["p_raw"]), clipped=False, discarded=""))
        if "zne" in rec:
            z = rec["zne"]
            rows.append(dict(
                common, run_id=rec["run_id"], method="zne",
                lambda_or_2k=_join(p["lambda"] for p in z["points"]),
                raw_value=_join(p["expectation"] for p in z["points"]),
                fitted_f="", fitted_c="", estimate=repr(z["p_zne"]), clipped=z["clipped"],
                discarded=_join(p["lambda"] for p in z["points"] if p["discarded"]),
            ))
        if "blockfit" in rec:
            b = rec["blockfit"]
            rows.append(dict(
                common, run_id=rec["run_id"], method="blockfit",
                lambda_or_2k=_join(p["depth"] for p in b["points"]),
                raw_value=_join(p["fidelity"] for p in b["points"]),
                fitted_f=repr(b["fit"]["f"]), fitted_c=repr(b["fit"]["c"]),
                estimate=repr(b["p_mit"]), clipped=b["clipped"],
                discarded=_join(p["depth"] for p in b["points"] if p["discarded"]),
            ))
    return rows


def to_csv(reports: Iterable[ExperimentReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        writer.writerows(csv_rows(report))
    return buf.getvalue()


def to_json(report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"


def plot_group(report: ExperimentReport) -> dict:
    agg, cfg = report.aggregates, report.config
    bars = [{"name": "theoretical", "value": report.theoretical, "std": 0.0},
            {"name": "unmitigated", "value": agg["p_raw"]["mean"], "std": agg["p_raw"]["std"]}]
    for name, key in (("zne", "p_zne"), ("blockfit", "p_mit")):
        stats = agg.get(key)
        bars.append({"name": name, "value": None if stats is None else stats["mean"],
                     "std": None if stats is None else stats["std"]})
    return {"label": f"{cfg['n_qubits']}q p2={cfg['p2']:g}", "bars": bars}


def plot_data(reports: Iterable[ExperimentReport]) -> dict:
    return {"kind": "grouped-bar", "y_label": "success probability",
            "bar_names": list(BAR_NAMES), "groups": [plot_group(r) for r in reports]}


def to_svg(data: dict) -> str:
    """Render grouped bars as a standalone SVG document (no plotting library)."""
    groups = data["groups"]
    bar_w, gap, height, pad = 18, 24, 200, 40
    colors = ("#888888", "#d95f02", "#7570b3", "#1b9e77")
    width = pad * 2 + len(groups) * (len(BAR_NAMES) * bar_w + gap)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height + 2 * pad}">',
             f'<line x1="{pad}" y1="{pad + height}" x2="{width - pad}" y2="{pad + height}" stroke="black"/>']
    for gi, group in enumerate(groups):
        x0 = pad + gi * (len(BAR_NAMES) * bar_w + gap) + gap // 2
        for bi, bar in enumerate(group["bars"]):
            value = bar["value"] or 0.0
            h = value * height
            x = x0 + bi * bar_w
            parts.append(f'<rect x="{x}" y="{pad + height - h:.2f}" width="{bar_w - 2}" '
                         f'height="{h:.2f}" fill="{colors[bi]}"><title>{bar["name"]}: '
                         f'{value:.4f}</title></rect>')
        parts.append(f'<text x="{x0}" y="{pad + height + 16}" font-size="10">{group["label"]}</text>')
    for bi, name in enumerate(BAR_NAMES):
        parts.append(f'<text x="{pad + bi * 90}" y="{pad - 12}" font-size="10" '
                     f'fill="{colors[bi]}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export(report, fmt: str, out_dir, stem: str | None = None) -> list[Path]:
    """Write ``report`` in ``fmt`` under ``out_dir``; returns the paths written."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")
    out = Path(out_dir)
    if isinstance(report, ReproductionReport):
        experiments = report.experiment_reports()
        stem = stem or f"reproduce_table{report.table_id}"
    else:
        experiments = [report]
        stem = stem or report_stem(report)
    if fmt == "json":
        return [atomic_write(out / f"{stem}.json", to_json(report))]
    if fmt == "csv":
        return [atomic_write(out / f"{stem}.csv", to_csv(experiments))]
    data = plot_data(experiments)
    return [
        atomic_write(out / f"{stem}_plotdata.json", json.dumps(data, indent=2, sort_keys=True) + "\n"),
        atomic_write(out / f"{stem}.svg", to_svg(data)),
    ]


def export_many(reports: list[ExperimentReport], fmt: str, out_dir, stem: str) -> list[Path]:
    """Sweep export: per-report JSON files, one combined CSV and one plot."""
    out = Path(out_dir)
    if fmt == "json":
        return [p for r in reports for p in export(r, "json", out)]
    if fmt == "csv":
        return [atomic_write(out / f"{stem}.csv", to_csv(reports))]
    data = plot_data(reports)
    return [
        atomic_write(out / f"{stem}_plotdata.json", json.dumps(data, indent=2, sort_keys=True) + "\n"),
        atomic_write(out / f"{stem}.svg", to_svg(data)),
    ]


def report_stem(report: ExperimentReport) -> str:
    cfg = report.config
    return f"grover{cfg['n_qubits']}_{cfg['target']}_p2-{cfg['p2']:g}_seed{cfg['base_seed']}"
