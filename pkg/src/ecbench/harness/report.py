"""CSV/JSON outputs for grid records and dispatch cost reports."""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path

import numpy as np

from .grid import AXES, ResultRecord
from .metrics import mean_sd

RESULT_COLUMNS = ("cell", "axis", *AXES, "repetition", "community_id", "family", "seed", "status", "nmae", "error")


def _num(v: float, digits: int = 6) -> str:
    return "" if v is None or not np.isfinite(v) else f"{v:.{digits}f}"


def _cell_value(v) -> str:
    return ("on" if v else "off") if isinstance(v, bool) else str(v)


def write_results_csv(records, path) -> None:
    """Long format, one row per (cell, repetition, family). Contains no timing data, so reruns are byte-identical."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in records:
            row = []
            for col in RESULT_COLUMNS:
                v = getattr(r, col)
                # full precision so ``report`` re-derives identical summaries
                row.append(("" if not np.isfinite(v) else repr(float(v))) if col == "nmae" else _cell_value(v))
            w.writerow(row)


def summarize(records) -> list[dict]:
    """Mean and sample sd of nMAE per (cell, family), in first-seen order."""
    groups: dict[tuple, list] = defaultdict(list)
    first: dict[tuple, ResultRecord] = {}
    for r in records:
        k = (r.cell, r.family)
        first.setdefault(k, r)
        if r.status == "ok":
            groups[k].append(r.nmae)
    out = []
    for k, r in first.items():
        vals = groups.get(k, [])
        m, sd = mean_sd(vals)
        out.append({"cell": r.cell, "axis": r.axis, **{a: getattr(r, a) for a in AXES}, "family": r.family,
                    "n": len(vals), "mean_nmae": m, "sd_nmae": sd})  # fmt: skip
    return out


def write_axis_tables(summary, out_dir: Path, prefix: str = "table") -> list[Path]:
    """One wide table per axis: rows are axis values (baseline included), columns are ``<family>_mean`` / ``_sd``."""
    families = list(dict.fromkeys(s["family"] for s in summary))
    base = [s for s in summary if s["axis"] == "baseline"]
    paths = []
    for axis in AXES:
        rows = [s for s in summary if s["axis"] == axis] + base
        if not any(s["axis"] == axis for s in summary):
            continue
        by_value: dict[str, dict] = {}
        for s in rows:
            by_value.setdefault(_cell_value(s[axis]), {})[s["family"]] = s
        path = out_dir / f"{prefix}_{axis}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([axis, *(f"{f}_{stat}" for f in families for stat in ("mean", "sd"))])
            for value in sorted(by_value, key=_value_order):
                cols = by_value[value]
                w.writerow([value, *(_num(cols[f][k], 2) if f in cols else "" for f in families
                                     for k in ("mean_nmae", "sd_nmae"))])  # fmt: skip
        paths.append(path)
    return paths


def _value_order(v: str):
    try:
        return (0, float(v.rstrip("k")), "")
    except ValueError:
        return (1, 0.0, v)


def write_daily_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell", "repetition", "family", "day_index", "nmae"])
        for r in records:
            for i, v in enumerate(r.daily_nmae):
                w.writerow([r.cell, r.repetition, r.family, i, _num(v)])


def write_timings_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell", "repetition", "family", "train_seconds"])
        for r in records:
            w.writerow([r.cell, r.repetition, r.family, f"{r.train_seconds:.3f}"])


def _json_value(v):
    if isinstance(v, float):
        return round(v, 6) if np.isfinite(v) else None
    return v


def emit_report(records, out_dir, prefix: str = "grid", manifest: dict | None = None) -> dict[str, Path]:
    """Write results, summary, per-axis tables, daily series, timings and a JSON summary."""
    records = list(records)
    if not records:
        raise ValueError("no records to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "results": out / f"{prefix}_results.csv",
        "summary": out / f"{prefix}_summary.csv",
        "daily": out / f"{prefix}_daily.csv",
        "timings": out / f"{prefix}_timings.csv",
        "json": out / f"{prefix}_summary.json",
    }
    write_results_csv(records, paths["results"])
    summary = summarize(records)
    with open(paths["summary"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        cols = ["cell", "axis", *AXES, "family", "n", "mean_nmae", "sd_nmae"]
        w.writerow(cols)
        for s in summary:
            w.writerow([_num(s[c]) if c.endswith("_nmae") else _cell_value(s[c]) for c in cols])
    for i, p in enumerate(write_axis_tables(summary, out, prefix=f"{prefix}_table")):
        paths[f"table_{i}"] = p
    write_daily_csv(records, paths["daily"])
    write_timings_csv(records, paths["timings"])
    doc = {
        "n_records": len(records),
        "n_failed": sum(r.status == "failed" for r in records),
        "n_unavailable": sum(r.status == "unavailable" for r in records),
        "summary": [{k: _json_value(v) for k, v in s.items()} for s in summary],
    }
    if manifest is not None:
        doc["manifest"] = manifest
    paths["json"].write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return paths


def emit_cost_reports(reports, out_dir, prefix: str = "dispatch") -> dict[str, Path]:
    """Savings table across forecasters/capacities plus per-report JSON and schedule CSVs.

    ``reports`` maps a label (e.g. ``"knn@120kWh"``) to a CostReport.
    """
    if not reports:
        raise ValueError("no cost reports")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = out / f"{prefix}_savings.csv"
    with open(table, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "forecaster", "n_days", "unoptimized_eur", "optimized_eur", "savings_eur",
                    "savings_pct", "mean_nmae_pct"])  # fmt: skip
        for label, rep in reports.items():
            s = rep.summary()
            w.writerow([label, s["forecaster"], s["n_days"], _num(s["unoptimized_eur"]), _num(s["optimized_eur"]),
                        _num(s["savings_eur"]), _num(s["savings_pct"]), _num(s["mean_nmae_pct"])])  # fmt: skip
    paths = {"savings": table}
    doc = {}
    for label, rep in reports.items():
        safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in label)
        sched = out / f"{prefix}_{safe}_schedule.csv"
        rep.write_schedule_csv(sched)
        paths[f"schedule_{label}"] = sched
        doc[label] = rep.summary()
    js = out / f"{prefix}_report.json"
    js.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    paths["json"] = js
    return paths
