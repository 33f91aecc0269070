"""CSV, plot and metadata emission."""
from __future__ import annotations

import csv
import datetime as _dt
import json
import platform
import sys
from collections import defaultdict
from importlib import metadata as _md
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, dump_config, ring_label
from .experiment import SUMMARY_METRICS, RunRecord, kpi_header
from .stats import mean_ci

EPISODE_HEADER = ("phase", "episode", "team_reward", "success", "windows") + SUMMARY_METRICS
RUN_HEADER = ("algo", "ring", "seed", "phase", "episodes", "success_rate", "team_reward") \
    + SUMMARY_METRICS
AGGREGATE_METRICS = ("success_rate", "team_reward") + SUMMARY_METRICS


def run_directory(out: Path, algo: str, ring, seed: int) -> Path:
    return Path(out) / f"{algo}_{ring_label(ring)}_s{seed}"


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "" if np.isnan(x) else repr(float(x))
    return str(x)


def _write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def flow_metric_names(flow_labels) -> tuple[str, ...]:
    return tuple(f"{f}_{kind}_mbps" for f in flow_labels for kind in ("throughput", "goodput"))


def run_row(r: RunRecord) -> list:
    n = len(r.phase_episodes(r.summary_phase))
    return [r.algo, ring_label(r.ring), r.seed, r.summary_phase, n,
            r.summary["success_rate"], r.summary["team_reward"]] \
        + [r.summary[m] for m in SUMMARY_METRICS] \
        + [r.summary[m] for m in flow_metric_names(r.flow_labels)]


def write_run_files(r: RunRecord, run_dir: Path) -> None:
    r.files["episodes"] = _write_csv(
        run_dir / "episodes.csv", EPISODE_HEADER,
        ([e.phase, e.episode, e.team_reward, e.success, e.windows]
         + [e.metrics[m] for m in SUMMARY_METRICS] for e in r.episodes))
    r.files["kpi"] = _write_csv(run_dir / "kpi.csv", kpi_header(r.flow_labels), r.window_rows)
    r.files["summary"] = _write_csv(
        run_dir / "summary.csv", RUN_HEADER + flow_metric_names(r.flow_labels), [run_row(r)])


def aggregate(records: list[RunRecord]) -> list[dict]:
    groups: dict[tuple, list[RunRecord]] = defaultdict(list)
    for r in records:
        groups[(r.algo, r.ring)].append(r)
    rows = []
    for (algo, ring), runs in sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        metrics = AGGREGATE_METRICS + flow_metric_names(runs[0].flow_labels)
        row = {"algo": algo, "ring": ring_label(ring), "n_runs": len(runs)}
        for m in metrics:
            mean, ci = mean_ci([r.summary[m] for r in runs])
            row[f"{m}_mean"], row[f"{m}_ci95"] = mean, ci
        rows.append(row)
    return rows


def aggregate_header(flow_labels) -> tuple[str, ...]:
    cols = ["algo", "ring", "n_runs"]
    for m in AGGREGATE_METRICS + flow_metric_names(flow_labels):
        cols += [f"{m}_mean", f"{m}_ci95"]
    return tuple(cols)


def write_metadata(out: Path, cfg: ExperimentConfig | None, argv: list[str] | None = None) -> Path:
    versions = {"python": platform.python_version()}
    for pkg in ("numpy", "numba", "scipy", "matplotlib", "pyyaml", "artifact"):
        try:
            versions[pkg] = _md.version(pkg)
        except _md.PackageNotFoundError:
            versions[pkg] = None
    meta = {
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "argv": sys.argv if argv is None else argv,
        "platform": platform.platform(),
        "versions": versions,
        "config": None if cfg is None else cfg.to_flat(),
        "config_yaml": None if cfg is None else dump_config(cfg),
    }
    path = Path(out) / "metadata.json"
    path.write_text(json.dumps(meta, indent=2, default=str) + "\n")
    return path


def emit_outputs(records: list[RunRecord], out: Path | str, cfg: ExperimentConfig | None = None,
                 plots: bool = True) -> dict[str, Path]:
    if not records:
        raise ValueError("no run records to emit")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for r in records:
        write_run_files(r, run_directory(out, r.algo, r.ring, r.seed))
    labels = records[0].flow_labels
    files = {
        "runs": _write_csv(out / "runs.csv", RUN_HEADER + flow_metric_names(labels),
                           (run_row(r) for r in records)),
    }
    header = aggregate_header(labels)
    files["aggregate"] = _write_csv(out / "aggregate.csv", header,
                                    ([row[c] for c in header] for row in aggregate(records)))
    if plots:
        from .plots import plot_all
        files.update(plot_all(records, out / "plots"))
    files["metadata"] = write_metadata(out, cfg)
    return files
