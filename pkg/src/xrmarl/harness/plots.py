"""Static SVG figures: learning curves and KPIs across rings."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .config import ring_label  # noqa: E402
from .experiment import RunRecord  # noqa: E402
from .stats import mean_ci  # noqa: E402

plt.rcParams["svg.hashsalt"] = "xrmarl"
_SAVE = dict(format="svg", metadata={"Date": None})
_COLORS = {"oqmix": "tab:blue", "qmix": "tab:orange", "aps": "tab:green"}


def _moving(x: np.ndarray, k: int) -> np.ndarray:
    k = max(1, min(k, x.size))
    return np.convolve(x, np.ones(k) / k, mode="valid")


def _band(ax, x, runs, color, label):
    arr = np.array(runs)
    mean = arr.mean(axis=0)
    if arr.shape[0] > 1:
        half = np.array([mean_ci(arr[:, i])[1] for i in range(arr.shape[1])])
    else:
        half = np.zeros_like(mean)
    ax.plot(x, mean, color=color, label=label, lw=1.2)
    ax.fill_between(x, mean - half, mean + half, color=color, alpha=0.2, lw=0)


def plot_learning(records: list[RunRecord], path: Path, smooth: int = 20) -> Path:
    groups = defaultdict(list)
    for r in records:
        groups[(r.algo, r.ring)].append(r)
    fig, (ax_r, ax_s) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    for (algo, ring), runs in sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        phase = "train" if runs[0].phase_episodes("train") else runs[0].summary_phase
        curves_r = [np.array([e.team_reward for e in r.phase_episodes(phase)]) for r in runs]
        curves_s = [np.array([e.success for e in r.phase_episodes(phase)], float) for r in runs]
        n = min(c.size for c in curves_r)
        rr = [_moving(c[:n], smooth) for c in curves_r]
        ss = [_moving(c[:n], smooth) for c in curves_s]
        x = np.arange(rr[0].size) + min(smooth, n) - 1
        label = f"{algo} {ring_label(ring)} m"
        _band(ax_r, x, rr, _COLORS.get(algo), label)
        _band(ax_s, x, ss, _COLORS.get(algo), label)
    ax_r.set_ylabel("episode team reward")
    ax_s.set_ylabel("success rate")
    ax_s.set_xlabel("episode")
    ax_s.set_ylim(-0.02, 1.02)
    ax_r.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def _by_ring(records, metric):
    out = defaultdict(dict)
    for algo in sorted({r.algo for r in records}):
        rings = sorted({r.ring for r in records if r.algo == algo})
        for ring in rings:
            vals = [r.summary[metric] for r in records if r.algo == algo and r.ring == ring]
            out[algo][ring] = mean_ci(vals)
    return out


def _ring_panel(ax, records, metric, ylabel):
    for algo, per_ring in _by_ring(records, metric).items():
        rings = sorted(per_ring)
        x = [0.5 * (a + b) for a, b in rings]
        m = [per_ring[k][0] for k in rings]
        e = [per_ring[k][1] for k in rings]
        ax.errorbar(x, m, yerr=e, marker="o", capsize=3, color=_COLORS.get(algo), label=algo)
    ax.set_ylabel(ylabel)
    ax.set_xlabel("UE distance ring centre (m)")


def plot_kpis(records: list[RunRecord], path: Path) -> Path:
    fig, axes = plt.subplots(2, 2, figsize=(8, 6))
    panels = (("xqi", "XR quality index"), ("jitter_ms", "jitter (ms)"),
              ("delay_ms", "delay (ms)"), ("plr", "packet loss ratio"))
    for ax, (metric, label) in zip(axes.flat, panels):
        _ring_panel(ax, records, metric, label)
    axes.flat[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def plot_flows(records: list[RunRecord], path: Path) -> Path:
    labels = records[0].flow_labels
    fig, axes = plt.subplots(2, len(labels), figsize=(3 * len(labels), 5.5), squeeze=False)
    for j, flow in enumerate(labels):
        for i, kind in enumerate(("throughput", "goodput")):
            _ring_panel(axes[i, j], records, f"{flow}_{kind}_mbps", f"{flow} {kind} (Mbps)")
    axes[0, 0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def plot_all(records: list[RunRecord], out: Path) -> dict[str, Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return {
        "plot_learning": plot_learning(records, out / "reward_success.svg"),
        "plot_kpis": plot_kpis(records, out / "kpi_vs_ring.svg"),
        "plot_flows": plot_flows(records, out / "flows_vs_ring.svg"),
    }
