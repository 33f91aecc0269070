"""Seeded runs of the learners and the APS baseline over one scenario."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..baselines import ApsController
from ..env import XrEnv
from ..env.simulator import KpiWindow
from ..marl import (Agents, EpisodeLog, MaskAudit, XrMarlEnv, load_checkpoint, save_checkpoint,
                    train, write_train_log)
from ..marl.runner import RolloutResult
from .config import ExperimentConfig, ring_label
from .stats import success_rate

log = logging.getLogger(__name__)

SUMMARY_METRICS = ("xqi", "jitter_ms", "delay_ms", "plr", "throughput_mbps", "goodput_mbps")


class InvariantViolation(RuntimeError):
    pass


@dataclass
class EpisodeStats:
    phase: str
    episode: int
    team_reward: float
    success: bool
    windows: int
    metrics: dict[str, float]


@dataclass
class RunRecord:
    algo: str
    ring: tuple[float, float]
    seed: int
    flow_labels: tuple[str, ...]
    episodes: list[EpisodeStats] = field(default_factory=list)
    window_rows: list[list] = field(default_factory=list)
    train_logs: list[EpisodeLog] = field(default_factory=list)
    summary_phase: str = "eval"
    summary: dict[str, float] = field(default_factory=dict)
    audit: MaskAudit | None = None
    files: dict[str, Path] = field(default_factory=dict)

    @property
    def run_id(self) -> str:
        return f"{self.algo}_{ring_label(self.ring)}_s{self.seed}"

    def phase_episodes(self, phase: str) -> list[EpisodeStats]:
        return [e for e in self.episodes if e.phase == phase]


def window_metrics(kpi: KpiWindow) -> dict[str, float]:
    """Window-level aggregates across traffic types and flows."""
    with np.errstate(all="ignore"):
        delay = kpi.type_delay_ms[~np.isnan(kpi.type_delay_ms)]
        jitter = kpi.type_jitter_ms[~np.isnan(kpi.type_jitter_ms)]
        out = {
            "xqi": float(np.mean(kpi.xqi)),
            "jitter_ms": float(jitter.mean()) if jitter.size else float("nan"),
            "delay_ms": float(delay.mean()) if delay.size else float("nan"),
            "plr": float(np.mean(kpi.type_plr)),
            "throughput_mbps": float(kpi.throughput_mbps.sum()),
            "goodput_mbps": float(kpi.goodput_mbps.sum()),
        }
    for label, t, g in zip(kpi.flow_labels, kpi.throughput_mbps, kpi.goodput_mbps):
        out[f"{label}_throughput_mbps"] = float(t)
        out[f"{label}_goodput_mbps"] = float(g)
    return out


def kpi_header(flow_labels) -> list[str]:
    cols = ["phase", "episode", "window"]
    for f in flow_labels:
        cols += [f"{f}_throughput_mbps", f"{f}_goodput_mbps", f"{f}_delay_ms", f"{f}_jitter_ms",
                 f"{f}_pdr"]
    return cols + ["xqi_AR", "xqi_VR", "xqi_CG", "buffer_peak", "reward", "done"]


def _kpi_row(phase: str, episode: int, kpi: KpiWindow, reward: float, done: bool) -> list:
    row: list = [phase, episode, kpi.window]
    for i in range(len(kpi.flow_labels)):
        row += [kpi.throughput_mbps[i], kpi.goodput_mbps[i], kpi.delay_ms[i], kpi.jitter_ms[i],
                kpi.pdr[i]]
    return row + [int(x) for x in kpi.xqi] + [kpi.buffer_peak_ratio, reward, int(done)]


class _Recorder:
    """Turns per-window KPIs into episode statistics and CSV rows."""

    def __init__(self, record: RunRecord):
        self.record = record
        self._windows: list[dict[str, float]] = []

    def window(self, phase: str, episode: int, kpi: KpiWindow, reward: float, done: bool):
        self._windows.append(window_metrics(kpi))
        self.record.window_rows.append(_kpi_row(phase, episode, kpi, reward, done))

    def end_episode(self, phase: str, episode: int, team_reward: float, success: bool):
        rows = self._windows
        keys = rows[0].keys() if rows else ()
        with np.errstate(all="ignore"):
            metrics = {k: float(np.nanmean([r[k] for r in rows]))
                       if not all(np.isnan(r[k]) for r in rows) else float("nan") for k in keys}
        self.record.episodes.append(
            EpisodeStats(phase, episode, team_reward, success, len(rows), metrics))
        self._windows = []

    def summary(self, phase: str) -> dict[str, float]:
        eps = self.record.phase_episodes(phase)
        # window-weighted means over every completed window of the phase
        out = {"success_rate": success_rate([e.success for e in eps]),
               "team_reward": float(np.mean([e.team_reward for e in eps]))}
        keys = eps[0].metrics.keys()
        for k in keys:
            num = sum(e.metrics[k] * e.windows for e in eps if not np.isnan(e.metrics[k]))
            den = sum(e.windows for e in eps if not np.isnan(e.metrics[k]))
            out[k] = num / den if den else float("nan")
        return out


def _check_env(env: XrEnv, run_id: str) -> None:
    c = env.conservation()
    total = c["on_time"] + c["late"] + c["dropped"] + c["queued"] + c["pending"]
    if not np.array_equal(c["generated"], total):
        raise InvariantViolation(f"{run_id}: packet conservation broken: {c}")


def run_aps(cfg: ExperimentConfig, seed: int, episodes: int | None = None,
            phase: str = "eval") -> RunRecord:
    scenario = cfg.scenario_config(seed)
    env = XrEnv(scenario, seed)
    record = RunRecord("aps", cfg.ring, seed, env.flow_labels, summary_phase=phase)
    rec = _Recorder(record)
    ctl = ApsController(cfg.aps, env.rate_min, env.rate_max)
    for ep in range(cfg.episodes if episodes is None else episodes):
        env.reset()
        rates = ctl.reset(env.prev_rates)
        total, success = 0.0, True
        while True:
            res = env.step(rates)
            rec.window(phase, ep, res.kpi, res.team_reward, res.done)
            total += res.team_reward
            success &= not res.done
            if res.done or res.truncated:
                break
            rates = ctl.act(res.kpi)
        _check_env(env, record.run_id)
        rec.end_episode(phase, ep, total, success)
    record.summary = rec.summary(phase)
    return record


def _evaluate(agents: Agents, menv: XrMarlEnv, rec: _Recorder, n: int, run_id: str) -> None:
    for ep in range(n):
        ro = agents.rollout(menv, 0.0, learn_mask=False)
        _record_rollout(rec, "eval", ep, ro)
        _check_env(menv.env, run_id)


def _record_rollout(rec: _Recorder, phase: str, ep: int, ro: RolloutResult) -> None:
    for tr in ro.transitions:
        rec.window(phase, ep, tr.info, tr.reward, tr.failure)
    rec.end_episode(phase, ep, ro.team_return, ro.success)


def run_learner(cfg: ExperimentConfig, seed: int, run_dir: Path | None = None) -> RunRecord:
    hp = cfg.hp
    menv = XrMarlEnv(cfg.scenario_config(seed), hp.n_levels, seed)
    record = RunRecord(cfg.algo, cfg.ring, seed, menv.env.flow_labels)
    rec = _Recorder(record)

    def on_episode(entry: EpisodeLog, ro: RolloutResult):
        _record_rollout(rec, "train", entry.episode, ro)
        _check_env(menv.env, record.run_id)

    result = train(menv, hp, seed=seed, episodes=cfg.episodes, max_env_steps=cfg.steps,
                   on_episode=on_episode)
    record.train_logs = result.logs
    record.audit = result.audit
    if result.audit.disabled_executions or result.audit.table_shrank:
        raise InvariantViolation(f"{record.run_id}: action filter violated: {result.audit}")
    if cfg.eval_episodes > 0:
        agents = Agents(result.learner, result.table, np.random.default_rng(seed),
                        result.audit)
        _evaluate(agents, menv, rec, cfg.eval_episodes, record.run_id)
        record.summary_phase = "eval"
    else:
        record.summary_phase = "train"
    record.summary = rec.summary(record.summary_phase)
    if run_dir is not None:
        run_dir.mkdir(parents=True, exist_ok=True)
        record.files["checkpoint"] = save_checkpoint(
            run_dir / "checkpoint.npz", result.learner, result.table,
            {"seed": seed, "ring": list(cfg.ring), "episodes": len(result.logs),
             "env_steps": result.env_steps})
        write_train_log(result.logs, run_dir / "train_log.csv")
        record.files["train_log"] = run_dir / "train_log.csv"
    return record


def evaluate_checkpoint(cfg: ExperimentConfig, seed: int, checkpoint: Path) -> RunRecord:
    learner, table, meta = load_checkpoint(checkpoint)
    menv = XrMarlEnv(cfg.scenario_config(seed), learner.hp.n_levels, seed)
    record = RunRecord(cfg.algo, cfg.ring, seed, menv.env.flow_labels)
    rec = _Recorder(record)
    audit = MaskAudit()
    agents = Agents(learner, table, np.random.default_rng(seed), audit)
    _evaluate(agents, menv, rec, max(cfg.eval_episodes, 1), record.run_id)
    if audit.disabled_executions:
        raise InvariantViolation(f"{record.run_id}: disabled action executed during evaluation")
    record.audit = audit
    record.summary = rec.summary("eval")
    return record


def run_single(cfg: ExperimentConfig, seed: int, run_dir: Path | None = None) -> RunRecord:
    if cfg.algo == "aps":
        return run_aps(cfg, seed)
    return run_learner(cfg, seed, run_dir)


def run_experiment(cfg: ExperimentConfig, out: Path | str | None = None,
                   emit: bool = True) -> list[RunRecord]:
    """One run per seed; outputs are written before returning when ``emit`` is set."""
    from .outputs import emit_outputs, run_directory

    out = Path(cfg.out if out is None else out)
    records = []
    for seed in cfg.seeds:
        log.info("run %s ring=%s seed=%d", cfg.algo, ring_label(cfg.ring), seed)
        run_dir = run_directory(out, cfg.algo, cfg.ring, seed) if emit else None
        records.append(run_single(cfg, seed, run_dir))
    if emit:
        emit_outputs(records, out, cfg)
    return records
