"""Windowed downlink simulator: three XR UEs, one base station, one RLC buffer."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import RandomWaypoint, capacity_from_snr, snr_db
from .config import ScenarioConfig
from .queue import DEPARTED, DROPPED, PENDING, serve_window
from .reward import agent_rewards, team_reward, xqi_level
from .traffic import generate_frames, packetize

OBS_DIM = 5  # previous rates (3), peak buffer occupancy, own PDR


@dataclass
class KpiWindow:
    episode: int
    window: int
    flow_labels: tuple[str, ...]
    rates_mbps: np.ndarray
    throughput_mbps: np.ndarray
    goodput_mbps: np.ndarray
    delay_ms: np.ndarray          # NaN for a flow with no deliveries
    jitter_ms: np.ndarray
    pdr: np.ndarray
    type_pdr: np.ndarray
    type_delay_ms: np.ndarray
    type_jitter_ms: np.ndarray
    type_throughput_mbps: np.ndarray
    type_goodput_mbps: np.ndarray
    xqi: np.ndarray
    buffer_ratio: float
    buffer_peak_ratio: float
    capacity_bits: np.ndarray
    snr_db: np.ndarray
    distance_m: np.ndarray
    generated: np.ndarray
    delivered_on_time: np.ndarray
    delivered_late: np.ndarray
    dropped: np.ndarray

    @property
    def type_plr(self) -> np.ndarray:
        return 1.0 - self.type_pdr


@dataclass
class StepResult:
    observations: list[np.ndarray]
    state: np.ndarray
    kpi: KpiWindow
    rewards: list[float]
    team_reward: float
    done: bool
    truncated: bool


@dataclass
class _PacketSet:
    time: np.ndarray = field(default_factory=lambda: np.empty(0))
    size: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    ue: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    flow: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    frame: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))

    def take(self, idx) -> _PacketSet:
        return _PacketSet(self.time[idx], self.size[idx], self.ue[idx], self.flow[idx],
                          self.frame[idx])

    @staticmethod
    def cat(parts) -> _PacketSet:
        return _PacketSet(*(np.concatenate([getattr(p, k) for p in parts])
                            for k in ("time", "size", "ue", "flow", "frame")))

    def __len__(self) -> int:
        return self.time.size


class XrEnv:
    """Slate-action environment: one codec rate per traffic type per window.

    Each traffic type is carried to its own UE; the AR UE receives the three
    AR flows.  Capacity is drawn per UE and per window.
    """

    def __init__(self, scenario: ScenarioConfig | None = None, seed: int | None = None):
        self.cfg = scenario or ScenarioConfig()
        seed = self.cfg.seed if seed is None else seed
        children = np.random.SeedSequence(seed).spawn(3)
        self._rng_mobility, self._rng_shadow, self._rng_traffic = (
            np.random.default_rng(c) for c in children)

        flows = self.cfg.flows
        self.n_agents = len(flows)
        self.flow_type = np.concatenate([np.full(f.n_flows, i) for i, f in enumerate(flows)])
        self.flow_offset = np.cumsum([0] + [f.n_flows for f in flows])[:-1]
        self.flow_labels = tuple(
            f.traffic_type if f.n_flows == 1 else f"{f.traffic_type}{k + 1}"
            for f in flows for k in range(f.n_flows))
        self.n_flows = len(self.flow_labels)
        self.rate_min = np.array([f.min_rate_mbps for f in flows])
        self.rate_max = np.array([f.max_rate_mbps for f in flows])
        self.flow_max_mbps = (self.rate_max / np.array([f.n_flows for f in flows]))[self.flow_type]
        self.episode = -1
        self._ready = False

    # -- public API --------------------------------------------------------------
    @property
    def obs_dim(self) -> int:
        return OBS_DIM

    @property
    def state_dim(self) -> int:
        return self.n_agents * OBS_DIM + self.n_flows

    def reset(self) -> tuple[list[np.ndarray], np.ndarray]:
        cfg = self.cfg
        self.episode += 1
        self.window = 0
        self.ues = [RandomWaypoint(self._rng_mobility, cfg.ring, cfg.link.ue_speed_mps)
                    for _ in range(self.n_agents)]
        self.phases = [self._rng_traffic.uniform(0.0, 1.0 / f.fps, f.n_flows) for f in cfg.flows]
        self.queue = _PacketSet()
        self.pending = _PacketSet()
        self.head_finish = -1.0
        self.frame_failed = np.zeros(0, bool)
        self.counters = {k: np.zeros(self.n_flows, np.int64)
                         for k in ("generated", "on_time", "late", "dropped")}
        self.prev_rates = self.rate_min + cfg.initial_rate_frac * (self.rate_max - self.rate_min)
        self.buffer_ratio = 0.0
        self.type_pdr = np.ones(self.n_agents)
        self.flow_tput_norm = np.zeros(self.n_flows)
        self._ready = True
        obs = self._observations()
        return obs, self._state(obs)

    def step(self, rates_mbps) -> StepResult:
        if not self._ready:
            raise RuntimeError("call reset() before step()")
        cfg = self.cfg
        rates = np.asarray(rates_mbps, dtype=float).reshape(-1)
        if rates.size != self.n_agents:
            raise ValueError(f"expected {self.n_agents} rates, got {rates.size}")
        # float round-off from grid arithmetic
        rates = np.clip(rates, self.rate_min, self.rate_max)

        t0 = self.window * cfg.window_s
        t1 = t0 + cfg.window_s

        distances = np.array([ue.distance for ue in self.ues])
        shadow = self._rng_shadow.normal(0.0, cfg.link.shadowing_std_db, self.n_agents)
        snrs = np.array([snr_db(cfg.link, d, s) for d, s in zip(distances, shadow)])
        caps = np.array([capacity_from_snr(cfg.link, s, cfg.window_s) for s in snrs])

        new = self._new_packets(rates, t0)
        n_generated = np.bincount(new.flow, minlength=self.n_flows)

        arrivals = _PacketSet.cat([self.pending, new])
        order = np.argsort(arrivals.time, kind="stable")
        batch = _PacketSet.cat([self.queue, arrivals.take(order)])

        depart, status, remaining, self.head_finish, occ_mean, occ_peak = serve_window(
            t0, t1, batch.time, batch.size, batch.ue, len(self.queue), self.head_finish,
            caps / cfg.window_s, cfg.rlc_capacity_bytes)

        kpi = self._account(batch, depart, status, rates, n_generated)
        kpi.buffer_ratio = occ_mean / cfg.rlc_capacity_bytes
        kpi.buffer_peak_ratio = occ_peak / cfg.rlc_capacity_bytes
        kpi.capacity_bits, kpi.snr_db, kpi.distance_m = caps, snrs, distances

        self.queue = batch.take(remaining)
        self.pending = batch.take(np.flatnonzero(status == PENDING))

        for ue in self.ues:
            ue.advance(cfg.window_s)
        self.window += 1

        delays_for_reward = np.where(np.isnan(kpi.type_delay_ms), np.inf, kpi.type_delay_ms)
        rewards = agent_rewards(100.0 * kpi.type_pdr, delays_for_reward, kpi.throughput_mbps)
        done = bool(np.any(kpi.throughput_mbps == 0))
        truncated = (not done) and self.window >= cfg.windows_per_episode

        self.prev_rates = rates
        self.buffer_ratio = kpi.buffer_peak_ratio
        self.type_pdr = kpi.type_pdr
        self.flow_tput_norm = np.clip(kpi.throughput_mbps / self.flow_max_mbps, 0.0, 2.0)
        if done or truncated:
            self._ready = False
        obs = self._observations()
        return StepResult(obs, self._state(obs), kpi, rewards, team_reward(rewards), done, truncated)

    def conservation(self) -> dict[str, np.ndarray]:
        """Cumulative per-flow packet counts for the current episode."""
        out = {k: v.copy() for k, v in self.counters.items()}
        out["queued"] = np.bincount(self.queue.flow, minlength=self.n_flows)
        out["pending"] = np.bincount(self.pending.flow, minlength=self.n_flows)
        return out

    def normalize_rates(self, rates) -> np.ndarray:
        return (np.asarray(rates, float) - self.rate_min) / (self.rate_max - self.rate_min)

    # -- internals -----------------------------------------------------------------
    def _observations(self) -> list[np.ndarray]:
        prev = self.normalize_rates(self.prev_rates)
        return [np.concatenate([prev, [self.buffer_ratio, self.type_pdr[n]]])
                for n in range(self.n_agents)]

    def _state(self, obs: list[np.ndarray]) -> np.ndarray:
        return np.concatenate(obs + [self.flow_tput_norm])

    def _new_packets(self, rates: np.ndarray, t0: float) -> _PacketSet:
        cfg = self.cfg
        parts = []
        frame_base = self.frame_failed.size
        for n, flow in enumerate(cfg.flows):
            frames = generate_frames(flow, float(rates[n]), cfg.window_s, self._rng_traffic, t0,
                                     self.phases[n], cfg.frame_jitter_frac)
            pk = packetize(frames, cfg.max_sdu_bytes, cfg.ingress_rate_bps)
            m = pk.time.size
            parts.append(_PacketSet(pk.time, pk.size, np.full(m, n, np.int64),
                                    self.flow_offset[n] + frames.flow[pk.frame],
                                    frame_base + pk.frame))
            frame_base += frames.time.size
        self.frame_failed = np.concatenate(
            [self.frame_failed, np.zeros(frame_base - self.frame_failed.size, bool)])
        return _PacketSet.cat(parts)

    def _account(self, batch: _PacketSet, depart, status, rates, n_generated) -> KpiWindow:
        cfg = self.cfg
        nf, na = self.n_flows, self.n_agents
        tw = cfg.window_s

        gone = status == DEPARTED
        dropped = status == DROPPED
        delay_ms = (depart - batch.time) * 1e3
        on_time = gone & (delay_ms <= cfg.delay_budget_ms)
        late = gone & ~on_time

        self.frame_failed[batch.frame[dropped | late]] = True
        good = on_time & ~self.frame_failed[batch.frame]

        def per_flow(mask, weights=None):
            w = None if weights is None else weights[mask]
            return np.bincount(batch.flow[mask], weights=w, minlength=nf)

        n_gone = per_flow(gone)
        n_on_time = per_flow(on_time)
        n_late = per_flow(late)
        n_drop = per_flow(dropped)
        bits = batch.size * 8.0
        tput = per_flow(gone, bits) / tw / 1e6
        gput = per_flow(good, bits) / tw / 1e6

        d = np.where(gone, delay_ms, 0.0)
        sum_d = per_flow(gone, d)
        sum_d2 = per_flow(gone, d * d)
        with np.errstate(invalid="ignore", divide="ignore"):
            mean_d = np.where(n_gone > 0, sum_d / np.maximum(n_gone, 1), np.nan)
            var_d = np.maximum(sum_d2 / np.maximum(n_gone, 1) - mean_d ** 2, 0.0)
        jitter = np.where(n_gone > 0, np.sqrt(var_d), np.nan)
        resolved = n_gone + n_drop
        pdr = np.where(resolved > 0, n_on_time / np.maximum(resolved, 1), 0.0)

        ft = self.flow_type
        t_gone = np.bincount(ft, n_gone, na)
        t_on = np.bincount(ft, n_on_time, na)
        t_res = np.bincount(ft, resolved, na)
        t_sum = np.bincount(ft, sum_d, na)
        t_sum2 = np.bincount(ft, sum_d2, na)
        type_pdr = np.where(t_res > 0, t_on / np.maximum(t_res, 1), 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            type_delay = np.where(t_gone > 0, t_sum / np.maximum(t_gone, 1), np.nan)
            type_var = np.maximum(t_sum2 / np.maximum(t_gone, 1) - type_delay ** 2, 0.0)
        type_jitter = np.where(t_gone > 0, np.sqrt(type_var), np.nan)
        xqi = np.array([
            xqi_level(100.0 * p, np.inf if np.isnan(dl) else dl)
            for p, dl in zip(type_pdr, type_delay)
        ])

        self.counters["generated"] += n_generated
        self.counters["on_time"] += n_on_time.astype(np.int64)
        self.counters["late"] += n_late.astype(np.int64)
        self.counters["dropped"] += n_drop.astype(np.int64)

        return KpiWindow(
            episode=self.episode, window=self.window, flow_labels=self.flow_labels,
            rates_mbps=rates.copy(), throughput_mbps=tput, goodput_mbps=gput,
            delay_ms=mean_d, jitter_ms=jitter, pdr=pdr,
            type_pdr=type_pdr, type_delay_ms=type_delay, type_jitter_ms=type_jitter,
            type_throughput_mbps=np.bincount(ft, tput, na),
            type_goodput_mbps=np.bincount(ft, gput, na), xqi=xqi,
            buffer_ratio=0.0, buffer_peak_ratio=0.0,
            capacity_bits=np.zeros(na), snr_db=np.zeros(na), distance_m=np.zeros(na),
            generated=n_generated, delivered_on_time=n_on_time.astype(np.int64),
            delivered_late=n_late.astype(np.int64), dropped=n_drop.astype(np.int64),
        )
