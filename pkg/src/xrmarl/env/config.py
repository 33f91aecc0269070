"""Scenario, link and traffic settings for the XR downlink simulator."""
from __future__ import annotations

from dataclasses import dataclass, field

TRAFFIC_TYPES = ("AR", "VR", "CG")
RINGS = ((100.0, 200.0), (200.0, 300.0), (300.0, 400.0))


@dataclass(frozen=True)
class FlowSpec:
    """One traffic type; the codec rate bounds apply to the agent's decision."""

    traffic_type: str
    n_flows: int
    min_rate_mbps: float
    max_rate_mbps: float
    fps: float = 60.0

    def __post_init__(self):
        if self.traffic_type not in TRAFFIC_TYPES:
            raise ValueError(f"unknown traffic type {self.traffic_type!r}")
        if self.n_flows < 1:
            raise ValueError("flow count must be >= 1")
        if not 0 < self.min_rate_mbps <= self.max_rate_mbps:
            raise ValueError(f"bad rate bounds [{self.min_rate_mbps}, {self.max_rate_mbps}]")
        if self.fps <= 0:
            raise ValueError("fps must be positive")


def default_flows() -> tuple[FlowSpec, ...]:
    return (
        FlowSpec("AR", 3, 0.5, 10.0),
        FlowSpec("VR", 1, 10.0, 30.0),
        FlowSpec("CG", 1, 10.0, 30.0),
    )


@dataclass(frozen=True)
class LinkConfig:
    fc_ghz: float = 4.0
    bandwidth_hz: float = 40e6
    tx_power_dbm: float = 43.0
    bs_noise_figure_db: float = 5.0
    ue_noise_figure_db: float = 7.0
    ue_speed_mps: float = 3.0
    ue_height_m: float = 1.5
    antenna_gain_db: float = 0.0
    se_cap: float = 8.0
    shadowing_std_db: float = 7.8
    # below this SNR the UE gets nothing for the window; -inf keeps pure Shannon
    outage_snr_db: float = float("-inf")

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")
        if self.se_cap <= 0:
            raise ValueError("spectral-efficiency cap must be positive")
        if self.shadowing_std_db < 0:
            raise ValueError("shadowing std must be non-negative")


@dataclass(frozen=True)
class ScenarioConfig:
    ring: tuple[float, float] = RINGS[0]
    window_s: float = 0.5
    windows_per_episode: int = 20
    seed: int = 0
    rlc_capacity_bytes: int = 60_000
    delay_budget_ms: float = 20.0
    # largest SDU handed to RLC; bigger frames are segmented
    max_sdu_bytes: int = 30_000
    ingress_rate_bps: float = 1e9
    frame_jitter_frac: float = 0.105
    initial_rate_frac: float = 1.0
    link: LinkConfig = field(default_factory=LinkConfig)
    flows: tuple[FlowSpec, ...] = field(default_factory=default_flows)

    def __post_init__(self):
        inner, outer = self.ring
        if not 0 < inner < outer:
            raise ValueError(f"ring must satisfy 0 < inner < outer, got {self.ring}")
        if self.window_s <= 0:
            raise ValueError("observation window must be positive")
        if self.windows_per_episode < 1:
            raise ValueError("need at least one window per episode")
        if not 0 < self.max_sdu_bytes <= self.rlc_capacity_bytes:
            raise ValueError("max SDU size must be positive and fit in the RLC buffer")
        if not 0.0 <= self.initial_rate_frac <= 1.0:
            raise ValueError("initial_rate_frac must be in [0, 1]")

    @property
    def n_agents(self) -> int:
        return len(self.flows)

    @property
    def n_flows(self) -> int:
        return sum(f.n_flows for f in self.flows)
