"""XR quality index and the team reward built on it."""
from __future__ import annotations

import math
from typing import Sequence

PENALTY = -1.0
REWARD_LEVELS = (-1.0, 0.0, 0.25, 0.5, 0.75, 1.0)

# (min PDR %, max delay ms, level), checked in order
_XQI_TABLE = (
    (99.0, 7.0, 5),
    (99.0, 10.0, 4),
    (95.0, 13.0, 3),
    (95.0, 20.0, 2),
)
_LEVEL_REWARD = {5: 1.0, 4: 0.75, 3: 0.5, 2: 0.25, 1: 0.0}


def xqi_level(pdr_percent: float, delay_ms: float) -> int:
    if not 0.0 <= pdr_percent <= 100.0:
        raise ValueError(f"PDR must be a percentage in [0, 100], got {pdr_percent}")
    if math.isnan(delay_ms) or delay_ms < 0:
        raise ValueError(f"delay must be >= 0 ms, got {delay_ms}")
    for min_pdr, max_delay, level in _XQI_TABLE:
        if pdr_percent >= min_pdr and delay_ms <= max_delay:
            return level
    return 1


def reward_xqi(pdr_percent: float, delay_ms: float) -> float:
    return _LEVEL_REWARD[xqi_level(pdr_percent, delay_ms)]


def agent_rewards(pdr_percent: Sequence[float], delay_ms: Sequence[float],
                  flow_throughputs: Sequence[float]) -> list[float]:
    """Per-agent rewards; every agent takes the penalty if any flow delivered nothing."""
    if any(x == 0 for x in flow_throughputs):
        return [PENALTY] * len(pdr_percent)
    return [reward_xqi(p, d) for p, d in zip(pdr_percent, delay_ms)]


def team_reward(rewards: Sequence[float]) -> float:
    if len(rewards) == 0:
        raise ValueError("team reward of an empty vector")
    return float(min(rewards))
