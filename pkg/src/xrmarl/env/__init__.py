from .channel import (RandomWaypoint, capacity_from_snr, noise_floor_dbm, pathloss_uma_nlos,
                      sample_in_annulus, snr_db, window_capacity)
from .config import RINGS, TRAFFIC_TYPES, FlowSpec, LinkConfig, ScenarioConfig, default_flows
from .reward import PENALTY, agent_rewards, reward_xqi, team_reward, xqi_level
from .simulator import OBS_DIM, KpiWindow, StepResult, XrEnv
from .traffic import Frames, Packets, generate_frames, packetize

__all__ = [
    "RandomWaypoint", "capacity_from_snr", "noise_floor_dbm", "pathloss_uma_nlos",
    "sample_in_annulus", "snr_db", "window_capacity",
    "RINGS", "TRAFFIC_TYPES", "FlowSpec", "LinkConfig", "ScenarioConfig", "default_flows",
    "PENALTY", "agent_rewards", "reward_xqi", "team_reward", "xqi_level",
    "OBS_DIM", "KpiWindow", "StepResult", "XrEnv",
    "Frames", "Packets", "generate_frames", "packetize",
]
