"""Cooperative multi-agent codec-rate control with optimistically weighted QMIX."""
from .actions import (BUFFER_EDGES, N_RANGES, CodecActionGrid, DisabledActionTable, buffer_range,
                      epsilon_schedule, select_action, update_disabled)
from .checkpoint import load_checkpoint, save_checkpoint
from .envs import MarlEnv, MatrixGame, Transition, XrMarlEnv
from .learner import Hyperparams, QmixLearner, optimistic_weight, weighted_td_loss
from .networks import AgentNet, MixerNet, agent_q, hard_update, mix, unroll_agent
from .replay import Episode, EpisodeBatch, EpisodeReplay, collate
from .runner import (LOG_HEADER, Agents, EpisodeLog, MaskAudit, TrainResult, episodes_to_fraction,
                     greedy_joint_action, train, write_train_log)

__all__ = [
    "BUFFER_EDGES", "N_RANGES", "CodecActionGrid", "DisabledActionTable", "buffer_range",
    "epsilon_schedule", "select_action", "update_disabled",
    "load_checkpoint", "save_checkpoint",
    "MarlEnv", "MatrixGame", "Transition", "XrMarlEnv",
    "Hyperparams", "QmixLearner", "optimistic_weight", "weighted_td_loss",
    "AgentNet", "MixerNet", "agent_q", "hard_update", "mix", "unroll_agent",
    "Episode", "EpisodeBatch", "EpisodeReplay", "collate",
    "LOG_HEADER", "Agents", "EpisodeLog", "MaskAudit", "TrainResult", "episodes_to_fraction",
    "greedy_joint_action", "train", "write_train_log",
]
