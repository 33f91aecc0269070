"""Environment adapters with discrete per-agent actions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from ..env import ScenarioConfig, XrEnv
from .actions import CodecActionGrid


@dataclass
class Transition:
    obs: list[np.ndarray]
    state: np.ndarray
    reward: float
    terminal: bool      # no bootstrap from the next state
    truncated: bool     # episode ended on its step limit
    failure: bool       # the done event that feeds the action filter
    occupancy: float
    info: Any = None


class MarlEnv(Protocol):
    n_agents: int
    obs_dim: int
    state_dim: int
    n_actions: int

    def reset(self) -> tuple[list[np.ndarray], np.ndarray, float]: ...

    def step(self, actions) -> Transition: ...


class XrMarlEnv:
    """The XR simulator seen through per-agent codec-level indices."""

    def __init__(self, scenario: ScenarioConfig, n_levels: int = 8, seed: int | None = None):
        self.env = XrEnv(scenario, seed)
        self.grids = [CodecActionGrid(f.min_rate_mbps, f.max_rate_mbps, n_levels)
                      for f in scenario.flows]
        self.n_agents = self.env.n_agents
        self.obs_dim = self.env.obs_dim
        self.state_dim = self.env.state_dim
        self.n_actions = n_levels

    def reset(self):
        obs, state = self.env.reset()
        return obs, state, self.env.buffer_ratio

    def rates(self, actions) -> np.ndarray:
        return np.array([g.rate(int(a)) for g, a in zip(self.grids, actions)])

    def step(self, actions) -> Transition:
        res = self.env.step(self.rates(actions))
        return Transition(res.observations, res.state, res.team_reward, res.done, res.truncated,
                          res.done, self.env.buffer_ratio, res.kpi)


class MatrixGame:
    """One-shot cooperative game: both agents see a constant observation."""

    PAYOFF = np.array([[12.0, -12.0, -12.0],
                       [-12.0, 0.0, 0.0],
                       [-12.0, 0.0, 0.0]])

    def __init__(self, payoff: np.ndarray | None = None):
        self.payoff = self.PAYOFF if payoff is None else np.asarray(payoff, float)
        self.n_agents = 2
        self.n_actions = self.payoff.shape[0]
        self.obs_dim = 1
        self.state_dim = 1

    def reset(self):
        return [np.ones(1), np.ones(1)], np.ones(1), 0.0

    def step(self, actions) -> Transition:
        r = float(self.payoff[int(actions[0]), int(actions[1])])
        return Transition([np.ones(1), np.ones(1)], np.ones(1), r, True, False, False, 0.0)

    def optimum(self) -> tuple[int, int]:
        """Best joint action by exhaustive enumeration."""
        i, j = np.unravel_index(np.argmax(self.payoff), self.payoff.shape)
        return int(i), int(j)
