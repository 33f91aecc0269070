"""Episode storage and padded mini-batches."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


@dataclass
class Episode:
    obs: np.ndarray        # (T+1, N, obs_dim); the last row is the state after the final step
    state: np.ndarray      # (T+1, state_dim)
    actions: np.ndarray    # (T, N)
    rewards: np.ndarray    # (T,)
    terminal: np.ndarray   # (T,) True where the step ended the episode without bootstrap
    ranges: np.ndarray     # (T+1,) buffer-range index observed at each step

    def __post_init__(self):
        t = self.actions.shape[0]
        if t < 1:
            raise ValueError("an episode needs at least one step")
        if (self.obs.shape[0] != t + 1 or self.state.shape[0] != t + 1
                or self.rewards.shape != (t,) or self.terminal.shape != (t,)
                or self.ranges.shape != (t + 1,)):
            raise ValueError("episode arrays have inconsistent lengths")

    def __len__(self) -> int:
        return self.actions.shape[0]


@dataclass
class EpisodeBatch:
    obs: np.ndarray          # (B, T+1, N, D)
    state: np.ndarray        # (B, T+1, S)
    actions: np.ndarray      # (B, T, N)
    last_onehot: np.ndarray  # (B, T+1, N, K)
    rewards: np.ndarray      # (B, T)
    terminal: np.ndarray     # (B, T)
    mask: np.ndarray         # (B, T) 1.0 on real steps
    ranges: np.ndarray       # (B, T+1)

    @property
    def size(self) -> int:
        return self.actions.shape[0]

    @property
    def max_len(self) -> int:
        return self.actions.shape[1]


def collate(episodes: list[Episode], n_actions: int) -> EpisodeBatch:
    if not episodes:
        raise ValueError("cannot build a batch from zero episodes")
    b = len(episodes)
    t_max = max(len(e) for e in episodes)
    n, d = episodes[0].obs.shape[1:]
    s = episodes[0].state.shape[1]
    obs = np.zeros((b, t_max + 1, n, d))
    state = np.zeros((b, t_max + 1, s))
    actions = np.zeros((b, t_max, n), np.int64)
    rewards = np.zeros((b, t_max))
    terminal = np.zeros((b, t_max), bool)
    mask = np.zeros((b, t_max))
    ranges = np.zeros((b, t_max + 1), np.int64)
    for i, e in enumerate(episodes):
        t = len(e)
        obs[i, :t + 1] = e.obs
        state[i, :t + 1] = e.state
        actions[i, :t] = e.actions
        rewards[i, :t] = e.rewards
        terminal[i, :t] = e.terminal
        mask[i, :t] = 1.0
        ranges[i, :t + 1] = e.ranges
    last = np.zeros((b, t_max + 1, n, n_actions))
    onehot = np.eye(n_actions)[actions] * mask[..., None, None]
    last[:, 1:] = onehot
    return EpisodeBatch(obs, state, actions, last, rewards, terminal, mask, ranges)


class EpisodeReplay:
    """FIFO of whole episodes; uniform sampling without replacement."""

    def __init__(self, capacity: int = 2000):
        if capacity < 1:
            raise ValueError("replay capacity must be positive")
        self.capacity = capacity
        self._episodes: deque[Episode] = deque(maxlen=capacity)
        self.total_added = 0

    def __len__(self) -> int:
        return len(self._episodes)

    def add(self, episode: Episode) -> None:
        self._episodes.append(episode)
        self.total_added += 1

    def can_sample(self, batch_size: int) -> bool:
        return len(self) > batch_size

    def sample(self, batch_size: int, rng: np.random.Generator, n_actions: int) -> EpisodeBatch:
        if len(self) < batch_size:
            raise ValueError(f"replay holds {len(self)} episodes, batch needs {batch_size}")
        idx = rng.choice(len(self), size=batch_size, replace=False)
        return collate([self._episodes[i] for i in idx], n_actions)

    def episodes(self) -> list[Episode]:
        return list(self._episodes)
