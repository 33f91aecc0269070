"""Discrete codec-rate actions, the buffer-range action filter and ε-greedy selection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# lower edges of the buffer-occupancy ranges after the first: [0, .96), [.96, .97), ... [.99, 1]
BUFFER_EDGES = (0.96, 0.97, 0.98, 0.99)
N_RANGES = len(BUFFER_EDGES) + 1


def buffer_range(occupancy: float) -> int:
    if not 0.0 <= occupancy <= 1.0 + 1e-12:
        raise ValueError(f"buffer occupancy must lie in [0, 1], got {occupancy}")
    return int(np.searchsorted(BUFFER_EDGES, occupancy, side="right"))


@dataclass(frozen=True)
class CodecActionGrid:
    d_min: float
    d_max: float
    n_levels: int = 8

    def __post_init__(self):
        if self.n_levels < 2:
            raise ValueError("need at least two codec levels")
        if not self.d_min < self.d_max:
            raise ValueError(f"need d_min < d_max, got [{self.d_min}, {self.d_max}]")

    @property
    def rates(self) -> np.ndarray:
        return np.linspace(self.d_min, self.d_max, self.n_levels)

    def rate(self, index: int) -> float:
        if not 0 <= index < self.n_levels:
            raise IndexError(f"action {index} outside grid of {self.n_levels}")
        step = (self.d_max - self.d_min) / (self.n_levels - 1)
        return self.d_min + index * step


class DisabledActionTable:
    """Per agent and buffer range, the actions that previously led to a done event.

    A set never grows to cover every action, so at least one action stays
    enabled in every range.  Sets only grow.
    """

    def __init__(self, n_agents: int, n_actions: int, n_ranges: int = N_RANGES):
        self.n_agents = n_agents
        self.n_actions = n_actions
        self.n_ranges = n_ranges
        self._disabled = np.zeros((n_agents, n_ranges, n_actions), dtype=bool)

    def disabled(self, agent: int, rng_idx: int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self._disabled[agent, rng_idx]).tolist())

    def is_disabled(self, agent: int, rng_idx: int, action: int) -> bool:
        return bool(self._disabled[agent, rng_idx, action])

    def enabled_mask(self, agent: int, rng_idx: int) -> np.ndarray:
        return ~self._disabled[agent, rng_idx]

    def as_array(self) -> np.ndarray:
        """Boolean copy shaped (agents, ranges, actions); True marks a disabled action."""
        return self._disabled.copy()

    def sizes(self) -> np.ndarray:
        return self._disabled.sum(axis=-1)

    def load(self, disabled: np.ndarray) -> None:
        disabled = np.asarray(disabled, dtype=bool)
        if disabled.shape != self._disabled.shape:
            raise ValueError(f"table shape {disabled.shape} != {self._disabled.shape}")
        if np.any(disabled.sum(axis=-1) > self.n_actions - 1):
            raise ValueError("a range has every action disabled")
        self._disabled = disabled.copy()

    def add(self, agent: int, rng_idx: int, action: int) -> bool:
        """Disable ``action``; returns whether the table changed."""
        row = self._disabled[agent, rng_idx]
        if row[action] or row.sum() >= self.n_actions - 1:
            return False
        row[action] = True
        return True


def update_disabled(table: DisabledActionTable, agent: int, rng_idx: int,
                    action: int) -> DisabledActionTable:
    table.add(agent, rng_idx, action)
    return table


def epsilon_schedule(step: int, eps_start: float = 1.0, eps_end: float = 0.05,
                     decay_steps: int = 15_000) -> float:
    if step < 0:
        raise ValueError("step must be non-negative")
    frac = min(step / decay_steps, 1.0) if decay_steps > 0 else 1.0
    return max(eps_end, eps_start - (eps_start - eps_end) * frac)


def select_action(q: np.ndarray, epsilon: float, enabled: np.ndarray,
                  rng: np.random.Generator) -> int:
    """ε-greedy pick that never returns a disabled action.

    A disabled pick is redrawn; the greedy branch only considers enabled
    actions, so the loop ends with probability one.
    """
    q = np.asarray(q, dtype=float)
    enabled = np.asarray(enabled, dtype=bool)
    if not enabled.any():
        raise RuntimeError("every action is disabled for this buffer range")
    while True:
        if rng.random() < epsilon:
            a = int(rng.integers(q.size))
        else:
            a = int(np.argmax(np.where(enabled, q, -np.inf)))
        if enabled[a]:
            return a
