"""Episode collection and the training loop."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .actions import DisabledActionTable, buffer_range, epsilon_schedule, select_action
from .envs import MarlEnv, Transition
from .learner import Hyperparams, QmixLearner
from .replay import Episode, EpisodeReplay

LOG_HEADER = ("step", "episode", "epsilon", "loss", "team_reward", "success")


@dataclass
class EpisodeLog:
    step: int          # environment steps so far, including this episode
    episode: int
    epsilon: float
    loss: float        # NaN when no train step ran after this episode
    team_reward: float  # sum of team rewards over the episode
    success: bool

    def row(self) -> list:
        return [self.step, self.episode, f"{self.epsilon:.6f}",
                "" if np.isnan(self.loss) else f"{self.loss:.8g}",
                f"{self.team_reward:.6g}", int(self.success)]


@dataclass
class MaskAudit:
    """Evidence that the action filter held throughout a run."""

    executions: int = 0
    disabled_executions: int = 0
    table_shrank: bool = False
    final_sizes: np.ndarray | None = None


@dataclass
class RolloutResult:
    episode: Episode
    transitions: list[Transition]
    success: bool
    team_return: float


class Agents:
    """Decentralised execution: each agent acts on its own observation history."""

    def __init__(self, learner: QmixLearner, table: DisabledActionTable,
                 rng: np.random.Generator, audit: MaskAudit | None = None):
        self.learner = learner
        self.table = table
        self.rng = rng
        self.audit = audit if audit is not None else MaskAudit()

    def rollout(self, env: MarlEnv, epsilon: float | Callable[[], float],
                learn_mask: bool = True, on_step: Callable[[Transition], None] | None = None
                ) -> RolloutResult:
        n = env.n_agents
        obs, state, occ = env.reset()
        hidden = [net.initial_hidden() for net in self.learner.agents]
        last = -np.ones(n, np.int64)
        obs_hist, state_hist, range_hist = [np.stack(obs)], [state], [buffer_range(occ)]
        actions_hist, rewards, terminal, transitions = [], [], [], []
        while True:
            eps = epsilon() if callable(epsilon) else epsilon
            b = range_hist[-1]
            qs, hidden = self.learner.act_values(obs, last, hidden)
            acts = np.empty(n, np.int64)
            for i in range(n):
                acts[i] = select_action(qs[i], eps, self.table.enabled_mask(i, b), self.rng)
                self.audit.executions += 1
                self.audit.disabled_executions += self.table.is_disabled(i, b, acts[i])
            tr = env.step(acts)
            if tr.failure and learn_mask:
                before = self.table.sizes()
                for i in range(n):
                    self.table.add(i, b, int(acts[i]))
                self.audit.table_shrank |= bool(np.any(self.table.sizes() < before))
            if on_step is not None:
                on_step(tr)
            transitions.append(tr)
            actions_hist.append(acts)
            rewards.append(tr.reward)
            terminal.append(tr.terminal)
            obs, last = tr.obs, acts
            obs_hist.append(np.stack(obs))
            state_hist.append(tr.state)
            range_hist.append(buffer_range(min(tr.occupancy, 1.0)))
            if tr.terminal or tr.truncated:
                break
        ep = Episode(np.stack(obs_hist), np.stack(state_hist), np.stack(actions_hist),
                     np.array(rewards, float), np.array(terminal, bool), np.array(range_hist))
        success = not any(t.failure for t in transitions)
        return RolloutResult(ep, transitions, success, float(np.sum(rewards)))


@dataclass
class TrainResult:
    learner: QmixLearner
    table: DisabledActionTable
    logs: list[EpisodeLog] = field(default_factory=list)
    audit: MaskAudit = field(default_factory=MaskAudit)
    env_steps: int = 0

    @property
    def success(self) -> np.ndarray:
        return np.array([e.success for e in self.logs], bool)

    @property
    def returns(self) -> np.ndarray:
        return np.array([e.team_reward for e in self.logs])


def train(env: MarlEnv, hp: Hyperparams, seed: int = 0, episodes: int | None = None,
          max_env_steps: int | None = None,
          on_episode: Callable[[EpisodeLog, RolloutResult], None] | None = None,
          learner: QmixLearner | None = None,
          table: DisabledActionTable | None = None) -> TrainResult:
    """Collect an episode, store it, and take one train step once the replay is warm."""
    if env.n_actions != hp.n_levels:
        raise ValueError(f"env has {env.n_actions} actions, hyperparameters say {hp.n_levels}")
    if episodes is None and max_env_steps is None:
        max_env_steps = hp.max_env_steps
    ss = np.random.SeedSequence(seed)
    net_seed, act_seed, replay_seed = (int(s) for s in ss.generate_state(3))
    learner = learner or QmixLearner(env.n_agents, env.obs_dim, env.state_dim, hp, net_seed)
    table = table if table is not None else DisabledActionTable(env.n_agents, hp.n_levels)
    replay = EpisodeReplay(hp.buffer_size)
    replay_rng = np.random.default_rng(replay_seed)
    result = TrainResult(learner, table)
    agents = Agents(learner, table, np.random.default_rng(act_seed), result.audit)

    def eps_now() -> float:
        return epsilon_schedule(result.env_steps, hp.eps_start, hp.eps_end, hp.eps_decay_steps)

    def count(_tr):
        result.env_steps += 1

    ep_idx = 0
    while True:
        if episodes is not None and ep_idx >= episodes:
            break
        if max_env_steps is not None and result.env_steps >= max_env_steps:
            break
        eps_start = eps_now()
        ro = agents.rollout(env, eps_now, on_step=count)
        replay.add(ro.episode)
        loss = float("nan")
        if replay.can_sample(hp.batch_size):
            batch = replay.sample(hp.batch_size, replay_rng, hp.n_levels)
            loss = learner.train_step(batch, table.as_array())
        entry = EpisodeLog(result.env_steps, ep_idx, eps_start, loss, ro.team_return, ro.success)
        result.logs.append(entry)
        if on_episode is not None:
            on_episode(entry, ro)
        ep_idx += 1
    result.audit.final_sizes = table.sizes()
    return result


def write_train_log(logs: list[EpisodeLog], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOG_HEADER)
        for e in logs:
            w.writerow(e.row())


def greedy_joint_action(learner: QmixLearner, env: MarlEnv) -> tuple[int, ...]:
    obs, _, _ = env.reset()
    hidden = [net.initial_hidden() for net in learner.agents]
    qs, _ = learner.act_values(obs, -np.ones(env.n_agents, np.int64), hidden)
    return tuple(int(np.argmax(q)) for q in qs)


def episodes_to_fraction(returns: np.ndarray, frac: float = 0.8, window: int = 20,
                         tail: int = 50) -> int:
    """First episode whose moving-average return covers ``frac`` of the climb to the final level.

    The climb is measured from the first window's mean to the mean of the
    last ``tail`` episodes, so negative returns are handled.
    """
    returns = np.asarray(returns, float)
    if returns.size < max(window, tail):
        raise ValueError("not enough episodes for the convergence measure")
    smooth = np.convolve(returns, np.ones(window) / window, mode="valid")
    start, final = smooth[0], returns[-tail:].mean()
    if final <= start:
        return window - 1
    hit = np.flatnonzero(smooth >= start + frac * (final - start))
    return int(hit[0]) + window - 1
