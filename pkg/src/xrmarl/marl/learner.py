"""Optimistically weighted QMIX learner."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..nn import OptimizerState, Tensor, backward, clip_grad_norm, no_grad, optimizer_update, stack
from .networks import AgentNet, MixerNet, clone, hard_update, unroll_agent
from .replay import EpisodeBatch

log = logging.getLogger(__name__)

MODES = ("qmix", "oqmix")


@dataclass
class Hyperparams:
    mode: str = "oqmix"
    gamma: float = 0.99
    lr: float = 8e-3
    rms_decay: float = 0.99
    rms_eps: float = 1e-5
    alpha: float = 0.1
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_steps: int = 15_000
    buffer_size: int = 2000
    batch_size: int = 64
    target_update_period: int = 200
    max_env_steps: int = 300_000
    n_levels: int = 8
    rnn_hidden: int = 64
    mixer_embed: int = 32
    hyper_hidden: int = 64
    grad_clip: float = 10.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ValueError("need 0 <= eps_end <= eps_start <= 1")
        if self.batch_size < 1 or self.buffer_size < self.batch_size:
            raise ValueError("buffer must hold at least one batch")
        if self.target_update_period < 1:
            raise ValueError("target update period must be positive")
        if self.n_levels < 2:
            raise ValueError("need at least two codec levels")


def optimistic_weight(q_tot, y, hp: Hyperparams):
    """1 where the estimate is below its target, α elsewhere (ties included)."""
    if hp.mode == "qmix":
        return np.ones_like(np.asarray(q_tot, dtype=float)) if np.ndim(q_tot) else 1.0
    w = np.where(np.asarray(q_tot) < np.asarray(y), 1.0, hp.alpha)
    return w if w.ndim else float(w)


def weighted_td_loss(q_tot: Tensor, targets: np.ndarray, weights: np.ndarray,
                     mask: np.ndarray) -> Tensor:
    """Mean over valid steps of w·(y − Q_tot)²; y and w enter as constants."""
    n_valid = float(np.sum(mask))
    if n_valid <= 0:
        raise ValueError("batch has no valid steps")
    err = Tensor(targets) - q_tot
    return (err.square() * (np.asarray(weights) * mask)).sum() * (1.0 / n_valid)


@dataclass
class LossParts:
    loss: Tensor
    q_tot: np.ndarray
    targets: np.ndarray
    weights: np.ndarray


class QmixLearner:
    """Agent networks, mixer, their target copies and the RMSprop state."""

    def __init__(self, n_agents: int, obs_dim: int, state_dim: int, hp: Hyperparams,
                 seed: int = 0):
        self.hp = hp
        self.n_agents = n_agents
        self.n_actions = hp.n_levels
        seeds = np.random.SeedSequence(seed).generate_state(n_agents + 1)
        self.agents = [AgentNet(obs_dim, hp.n_levels, hp.rnn_hidden, int(seeds[n]))
                       for n in range(n_agents)]
        self.mixer = MixerNet(n_agents, state_dim, hp.mixer_embed, hp.hyper_hidden,
                              int(seeds[-1]))
        self.target_agents = [clone(a) for a in self.agents]
        self.target_mixer = clone(self.mixer)
        self.optimizer = OptimizerState(hp.lr, hp.rms_decay, hp.rms_eps)
        self.train_steps = 0
        self.skipped_steps = 0

    def parameters(self) -> list[Tensor]:
        params = [p for a in self.agents for p in a.parameters()]
        return params + self.mixer.parameters()

    def update_targets(self) -> None:
        for tgt, src in zip(self.target_agents, self.agents):
            hard_update(tgt, src)
        hard_update(self.target_mixer, self.mixer)

    # -- loss --------------------------------------------------------------------
    def agent_values(self, agents: list[AgentNet], batch: EpisodeBatch) -> Tensor:
        """Per-agent Q-values over the whole padded batch, shape (B, T+1, N, K)."""
        qs = [unroll_agent(net, batch.obs[:, :, n], batch.last_onehot[:, :, n])
              for n, net in enumerate(agents)]
        return stack(qs, axis=2)

    def td_targets(self, batch: EpisodeBatch, q_eval_next: np.ndarray,
                   enabled_next: np.ndarray) -> np.ndarray:
        """Double-Q targets: evaluation nets choose, target nets score.

        ``q_eval_next`` and ``enabled_next`` are shaped (B, T, N, K) for s'.
        """
        hp = self.hp
        not_done = 1.0 - batch.terminal.astype(float)
        if hp.gamma == 0.0 or not np.any(not_done * batch.mask):
            return batch.rewards.copy()
        with no_grad():
            q_targ = self.agent_values(self.target_agents, batch).data[:, 1:]
            best = np.argmax(np.where(enabled_next, q_eval_next, -np.inf), axis=-1)
            chosen = np.take_along_axis(q_targ, best[..., None], axis=-1)[..., 0]
            q_tot_next = self.target_mixer(chosen, batch.state[:, 1:]).data
        return batch.rewards + hp.gamma * not_done * q_tot_next

    def loss(self, batch: EpisodeBatch, disabled: np.ndarray | None = None) -> LossParts:
        """Masked weighted squared TD error with targets and weights held constant.

        ``disabled`` is the (N, ranges, K) action-filter table used to
        restrict the bootstrap argmax; ``None`` leaves every action enabled.
        """
        q_all = self.agent_values(self.agents, batch)
        q_taken = q_all[:, :-1].gather(batch.actions)
        q_tot = self.mixer(q_taken, batch.state[:, :-1])

        if disabled is None:
            enabled_next = np.ones(q_all.shape[:1] + (batch.max_len,) + q_all.shape[2:], bool)
        else:
            rng_next = batch.ranges[:, 1:]
            enabled_next = ~np.stack(
                [disabled[n][rng_next] for n in range(self.n_agents)], axis=2)
        y = self.td_targets(batch, q_all.data[:, 1:], enabled_next)
        w = optimistic_weight(q_tot.data, y, self.hp) * batch.mask
        return LossParts(weighted_td_loss(q_tot, y, w, batch.mask), q_tot.data, y, w)

    def train_step(self, batch: EpisodeBatch, disabled: np.ndarray | None = None) -> float:
        """One RMSprop step; returns the loss, or NaN if the step was skipped."""
        parts = self.loss(batch, disabled)
        value = parts.loss.item()
        params = self.parameters()
        if not np.isfinite(value):
            self.skipped_steps += 1
            log.warning("non-finite loss at train step %d; skipped", self.train_steps)
            return float("nan")
        grads = backward(parts.loss, params)
        if self.hp.grad_clip > 0:
            grads, _ = clip_grad_norm(grads, self.hp.grad_clip)
        try:
            optimizer_update(self.optimizer, params, grads)
        except FloatingPointError:
            self.skipped_steps += 1
            log.warning("non-finite gradient at train step %d; skipped", self.train_steps)
            return float("nan")
        self.train_steps += 1
        if self.train_steps % self.hp.target_update_period == 0:
            self.update_targets()
        return value

    # -- acting ------------------------------------------------------------------
    def act_values(self, obs: list[np.ndarray], last_actions: np.ndarray,
                   hidden: list[np.ndarray]) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Single-step Q-values for every agent plus their new hidden states."""
        eye = np.eye(self.n_actions)
        qs, hs = [], []
        with no_grad():
            for n, net in enumerate(self.agents):
                last = eye[last_actions[n]] if last_actions[n] >= 0 else np.zeros(self.n_actions)
                q, h = net(obs[n], last, hidden[n])
                qs.append(q.data)
                hs.append(h.data)
        return qs, hs
