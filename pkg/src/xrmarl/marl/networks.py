"""Recurrent per-agent Q-networks and the state-conditioned monotone mixer."""
from __future__ import annotations

import copy

import numpy as np

from ..nn import DenseLayer, GruCell, Module, Tensor, concat, stack
from ..nn.tensor import as_tensor


class AgentNet(Module):
    """dense(relu) -> GRU -> dense head giving one Q-value per codec level."""

    def __init__(self, obs_dim: int, n_actions: int, hidden: int = 64, seed: int = 0):
        ss = np.random.SeedSequence(seed).generate_state(3)
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.hidden = hidden
        self.fc_in = DenseLayer.init(obs_dim + n_actions, hidden, int(ss[0]), "relu")
        self.gru = GruCell.init(hidden, hidden, int(ss[1]))
        self.head = DenseLayer.init(hidden, n_actions, int(ss[2]))

    def initial_hidden(self, batch: int | None = None) -> np.ndarray:
        return np.zeros(self.hidden if batch is None else (batch, self.hidden))

    def __call__(self, obs, last_action_onehot, hidden) -> tuple[Tensor, Tensor]:
        return agent_q(self, obs, last_action_onehot, hidden)


def agent_q(net: AgentNet, obs, last_action_onehot, hidden) -> tuple[Tensor, Tensor]:
    obs, last, hidden = as_tensor(obs), as_tensor(last_action_onehot), as_tensor(hidden)
    if obs.shape[-1] != net.obs_dim:
        raise ValueError(f"observation length {obs.shape[-1]} != {net.obs_dim}")
    if last.shape[-1] != net.n_actions:
        raise ValueError(f"last-action one-hot length {last.shape[-1]} != {net.n_actions}")
    x = net.fc_in(concat([obs, last], axis=-1))
    h = net.gru(x, hidden)
    return net.head(h), h


def unroll_agent(net: AgentNet, obs: np.ndarray, last_onehot: np.ndarray) -> Tensor:
    """Q-values for a batch of sequences, shape (B, T, K), hidden state starting at zero."""
    batch, steps = obs.shape[:2]
    x_all = net.fc_in(np.concatenate([obs, last_onehot], axis=-1))
    h = as_tensor(net.initial_hidden(batch))
    hs = []
    for t in range(steps):
        h = net.gru(x_all[:, t], h)
        hs.append(h)
    return net.head(stack(hs, axis=1))


class MixerNet(Module):
    """Q_tot = |w2(s)|ᵀ elu(|W1(s)| q + b1(s)) + b2(s)."""

    def __init__(self, n_agents: int, state_dim: int, embed: int = 32, hyper_hidden: int = 64,
                 seed: int = 0):
        ss = [int(x) for x in np.random.SeedSequence(seed).generate_state(7)]
        self.n_agents = n_agents
        self.state_dim = state_dim
        self.embed = embed
        self.w1_hidden = DenseLayer.init(state_dim, hyper_hidden, ss[0], "relu")
        self.w1_out = DenseLayer.init(hyper_hidden, n_agents * embed, ss[1])
        self.b1 = DenseLayer.init(state_dim, embed, ss[2])
        self.w2_hidden = DenseLayer.init(state_dim, hyper_hidden, ss[3], "relu")
        self.w2_out = DenseLayer.init(hyper_hidden, embed, ss[4])
        self.b2_hidden = DenseLayer.init(state_dim, hyper_hidden, ss[5], "relu")
        self.b2_out = DenseLayer.init(hyper_hidden, 1, ss[6])

    def __call__(self, agent_qs, state) -> Tensor:
        return mix(agent_qs, state, self)

    def mixing_weights(self, state) -> tuple[Tensor, Tensor, Tensor, Tensor]:
        """(W1, b1, w2, b2) for a batch of states; W1 and w2 are non-negative."""
        s = as_tensor(state)
        lead = s.shape[:-1]
        w1 = self.w1_out(self.w1_hidden(s)).abs().reshape(*lead, self.n_agents, self.embed)
        b1 = self.b1(s)
        w2 = self.w2_out(self.w2_hidden(s)).abs()
        b2 = self.b2_out(self.b2_hidden(s)).reshape(*lead)
        return w1, b1, w2, b2


def mix(agent_qs, state, net: MixerNet) -> Tensor:
    q = as_tensor(agent_qs)
    if q.shape[-1] != net.n_agents:
        raise ValueError(f"expected {net.n_agents} agent values, got {q.shape[-1]}")
    w1, b1, w2, b2 = net.mixing_weights(state)
    lead = q.shape[:-1]
    hidden = (q.reshape(*lead, 1, net.n_agents) @ w1).reshape(*lead, net.embed) + b1
    return (hidden.elu() * w2).sum(axis=-1) + b2


def hard_update(target: Module, source: Module) -> None:
    target.load_state_dict(source.state_dict())


def clone(module: Module) -> Module:
    return copy.deepcopy(module)
