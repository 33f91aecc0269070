"""RMSprop parameter updates."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


@dataclass
class OptimizerState:
    lr: float = 8e-3
    decay: float = 0.99
    eps: float = 1e-5
    accumulators: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")


def optimizer_update(state: OptimizerState, params: list[Tensor],
                     grads: list[np.ndarray]) -> list[Tensor]:
    """In-place RMSprop step; raises FloatingPointError on non-finite grads.

    The accumulators are lazily created on the first call and must stay
    aligned with ``params`` afterwards.
    """
    if len(params) != len(grads):
        raise ValueError("params and grads are not aligned")
    for p, g in zip(params, grads):
        if g.shape != p.data.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.data.shape}")
        if not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite gradient; parameters left unchanged")
    if not state.accumulators:
        state.accumulators = [np.zeros_like(p.data) for p in params]
    elif len(state.accumulators) != len(params):
        raise ValueError("optimizer state does not match parameter list")

    rho = state.decay
    for p, g, m in zip(params, grads, state.accumulators):
        m *= rho
        m += (1.0 - rho) * g * g
        p.data = p.data - state.lr * g / (np.sqrt(m) + state.eps)
    return params


def clip_grad_norm(grads: list[np.ndarray], max_norm: float) -> tuple[list[np.ndarray], float]:
    total = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / (total + 1e-12)
        grads = [g * scale for g in grads]
    return grads, total
