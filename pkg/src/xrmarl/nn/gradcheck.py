"""Central-difference gradients, used as an oracle for :func:`backward`."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor, backward


@dataclass
class GradCheckReport:
    max_rel_error: float
    n_params: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def finite_difference_gradients(loss_fn: Callable[[], float], params: Sequence[Tensor],
                                step: float = 1e-5, order: int = 2) -> list[np.ndarray]:
    """Central differences for every scalar entry of every parameter.

    ``order=2`` is (L(p+h) - L(p-h)) / 2h. ``order=4`` adds the +-2h points,
    which cuts truncation error to O(h^4) and allows a larger h, so round-off
    (about eps |L| / h) shrinks too.

    ``loss_fn`` must read the current parameter values each time it is called.
    Parameters are restored exactly afterwards.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if order not in _STENCILS:
        raise ValueError(f"order must be one of {sorted(_STENCILS)}")
    offsets, coefs = _STENCILS[order]
    grads = []
    for p in params:
        p.data = np.array(p.data, dtype=np.float64, order="C")
        g = np.zeros_like(p.data)
        flat = p.data.reshape(-1)  # view; perturbations write through
        for i in range(flat.size):
            orig = flat[i]
            acc = 0.0
            for k, c in zip(offsets, coefs):
                flat[i] = orig + k * step
                v = float(loss_fn())
                if not np.isfinite(v):
                    flat[i] = orig
                    raise FloatingPointError(
                        f"non-finite loss while probing {p.name or 'parameter'}[{i}]")
                acc += c * v
            flat[i] = orig
            g.reshape(-1)[i] = acc / step
        grads.append(g)
    return grads


_STENCILS = {
    2: ((1, -1), (0.5, -0.5)),
    4: ((2, 1, -1, -2), (-1 / 12, 8 / 12, -8 / 12, 1 / 12)),
}


def relative_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-6) -> float:
    """max |a - b| / max(|a|, |b|, floor); the floor keeps near-zero entries from dominating."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


def check_gradients(loss_fn: Callable[[], Tensor], params: Sequence[Tensor],
                    tolerance: float = 1e-4, step: float = 1e-5,
                    order: int = 2) -> GradCheckReport:
    analytic = backward(loss_fn(), params)
    numeric = finite_difference_gradients(lambda: loss_fn().item(), params, step, order)
    err = max((relative_error(a, n) for a, n in zip(analytic, numeric)), default=0.0)
    return GradCheckReport(err, int(sum(p.data.size for p in params)), tolerance)
