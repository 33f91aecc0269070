"""Dense and GRU layers on top of :mod:`xrmarl.nn.tensor`."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, as_tensor

ACTIVATIONS = ("identity", "relu", "tanh", "sigmoid", "abs")


def orthogonal_init(rows: int, cols: int, seed: int, gain: float = 1.0) -> np.ndarray:
    """Random matrix with orthonormal rows (rows <= cols) or columns (rows > cols)."""
    if rows < 1 or cols < 1:
        raise ValueError(f"orthogonal_init needs rows, cols >= 1, got {rows}x{cols}")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    # sign fix makes the draw uniform over the orthogonal group
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q


class Module:
    """Anything holding trainable tensors as attributes or in lists of modules."""

    def named_parameters(self, prefix: str = "") -> list[tuple[str, Tensor]]:
        out = []
        for key, val in vars(self).items():
            name = f"{prefix}{key}"
            if isinstance(val, Tensor) and val.requires_grad:
                out.append((name, val))
            elif isinstance(val, Module):
                out.extend(val.named_parameters(name + "."))
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        out.extend(item.named_parameters(f"{name}.{i}."))
        return out

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: p.data.copy() for k, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = dict(self.named_parameters())
        if set(params) != set(state):
            missing = set(params) ^ set(state)
            raise KeyError(f"parameter name mismatch: {sorted(missing)}")
        for k, p in params.items():
            if p.data.shape != state[k].shape:
                raise ValueError(f"shape mismatch for {k}: {p.data.shape} vs {state[k].shape}")
            p.data = np.array(state[k], dtype=np.float64)


def _param(data, name: str) -> Tensor:
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True, name=name)


class DenseLayer(Module):
    def __init__(self, weights, bias=None, activation: str = "identity"):
        weights = np.atleast_2d(np.asarray(weights, dtype=np.float64))
        if bias is None:
            bias = np.zeros(weights.shape[0])
        bias = np.asarray(bias, dtype=np.float64).reshape(-1)
        if bias.shape[0] != weights.shape[0]:
            raise ValueError("bias length must equal weights.rows")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
            raise ValueError("layer parameters must be finite")
        self.weight = _param(weights, "weight")
        self.bias = _param(bias, "bias")
        self.activation = activation

    @classmethod
    def init(cls, n_in: int, n_out: int, seed: int, activation: str = "identity",
             gain: float = 1.0) -> DenseLayer:
        return cls(orthogonal_init(n_out, n_in, seed, gain), np.zeros(n_out), activation)

    @property
    def n_in(self) -> int:
        return self.weight.shape[1]

    @property
    def n_out(self) -> int:
        return self.weight.shape[0]

    def __call__(self, x) -> Tensor:
        return dense_forward(self, x)


def _activate(u: Tensor, activation: str) -> Tensor:
    if activation == "identity":
        return u
    return getattr(u, activation)()


def dense_forward(layer: DenseLayer, x) -> Tensor:
    """activation(W x + b) for a single vector or a batch in the leading axes."""
    x = as_tensor(x)
    if x.shape[-1] != layer.n_in:
        raise ValueError(f"dense_forward: input length {x.shape[-1]} != {layer.n_in}")
    return _activate(x @ _transpose(layer.weight) + layer.bias, layer.activation)


def _transpose(w: Tensor) -> Tensor:
    return Tensor._make(w.data.T, (w,), lambda g: (g.T,))


@dataclass
class GateBlock:
    input_weights: np.ndarray   # hidden x input
    recurrent_weights: np.ndarray  # hidden x hidden
    bias: np.ndarray | None = None


class GruCell(Module):
    """Gated recurrent unit with the reset gate applied before the recurrent product."""

    def __init__(self, update: GateBlock, reset: GateBlock, candidate: GateBlock):
        hidden = update.recurrent_weights.shape[0]
        n_in = update.input_weights.shape[1]
        for gate_name, block in (("update", update), ("reset", reset), ("candidate", candidate)):
            b = np.zeros(hidden) if block.bias is None else np.asarray(block.bias, float)
            if (np.shape(block.input_weights) != (hidden, n_in)
                    or np.shape(block.recurrent_weights) != (hidden, hidden)
                    or b.shape != (hidden,)):
                raise ValueError(f"GRU {gate_name} block inconsistent with hidden size {hidden}")
            short = {"update": "z", "reset": "r", "candidate": "h"}[gate_name]
            setattr(self, f"W{short}", _param(block.input_weights, f"W{short}"))
            setattr(self, f"U{short}", _param(block.recurrent_weights, f"U{short}"))
            setattr(self, f"b{short}", _param(b, f"b{short}"))
        self.hidden_size = hidden
        self.input_size = n_in

    @classmethod
    def init(cls, n_in: int, hidden: int, seed: int) -> GruCell:
        ss = np.random.SeedSequence(seed).generate_state(6)
        blocks = [
            GateBlock(orthogonal_init(hidden, n_in, int(ss[2 * i])),
                      orthogonal_init(hidden, hidden, int(ss[2 * i + 1])),
                      np.zeros(hidden))
            for i in range(3)
        ]
        return cls(*blocks)

    @classmethod
    def zeros(cls, n_in: int, hidden: int) -> GruCell:
        blocks = [GateBlock(np.zeros((hidden, n_in)), np.zeros((hidden, hidden)), np.zeros(hidden))
                  for _ in range(3)]
        return cls(*blocks)

    def __call__(self, x, h) -> Tensor:
        return gru_step(self, x, h)


def gru_step(cell: GruCell, x, h) -> Tensor:
    x, h = as_tensor(x), as_tensor(h)
    if x.shape[-1] != cell.input_size or h.shape[-1] != cell.hidden_size:
        raise ValueError(
            f"gru_step: got input {x.shape[-1]}, hidden {h.shape[-1]}; "
            f"cell expects {cell.input_size}, {cell.hidden_size}"
        )
    z = (x @ _transpose(cell.Wz) + h @ _transpose(cell.Uz) + cell.bz).sigmoid()
    r = (x @ _transpose(cell.Wr) + h @ _transpose(cell.Ur) + cell.br).sigmoid()
    cand = (x @ _transpose(cell.Wh) + (r * h) @ _transpose(cell.Uh) + cell.bh).tanh()
    return (1.0 - z) * h + z * cand
