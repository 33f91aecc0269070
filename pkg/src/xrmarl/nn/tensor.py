"""Reverse-mode automatic differentiation over float64 numpy arrays.

Each operation records its parents and a closure that maps the upstream
gradient to the gradients of the parents.  The graph is rebuilt on every
forward pass, so recurrent unrolls and hypernetwork-generated weights are
handled without special casing.
"""
from __future__ import annotations

import contextlib
from typing import Callable, Iterable, Sequence

import numpy as np

_GRAD_ENABLED = True


class UsageError(RuntimeError):
    """Raised when the autodiff API is used out of order."""


@contextlib.contextmanager
def no_grad():
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    # sum out the axes numpy broadcasting added or stretched
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "name")
    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], Sequence[np.ndarray | None]] | None = None
        self.name = name

    # -- construction helpers -------------------------------------------------
    @staticmethod
    def _make(data, parents: tuple[Tensor, ...], backward) -> Tensor:
        out = Tensor(data)
        if _GRAD_ENABLED and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._backward = backward
        return out

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> Tensor:
        return Tensor(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- arithmetic ------------------------------------------------------------
    def __add__(self, other) -> Tensor:
        other = as_tensor(other)
        a_shape, b_shape = self.shape, other.shape
        return Tensor._make(
            self.data + other.data,
            (self, other),
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(g, b_shape)),
        )

    __radd__ = __add__

    def __neg__(self) -> Tensor:
        return Tensor._make(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other) -> Tensor:
        return self + (-as_tensor(other))

    def __rsub__(self, other) -> Tensor:
        return as_tensor(other) + (-self)

    def __mul__(self, other) -> Tensor:
        other = as_tensor(other)
        a, b = self.data, other.data
        return Tensor._make(
            a * b,
            (self, other),
            lambda g: (_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)),
        )

    __rmul__ = __mul__

    def __matmul__(self, other) -> Tensor:
        other = as_tensor(other)
        a, b = self.data, other.data

        def backward(g):
            if a.ndim == 1 and b.ndim == 2:
                return b @ g, np.outer(a, g)
            if a.ndim == 2 and b.ndim == 1:
                return np.outer(g, b), a.T @ g
            ga = g @ np.swapaxes(b, -1, -2)
            gb = np.swapaxes(a, -1, -2) @ g
            return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

        return Tensor._make(a @ b, (self, other), backward)

    def square(self) -> Tensor:
        a = self.data
        return Tensor._make(a * a, (self,), lambda g: (2.0 * a * g,))

    # -- reductions / shape -----------------------------------------------------
    def sum(self, axis=None, keepdims: bool = False) -> Tensor:
        shape = self.shape

        def backward(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return Tensor._make(self.data.sum(axis=axis, keepdims=keepdims), (self,), backward)

    def mean(self, axis=None) -> Tensor:
        n = self.data.size if axis is None else self.shape[axis]
        return self.sum(axis=axis) * (1.0 / n)

    def reshape(self, *shape) -> Tensor:
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        old = self.shape
        return Tensor._make(self.data.reshape(shape), (self,), lambda g: (g.reshape(old),))

    def __getitem__(self, idx) -> Tensor:
        shape = self.shape

        def backward(g):
            out = np.zeros(shape)
            np.add.at(out, idx, g)
            return (out,)

        return Tensor._make(self.data[idx], (self,), backward)

    def gather(self, index: np.ndarray) -> Tensor:
        """Pick one entry along the last axis; ``index`` has the leading shape."""
        index = np.asarray(index, dtype=np.int64)
        shape = self.shape
        picked = np.take_along_axis(self.data, index[..., None], axis=-1)[..., 0]

        def backward(g):
            out = np.zeros(shape)
            np.put_along_axis(out, index[..., None], g[..., None], axis=-1)
            return (out,)

        return Tensor._make(picked, (self,), backward)

    # -- element-wise nonlinearities -------------------------------------------
    def relu(self) -> Tensor:
        mask = self.data > 0
        return Tensor._make(self.data * mask, (self,), lambda g: (g * mask,))

    def tanh(self) -> Tensor:
        t = np.tanh(self.data)
        return Tensor._make(t, (self,), lambda g: (g * (1.0 - t * t),))

    def sigmoid(self) -> Tensor:
        s = _sigmoid(self.data)
        return Tensor._make(s, (self,), lambda g: (g * s * (1.0 - s),))

    def abs(self) -> Tensor:
        sign = np.sign(self.data)
        return Tensor._make(np.abs(self.data), (self,), lambda g: (g * sign,))

    def elu(self) -> Tensor:
        x = self.data
        neg = np.expm1(np.minimum(x, 0.0))
        out = np.where(x > 0, x, neg)
        return Tensor._make(out, (self,), lambda g: (g * np.where(x > 0, 1.0, neg + 1.0),))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # 1 / (1 + e^-x) via logaddexp so neither tail overflows
    return np.exp(-np.logaddexp(0.0, -x))


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    return Tensor._make(
        np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward
    )


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]

    def backward(g):
        return tuple(np.moveaxis(g, axis, 0))

    return Tensor._make(np.stack([t.data for t in tensors], axis=axis), tuple(tensors), backward)


def backward(loss: Tensor, params: Iterable[Tensor]) -> list[np.ndarray]:
    """Gradient of a scalar ``loss`` with respect to each of ``params``.

    Parameters that the loss does not depend on receive a zero gradient.
    """
    params = list(params)
    if not isinstance(loss, Tensor) or loss.data.size != 1:
        raise UsageError("backward needs a scalar Tensor produced by a forward pass")
    if loss._backward is None and not any(loss is p for p in params):
        raise UsageError("no forward pass recorded for this loss")

    order: list[Tensor] = []
    seen: set[int] = set()
    stack_ = [(loss, False)]
    while stack_:
        node, expanded = stack_.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack_.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack_.append((p, False))

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(order):
        g = grads.get(id(node))
        if g is None or node._backward is None:
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg
    return [grads.get(id(p), np.zeros_like(p.data)).reshape(p.shape) for p in params]
