"""Dense 64-bit tensors and the recorded-op tape for reverse-mode gradients."""
from __future__ import annotations

import numpy as np

from ..errors import NonFiniteGradient, ShapeMismatch


class Tensor:
    """A float64 array node. Parameters set requires_grad=True."""

    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad

    @property
    def shape(self):
        return self.data.shape

    def zero_grad(self):
        self.grad = None

    def accumulate(self, grad: np.ndarray):
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64, copy=True)
        else:
            self.grad = self.grad + grad

    def grad_or_zeros(self) -> np.ndarray:
        """Gradient after backward; exactly zero for nodes the loss never reached."""
        if self.grad is None:
            return np.zeros_like(self.data)
        return self.grad

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


class Tape:
    """Records each op's backward closure in forward order.

    backward() seeds the loss gradient and replays the closures in reverse,
    accumulating into every reachable tensor with requires_grad set.
    """

    def __init__(self):
        self._ops: list = []

    def record(self, backward_fn):
        self._ops.append(backward_fn)

    def __len__(self):
        return len(self._ops)

    def backward(self, loss: Tensor):
        if loss.data.size != 1:
            raise ShapeMismatch(f"loss must be scalar, got shape {loss.data.shape}")
        loss.grad = np.ones_like(loss.data)
        for fn in reversed(self._ops):
            fn()


def check_finite(arrays, what: str = "gradient"):
    """Raise NonFiniteGradient if any array contains NaN or infinity."""
    for arr in arrays:
        if arr is not None and not np.isfinite(arr).all():
            raise NonFiniteGradient(f"non-finite {what} encountered")
