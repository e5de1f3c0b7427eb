"""Differentiable operations.

Every op takes the active tape as its first argument; pass tape=None for
inference-only forward passes. Gradients accumulate additively, so shared
inputs and parameter reuse are handled by construction.
"""
from __future__ import annotations

import numpy as np

from .. import _kernels
from ..errors import ShapeMismatch
from .tensor import Tape, Tensor


def _needs_grad(*tensors: Tensor) -> bool:
    return any(t.requires_grad for t in tensors)


def _out(tape: Tape | None, data, *parents: Tensor) -> Tensor:
    return Tensor(data, requires_grad=tape is not None and _needs_grad(*parents))


def matmul(tape: Tape | None, a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape[-1] != b.data.shape[0]:
        raise ShapeMismatch(f"matmul {a.data.shape} x {b.data.shape}")
    out = _out(tape, a.data @ b.data, a, b)
    if out.requires_grad:
        def backward():
            g = out.grad
            if g is None:
                return
            a.accumulate(g @ b.data.T)
            b.accumulate(a.data.T @ g)
        tape.record(backward)
    return out


def add(tape: Tape | None, a: Tensor, b: Tensor) -> Tensor:
    """Elementwise add; b may broadcast (bias over leading axes)."""
    out = _out(tape, a.data + b.data, a, b)
    if out.requires_grad:
        def backward():
            g = out.grad
            if g is None:
                return
            a.accumulate(g)
            gb = g
            while gb.ndim > b.data.ndim:
                gb = gb.sum(axis=0)
            b.accumulate(gb)
        tape.record(backward)
    return out


def relu(tape: Tape | None, x: Tensor) -> Tensor:
    out = _out(tape, np.maximum(x.data, 0.0), x)
    if out.requires_grad:
        mask = x.data > 0.0
        def backward():
            if out.grad is not None:
                x.accumulate(out.grad * mask)
        tape.record(backward)
    return out


def conv1d(tape: Tape | None, x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Valid-mode temporal convolution over all input channels.

    x: (B, T, C_in); w: (C_out, C_in, K); b: (C_out,).
    """
    B, T, C = x.data.shape
    O, Cw, K = w.data.shape
    if Cw != C:
        raise ShapeMismatch(f"conv1d channels: input {C}, weight {Cw}")
    if K > T:
        raise ShapeMismatch(f"conv1d kernel {K} longer than input {T}")
    out = _out(tape, _kernels.conv1d_forward(x.data, w.data, b.data), x, w, b)
    if out.requires_grad:
        def backward():
            g = out.grad
            if g is None:
                return
            dx, dw, db = _kernels.conv1d_backward(x.data, w.data, g)
            x.accumulate(dx)
            w.accumulate(dw)
            b.accumulate(db)
        tape.record(backward)
    return out


def maxpool1d(tape: Tape | None, x: Tensor, width: int) -> Tensor:
    """Non-overlapping temporal max pooling; trailing remainder dropped."""
    B, T, C = x.data.shape
    To = T // width
    if To < 1:
        raise ShapeMismatch(f"maxpool width {width} on length {T}")
    win = x.data[:, : To * width].reshape(B, To, width, C)
    idx = win.argmax(axis=2)
    out = _out(tape, np.take_along_axis(win, idx[:, :, None, :], axis=2)[:, :, 0, :], x)
    if out.requires_grad:
        def backward():
            g = out.grad
            if g is None:
                return
            dwin = np.zeros((B, To, width, C))
            np.put_along_axis(dwin, idx[:, :, None, :], g[:, :, None, :], axis=2)
            dx = np.zeros_like(x.data)
            dx[:, : To * width] = dwin.reshape(B, To * width, C)
            x.accumulate(dx)
        tape.record(backward)
    return out


def global_avg_pool(tape: Tape | None, x: Tensor) -> Tensor:
    """Mean over the time axis: (B, T, C) -> (B, C)."""
    B, T, C = x.data.shape
    out = _out(tape, x.data.mean(axis=1), x)
    if out.requires_grad:
        def backward():
            g = out.grad
            if g is None:
                return
            x.accumulate(np.broadcast_to(g[:, None, :] / T, (B, T, C)))
        tape.record(backward)
    return out


def lstm(
    tape: Tape | None,
    x: Tensor,
    lengths: np.ndarray,
    wx: Tensor,
    wh: Tensor,
    b: Tensor,
) -> Tensor:
    """Gated recurrence over a padded batch; returns h at each sample's
    last valid step, shape (B, H). Padding rows are never read.

    wx: (F, 4H), wh: (H, 4H), b: (4H,), gate blocks [input, forget,
    candidate, output].
    """
    B, T, F = x.data.shape
    if wx.data.shape[0] != F:
        raise ShapeMismatch(f"lstm input width {F} vs wx {wx.data.shape}")
    gates_pre = x.data.reshape(B * T, F) @ wx.data
    gates_pre += b.data
    gates_pre = gates_pre.reshape(B, T, -1)
    h_last, cache = _kernels.lstm_forward(gates_pre, lengths, wh.data)
    out = _out(tape, h_last, x, wx, wh, b)
    if out.requires_grad:
        def backward():
            g = out.grad
            if g is None:
                return
            dgp, dwh = _kernels.lstm_backward(cache, wh.data, g)
            flat = dgp.reshape(B * T, -1)
            x.accumulate((flat @ wx.data.T).reshape(B, T, F))
            wx.accumulate(x.data.reshape(B * T, F).T @ flat)
            wh.accumulate(dwh)
            b.accumulate(flat.sum(axis=0))
        tape.record(backward)
    return out


def lstm_cell_forward(x_t, h_prev, c_prev, wx, wh, b):
    """Single gating step on plain arrays (no tape).

    x_t: (F,), h_prev/c_prev: (H,). Returns (h_t, c_t).
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    c_prev = np.asarray(c_prev, dtype=np.float64)
    H = h_prev.shape[0]
    if wx.shape != (x_t.shape[0], 4 * H) or wh.shape != (H, 4 * H):
        raise ShapeMismatch(
            f"lstm cell shapes: x {x_t.shape}, wx {wx.shape}, wh {wh.shape}"
        )
    pre = x_t @ wx + h_prev @ wh + b
    with np.errstate(over="ignore"):
        i = 1.0 / (1.0 + np.exp(-pre[:H]))
        f = 1.0 / (1.0 + np.exp(-pre[H : 2 * H]))
        g = np.tanh(pre[2 * H : 3 * H])
        o = 1.0 / (1.0 + np.exp(-pre[3 * H :]))
    c_t = f * c_prev + i * g
    h_t = o * np.tanh(c_t)
    return h_t, c_t


def softmax_probs(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax on plain arrays (inference path)."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(
    tape: Tape | None,
    logits: Tensor,
    labels: np.ndarray,
    sample_weights: np.ndarray | None = None,
) -> Tensor:
    """Weighted mean cross-entropy on softmax logits; labels are int class ids."""
    B = logits.data.shape[0]
    if labels.shape[0] != B:
        raise ShapeMismatch(f"{labels.shape[0]} labels for batch of {B}")
    probs = softmax_probs(logits.data)
    if sample_weights is None:
        w = np.ones(B)
    else:
        w = np.asarray(sample_weights, dtype=np.float64)
    wsum = w.sum()
    picked = probs[np.arange(B), labels]
    loss_val = float((w * -np.log(np.maximum(picked, 1e-300))).sum() / wsum)
    out = _out(tape, loss_val, logits)
    if out.requires_grad:
        def backward():
            g = out.grad
            if g is None:
                return
            d = probs.copy()
            d[np.arange(B), labels] -= 1.0
            d *= (w / wsum)[:, None]
            logits.accumulate(d * g)
        tape.record(backward)
    return out
