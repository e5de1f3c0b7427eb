"""Pure-numpy kernel backend.

Implements the same contracts as the compiled `_fast` extension; selected
automatically when the extension is unavailable (or forced via
SHOTINTENT_PURE_PY=1). Time-major layouts: activations are (B, T, C).
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _sigmoid(x):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def conv1d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Valid-mode temporal correlation.

    x: (B, T, C_in), w: (C_out, C_in, K), b: (C_out) -> (B, T-K+1, C_out)
    """
    K = w.shape[2]
    windows = sliding_window_view(x, K, axis=1)  # (B, T-K+1, C_in, K)
    return np.einsum("btck,ock->bto", windows, w, optimize=True) + b


def conv1d_backward(x, w, dy):
    """Gradients of conv1d_forward w.r.t. input, weights, bias."""
    K = w.shape[2]
    xwin = sliding_window_view(x, K, axis=1)  # (B, To, C, K)
    dw = np.einsum("bto,btck->ock", dy, xwin, optimize=True)
    db = dy.sum(axis=(0, 1))
    dy_pad = np.pad(dy, ((0, 0), (K - 1, K - 1), (0, 0)))
    ywin = sliding_window_view(dy_pad, K, axis=1)  # (B, T, O, K)
    dx = np.einsum("btok,ock->btc", ywin, w[:, :, ::-1], optimize=True)
    return dx, dw, db


def lstm_forward(gates_pre, lengths, wh):
    """Run the gated recurrence over precomputed input projections.

    gates_pre: (B, T, 4H) input contribution X @ Wx + b, gate blocks
    ordered [input, forget, candidate, output]. lengths: (B,) valid steps
    per sample; steps at or beyond a sample's length leave its state
    untouched, so zero padding never reaches the output.

    Returns (h_last (B, H), cache) where cache feeds lstm_backward.
    """
    B, T, H4 = gates_pre.shape
    H = H4 // 4
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    gates_act = np.empty((B, T, H4))
    c_hist = np.empty((B, T, H))
    tanh_c = np.empty((B, T, H))
    h_hist = np.empty((B, T, H))
    for t in range(T):
        m = (lengths > t)[:, None]
        pre = gates_pre[:, t] + h @ wh
        i = _sigmoid(pre[:, :H])
        f = _sigmoid(pre[:, H : 2 * H])
        g = np.tanh(pre[:, 2 * H : 3 * H])
        o = _sigmoid(pre[:, 3 * H :])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        c = np.where(m, c_new, c)
        h = np.where(m, h_new, h)
        gates_act[:, t, :H] = i
        gates_act[:, t, H : 2 * H] = f
        gates_act[:, t, 2 * H : 3 * H] = g
        gates_act[:, t, 3 * H :] = o
        c_hist[:, t] = c
        tanh_c[:, t] = tc
        h_hist[:, t] = h
    cache = (gates_act, c_hist, tanh_c, h_hist, np.asarray(lengths))
    return h.copy(), cache


def lstm_backward(cache, wh, d_h_last):
    """Backpropagate through the recurrence.

    Returns (d_gates_pre (B, T, 4H), d_wh); rows of d_gates_pre beyond a
    sample's valid length are zero.
    """
    gates_act, c_hist, tanh_c, h_hist, lengths = cache
    B, T, H4 = gates_act.shape
    H = H4 // 4
    dh = np.array(d_h_last, dtype=np.float64, copy=True)
    dc = np.zeros((B, H))
    d_gates_pre = np.zeros((B, T, H4))
    dwh = np.zeros_like(wh)
    zeros = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        m = (lengths > t)[:, None]
        i = gates_act[:, t, :H]
        f = gates_act[:, t, H : 2 * H]
        g = gates_act[:, t, 2 * H : 3 * H]
        o = gates_act[:, t, 3 * H :]
        tc = tanh_c[:, t]
        c_prev = c_hist[:, t - 1] if t > 0 else zeros
        h_prev = h_hist[:, t - 1] if t > 0 else zeros

        do = dh * tc
        dct = dh * o * (1.0 - tc * tc) + dc
        dpre = np.concatenate(
            [
                dct * g * i * (1.0 - i),
                dct * c_prev * f * (1.0 - f),
                dct * i * (1.0 - g * g),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        dpre = np.where(m, dpre, 0.0)
        d_gates_pre[:, t] = dpre
        dwh += h_prev.T @ dpre
        dh = np.where(m, dpre @ wh.T, dh)
        dc = np.where(m, dct * f, dc)
    return d_gates_pre, dwh
