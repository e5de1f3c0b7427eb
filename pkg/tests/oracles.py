"""Independent brute-force oracles. Deliberately naive: plain loops and
scalar math, sharing no code with the implementations they check."""
from __future__ import annotations

import math

import numpy as np


def conv1d_naive(x, w, b):
    """Triple-loop valid convolution: x (B,T,C), w (O,C,K), b (O)."""
    B, T, C = x.shape
    O, _, K = w.shape
    out = np.zeros((B, T - K + 1, O))
    for bi in range(B):
        for t in range(T - K + 1):
            for o in range(O):
                acc = b[o]
                for k in range(K):
                    for c in range(C):
                        acc += x[bi, t + k, c] * w[o, c, k]
                out[bi, t, o] = acc
    return out


def _sig(v: float) -> float:
    return 1.0 / (1.0 + math.exp(-v))


def lstm_cell_scalar(x_t, h_prev, c_prev, wx, wh, b):
    """One gating step in pure scalar math."""
    F = len(x_t)
    H = len(h_prev)
    pre = [0.0] * (4 * H)
    for j in range(4 * H):
        acc = b[j]
        for i in range(F):
            acc += x_t[i] * wx[i, j]
        for k in range(H):
            acc += h_prev[k] * wh[k, j]
        pre[j] = acc
    h_t = [0.0] * H
    c_t = [0.0] * H
    for u in range(H):
        i_g = _sig(pre[u])
        f_g = _sig(pre[H + u])
        g_g = math.tanh(pre[2 * H + u])
        o_g = _sig(pre[3 * H + u])
        c_t[u] = f_g * c_prev[u] + i_g * g_g
        h_t[u] = o_g * math.tanh(c_t[u])
    return np.array(h_t), np.array(c_t)


def lstm_sequence_scalar(x, length, wx, wh, b):
    """Unrolled scalar recurrence for one sample; returns h at the last
    valid step."""
    H = wh.shape[0]
    h = np.zeros(H)
    c = np.zeros(H)
    for t in range(length):
        h, c = lstm_cell_scalar(x[t], h, c, wx, wh, b)
    return h


def auc_pair_count(labels, scores):
    """O(n^2) pair enumeration with ties counted one half."""
    pos = [s for y, s in zip(labels, scores) if y == 1]
    neg = [s for y, s in zip(labels, scores) if y == 0]
    total = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                total += 1.0
            elif sp == sn:
                total += 0.5
    return total / (len(pos) * len(neg))


def motion_range_scan(values):
    """Per-feature max minus min via an explicit scan."""
    T, F = values.shape
    out = np.zeros(F)
    for f in range(F):
        lo = hi = values[0, f]
        for t in range(1, T):
            v = values[t, f]
            lo = min(lo, v)
            hi = max(hi, v)
        out[f] = hi - lo
    return out


def accuracy_count(labels, preds):
    hits = 0
    for y, p in zip(labels, preds):
        if y == p:
            hits += 1
    return hits / len(labels)


def f1_confusion(labels, preds, positive=1):
    tp = fp = fn = 0
    for y, p in zip(labels, preds):
        if p == positive and y == positive:
            tp += 1
        elif p == positive:
            fp += 1
        elif y == positive:
            fn += 1
    if tp == 0:
        return 0.0
    prec = tp / (tp + fp)
    rec = tp / (tp + fn)
    return 2 * prec * rec / (prec + rec)


def find_start_scan(frame_hits, dwell):
    """Exhaustive dwell-window scan over a {frame: bool} hit map."""
    if not frame_hits:
        return None
    last = max(frame_hits)
    for start in range(0, last - dwell + 2):
        if all(frame_hits.get(start + i, False) for i in range(dwell)):
            return start
    return None
