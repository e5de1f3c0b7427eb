# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel backend: conv and LSTM inner loops in C.

Same contracts as ``_reference``; see that module for shape conventions.
Weight tensors are transposed internally so the innermost loops run over
contiguous output channels.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()


cdef inline double _sigmoid(double x) noexcept nogil:
    return 1.0 / (1.0 + exp(-x))


def conv1d_forward(object x_in, object w_in, object b_in):
    x_arr = np.ascontiguousarray(x_in, dtype=np.float64)
    # (O, C, K) -> (K, C, O): output channel contiguous in the inner loop
    wt_arr = np.ascontiguousarray(np.transpose(np.asarray(w_in, dtype=np.float64), (2, 1, 0)))
    b_arr = np.ascontiguousarray(b_in, dtype=np.float64)

    cdef double[:, :, ::1] x = x_arr
    cdef double[:, :, ::1] wt = wt_arr
    cdef double[::1] b = b_arr
    cdef Py_ssize_t B = x.shape[0], T = x.shape[1], C = x.shape[2]
    cdef Py_ssize_t K = wt.shape[0], O = wt.shape[2]
    cdef Py_ssize_t To = T - K + 1

    y_arr = np.empty((B, To, O), dtype=np.float64)
    cdef double[:, :, ::1] y = y_arr
    cdef Py_ssize_t bi, t, o, k, c
    cdef double xv
    cdef double* yrow
    cdef const double* wrow

    with nogil:
        for bi in range(B):
            for t in range(To):
                yrow = &y[bi, t, 0]
                for o in range(O):
                    yrow[o] = b[o]
                for k in range(K):
                    for c in range(C):
                        xv = x[bi, t + k, c]
                        wrow = &wt[k, c, 0]
                        for o in range(O):
                            yrow[o] += xv * wrow[o]
    return y_arr


def conv1d_backward(object x_in, object w_in, object dy_in):
    x_arr = np.ascontiguousarray(x_in, dtype=np.float64)
    w_np = np.asarray(w_in, dtype=np.float64)
    wt_arr = np.ascontiguousarray(np.transpose(w_np, (2, 1, 0)))  # (K, C, O)
    dy_arr = np.ascontiguousarray(dy_in, dtype=np.float64)

    cdef double[:, :, ::1] x = x_arr
    cdef double[:, :, ::1] wt = wt_arr
    cdef double[:, :, ::1] dy = dy_arr
    cdef Py_ssize_t B = x.shape[0], T = x.shape[1], C = x.shape[2]
    cdef Py_ssize_t K = wt.shape[0], O = wt.shape[2]
    cdef Py_ssize_t To = T - K + 1

    dx_arr = np.zeros((B, T, C), dtype=np.float64)
    dwt_arr = np.zeros((K, C, O), dtype=np.float64)
    db_arr = np.zeros(O, dtype=np.float64)
    cdef double[:, :, ::1] dx = dx_arr
    cdef double[:, :, ::1] dwt = dwt_arr
    cdef double[::1] db = db_arr
    cdef Py_ssize_t bi, t, o, k, c
    cdef double acc, xv
    cdef const double* dyrow
    cdef const double* wrow
    cdef double* dwrow

    with nogil:
        for bi in range(B):
            for t in range(To):
                dyrow = &dy[bi, t, 0]
                for o in range(O):
                    db[o] += dyrow[o]
                for k in range(K):
                    for c in range(C):
                        wrow = &wt[k, c, 0]
                        dwrow = &dwt[k, c, 0]
                        xv = x[bi, t + k, c]
                        acc = 0.0
                        for o in range(O):
                            acc += dyrow[o] * wrow[o]
                            dwrow[o] += dyrow[o] * xv
                        dx[bi, t + k, c] += acc
    dw_arr = np.ascontiguousarray(np.transpose(dwt_arr, (2, 1, 0)))
    return dx_arr, dw_arr, db_arr


def lstm_forward(object gates_pre_in, object lengths_in, object wh_in):
    """Recurrence with the per-step hidden matmul in BLAS (via numpy) and
    the gate math in C. Steps at or beyond a sample's length leave its
    state untouched."""
    gp_arr = np.ascontiguousarray(gates_pre_in, dtype=np.float64)
    len_arr = np.ascontiguousarray(lengths_in, dtype=np.int64)
    wh_arr = np.ascontiguousarray(wh_in, dtype=np.float64)

    cdef double[:, :, ::1] gp = gp_arr
    cdef long long[::1] lengths = len_arr
    cdef Py_ssize_t B = gp.shape[0], T = gp.shape[1], H4 = gp.shape[2]
    cdef Py_ssize_t H = H4 // 4

    gates_act_arr = np.zeros((B, T, H4), dtype=np.float64)
    c_hist_arr = np.zeros((B, T, H), dtype=np.float64)
    tanh_c_arr = np.zeros((B, T, H), dtype=np.float64)
    h_hist_arr = np.zeros((B, T, H), dtype=np.float64)
    h_state = np.zeros((B, H), dtype=np.float64)
    c_state_arr = np.zeros((B, H), dtype=np.float64)

    cdef double[:, :, ::1] gates_act = gates_act_arr
    cdef double[:, :, ::1] c_hist = c_hist_arr
    cdef double[:, :, ::1] tanh_c = tanh_c_arr
    cdef double[:, :, ::1] h_hist = h_hist_arr
    cdef double[:, ::1] c_state = c_state_arr
    cdef double[:, ::1] h_view
    cdef double[:, ::1] pre

    cdef Py_ssize_t bi, t, u
    cdef double ig, fg, gg, og, cc, tc

    h_view = h_state
    for t in range(T):
        # (B, H) @ (H, 4H) through BLAS, then gate math in C
        pre_arr = np.add(h_state @ wh_arr, gp_arr[:, t, :])
        pre = pre_arr
        with nogil:
            for bi in range(B):
                if t >= lengths[bi]:
                    continue
                for u in range(H):
                    ig = _sigmoid(pre[bi, u])
                    fg = _sigmoid(pre[bi, H + u])
                    gg = tanh(pre[bi, 2 * H + u])
                    og = _sigmoid(pre[bi, 3 * H + u])
                    cc = fg * c_state[bi, u] + ig * gg
                    tc = tanh(cc)
                    gates_act[bi, t, u] = ig
                    gates_act[bi, t, H + u] = fg
                    gates_act[bi, t, 2 * H + u] = gg
                    gates_act[bi, t, 3 * H + u] = og
                    c_state[bi, u] = cc
                    c_hist[bi, t, u] = cc
                    tanh_c[bi, t, u] = tc
                    h_view[bi, u] = og * tc
                    h_hist[bi, t, u] = h_view[bi, u]

    cache = (gates_act_arr, c_hist_arr, tanh_c_arr, h_hist_arr, len_arr)
    return h_state.copy(), cache


def lstm_backward(object cache, object wh_in, object d_h_last_in):
    gates_act_arr, c_hist_arr, tanh_c_arr, h_hist_arr, len_arr = cache
    wh_arr = np.ascontiguousarray(wh_in, dtype=np.float64)
    dh_arr = np.array(d_h_last_in, dtype=np.float64, order="C", copy=True)

    cdef double[:, :, ::1] gates_act = gates_act_arr
    cdef double[:, :, ::1] c_hist = c_hist_arr
    cdef double[:, :, ::1] tanh_c = tanh_c_arr
    cdef long long[::1] lengths = len_arr

    cdef Py_ssize_t B = gates_act.shape[0], T = gates_act.shape[1]
    cdef Py_ssize_t H4 = gates_act.shape[2]
    cdef Py_ssize_t H = H4 // 4

    dgp_arr = np.zeros((B, T, H4), dtype=np.float64)
    dc_arr = np.zeros((B, H), dtype=np.float64)
    dpre_arr = np.zeros((B, H4), dtype=np.float64)

    cdef double[:, :, ::1] dgp = dgp_arr
    cdef double[:, ::1] dh = dh_arr
    cdef double[:, ::1] dc = dc_arr
    cdef double[:, ::1] dpre = dpre_arr

    cdef Py_ssize_t bi, t, u
    cdef double ig, fg, gg, og, tc, cprev, do_, dct

    # dWh = sum_t h_{t-1}^T dpre_t, accumulated through BLAS per step
    dwh_arr = np.zeros_like(wh_arr)

    for t in range(T - 1, -1, -1):
        with nogil:
            for bi in range(B):
                if t >= lengths[bi]:
                    for u in range(H4):
                        dpre[bi, u] = 0.0
                    continue
                for u in range(H):
                    ig = gates_act[bi, t, u]
                    fg = gates_act[bi, t, H + u]
                    gg = gates_act[bi, t, 2 * H + u]
                    og = gates_act[bi, t, 3 * H + u]
                    tc = tanh_c[bi, t, u]
                    cprev = c_hist[bi, t - 1, u] if t > 0 else 0.0
                    do_ = dh[bi, u] * tc
                    dct = dh[bi, u] * og * (1.0 - tc * tc) + dc[bi, u]
                    dpre[bi, u] = dct * gg * ig * (1.0 - ig)
                    dpre[bi, H + u] = dct * cprev * fg * (1.0 - fg)
                    dpre[bi, 2 * H + u] = dct * ig * (1.0 - gg * gg)
                    dpre[bi, 3 * H + u] = do_ * og * (1.0 - og)
                    dgp[bi, t, u] = dpre[bi, u]
                    dgp[bi, t, H + u] = dpre[bi, H + u]
                    dgp[bi, t, 2 * H + u] = dpre[bi, 2 * H + u]
                    dgp[bi, t, 3 * H + u] = dpre[bi, 3 * H + u]
                    dc[bi, u] = dct * fg
        if t > 0:
            dwh_arr += h_hist_arr[:, t - 1, :].T @ dpre_arr
        # dh passes through unchanged on frozen rows (dpre is zero there)
        dh_rec = dpre_arr @ wh_arr.T
        active = np.asarray(len_arr) > t
        np.copyto(dh_arr, dh_rec, where=active[:, None])
    return dgp_arr, dwh_arr
