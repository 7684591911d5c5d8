"""Numeric inner loops: 1-D convolution, max-pooling, DTW, pairwise distances.

Every kernel exists twice:

* ``*_loop`` -- explicit loops (im2col + BLAS ``dot`` for convolutions),
  compiled with numba when available;
* ``*_numpy`` -- vectorised numpy, used when numba is off or missing.

The public names (``conv1d_forward`` etc.) are bound to one of the two at
import time according to :data:`t2p._accel.USE_NUMBA`. Both variants are
always importable so tests and ``benchmarks/`` can compare them directly.

All arrays are float64. Convolution inputs are ``(batch, channels, length)``
and already padded by the caller.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# conv1d (cross-correlation, no kernel flip)
# ---------------------------------------------------------------------------


def _im2col(x, width, stride, n_steps):
    n_batch, n_in, _ = x.shape
    col = np.empty((n_in * width, n_batch * n_steps))
    for b in range(n_batch):
        for c in range(n_in):
            for j in range(width):
                row = c * width + j
                for t in range(n_steps):
                    col[row, b * n_steps + t] = x[b, c, t * stride + j]
    return col


def _grad_matrix(grad):
    n_batch, n_out, n_steps = grad.shape
    gm = np.empty((n_out, n_batch * n_steps))
    for b in range(n_batch):
        for o in range(n_out):
            for t in range(n_steps):
                gm[o, b * n_steps + t] = grad[b, o, t]
    return gm


def _conv1d_forward_loop(x, w, stride):
    n_batch = x.shape[0]
    n_out, n_in, width = w.shape
    n_steps = (x.shape[2] - width) // stride + 1
    col = _im2col(x, width, stride, n_steps)
    res = np.dot(w.reshape(n_out, n_in * width), col)
    out = np.empty((n_batch, n_out, n_steps))
    for b in range(n_batch):
        for o in range(n_out):
            for t in range(n_steps):
                out[b, o, t] = res[o, b * n_steps + t]
    return out


def _conv1d_backward_input_loop(grad, w, stride, length):
    n_batch, n_out, n_steps = grad.shape
    _, n_in, width = w.shape
    dcol = np.dot(w.reshape(n_out, n_in * width).T.copy(), _grad_matrix(grad))
    gx = np.zeros((n_batch, n_in, length))
    for b in range(n_batch):
        for c in range(n_in):
            for j in range(width):
                row = c * width + j
                for t in range(n_steps):
                    gx[b, c, t * stride + j] += dcol[row, b * n_steps + t]
    return gx


def _conv1d_backward_weight_loop(grad, x, stride, width):
    n_out, n_steps = grad.shape[1], grad.shape[2]
    n_in = x.shape[1]
    col = _im2col(x, width, stride, n_steps)
    gw = np.dot(_grad_matrix(grad), col.T.copy())
    return gw.reshape(n_out, n_in, width)


def _windows(x, width, stride):
    # (batch, channels, steps, width) view
    return sliding_window_view(x, width, axis=2)[:, :, ::stride, :]


def _conv1d_forward_numpy(x, w, stride):
    win = _windows(x, w.shape[2], stride)
    out = np.tensordot(win, w, axes=([1, 3], [1, 2]))  # (batch, steps, out)
    return np.ascontiguousarray(out.transpose(0, 2, 1))


def _conv1d_backward_input_numpy(grad, w, stride, length):
    n_batch, _, n_steps = grad.shape
    _, n_in, width = w.shape
    gx = np.zeros((n_batch, n_in, length))
    span = stride * (n_steps - 1) + 1
    for j in range(width):
        # (batch, out, steps) x (out, in) -> (batch, steps, in)
        contrib = np.tensordot(grad, w[:, :, j], axes=([1], [0]))
        gx[:, :, j:j + span:stride] += contrib.transpose(0, 2, 1)
    return gx


def _conv1d_backward_weight_numpy(grad, x, stride, width):
    win = _windows(x, width, stride)
    return np.tensordot(grad, win, axes=([0, 2], [0, 2]))


# ---------------------------------------------------------------------------
# max-pool 1d; ties resolve to the earliest index
# ---------------------------------------------------------------------------


def _maxpool1d_forward_loop(x, window, stride):
    n_batch, n_ch, length = x.shape
    n_steps = (length - window) // stride + 1
    out = np.empty((n_batch, n_ch, n_steps))
    idx = np.empty((n_batch, n_ch, n_steps), dtype=np.int64)
    for b in range(n_batch):
        for c in range(n_ch):
            for t in range(n_steps):
                base = t * stride
                best = x[b, c, base]
                arg = base
                for j in range(1, window):
                    v = x[b, c, base + j]
                    if v > best:
                        best = v
                        arg = base + j
                out[b, c, t] = best
                idx[b, c, t] = arg
    return out, idx


def _maxpool1d_backward_loop(grad, idx, length):
    n_batch, n_ch, n_steps = grad.shape
    gx = np.zeros((n_batch, n_ch, length))
    for b in range(n_batch):
        for c in range(n_ch):
            for t in range(n_steps):
                gx[b, c, idx[b, c, t]] += grad[b, c, t]
    return gx


def _maxpool1d_forward_numpy(x, window, stride):
    win = _windows(x, window, stride)
    arg = win.argmax(axis=-1)
    out = np.take_along_axis(win, arg[..., None], axis=-1)[..., 0]
    idx = arg + stride * np.arange(win.shape[2])
    return np.ascontiguousarray(out), idx.astype(np.int64)


def _maxpool1d_backward_numpy(grad, idx, length):
    n_batch, n_ch, _ = grad.shape
    gx = np.zeros((n_batch, n_ch, length))
    np.add.at(gx, (np.arange(n_batch)[:, None, None], np.arange(n_ch)[None, :, None], idx), grad)
    return gx


# ---------------------------------------------------------------------------
# DTW: squared point cost, symmetric (1,1,1) steps, optional Sakoe-Chiba band
# ---------------------------------------------------------------------------


def _dtw_cost_loop(a, b, band):
    n = a.shape[0]
    m = b.shape[0]
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        lo = 1
        hi = m
        if band >= 0:
            lo = max(1, i - band)
            hi = min(m, i + band)
        for j in range(lo, hi + 1):
            d = a[i - 1] - b[j - 1]
            best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            if acc[i - 1, j - 1] < best:
                best = acc[i - 1, j - 1]
            acc[i, j] = d * d + best
    return acc[n, m]


def _dtw_cost_numpy(a, b, band):
    # sweep anti-diagonals i + j = s; same additions as the loop, so identical bits
    n = a.shape[0]
    m = b.shape[0]
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    cost = (a[:, None] - b[None, :]) ** 2
    for s in range(2, n + m + 1):
        i = np.arange(max(1, s - m), min(n, s - 1) + 1)
        j = s - i
        if band >= 0:
            keep = np.abs(i - j) <= band
            i = i[keep]
            j = j[keep]
            if i.size == 0:
                continue
        best = np.minimum(np.minimum(acc[i - 1, j], acc[i, j - 1]), acc[i - 1, j - 1])
        acc[i, j] = cost[i - 1, j - 1] + best
    return acc[n, m]


def _dtw_matrix_loop(series, band):
    n = series.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = np.sqrt(_dtw_cost_nb(series[i], series[j], band))
            out[i, j] = d
            out[j, i] = d
    return out


def _dtw_matrix_numpy(series, band):
    n = series.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = np.sqrt(_dtw_cost_numpy(series[i], series[j], band))
            out[i, j] = d
            out[j, i] = d
    return out


# ---------------------------------------------------------------------------
# pairwise Euclidean distance between rows (rows already z-normalised)
# ---------------------------------------------------------------------------


def _pairwise_euclidean_loop(rows):
    n, m = rows.shape
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for t in range(m):
                d = rows[i, t] - rows[j, t]
                acc += d * d
            out[i, j] = np.sqrt(acc)
            out[j, i] = out[i, j]
    return out


def _pairwise_euclidean_numpy(rows):
    n = rows.shape[0]
    out = np.zeros((n, n))
    for i in range(n - 1):
        diff = rows[i + 1:] - rows[i]
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        out[i, i + 1:] = d
        out[i + 1:, i] = d
    return out


# ---------------------------------------------------------------------------
# binding
# ---------------------------------------------------------------------------

_im2col = njit(_im2col) or _im2col
_grad_matrix = njit(_grad_matrix) or _grad_matrix
_conv1d_forward_nb = njit(_conv1d_forward_loop)
_conv1d_backward_input_nb = njit(_conv1d_backward_input_loop)
_conv1d_backward_weight_nb = njit(_conv1d_backward_weight_loop)
_maxpool1d_forward_nb = njit(_maxpool1d_forward_loop)
_maxpool1d_backward_nb = njit(_maxpool1d_backward_loop)
_dtw_cost_nb = njit(_dtw_cost_loop)
_dtw_matrix_nb = njit(_dtw_matrix_loop) if _dtw_cost_nb is not None else None
_pairwise_euclidean_nb = njit(_pairwise_euclidean_loop)

NUMPY_KERNELS = {
    "conv1d_forward": _conv1d_forward_numpy,
    "conv1d_backward_input": _conv1d_backward_input_numpy,
    "conv1d_backward_weight": _conv1d_backward_weight_numpy,
    "maxpool1d_forward": _maxpool1d_forward_numpy,
    "maxpool1d_backward": _maxpool1d_backward_numpy,
    "dtw_cost": _dtw_cost_numpy,
    "dtw_matrix": _dtw_matrix_numpy,
    "pairwise_euclidean": _pairwise_euclidean_numpy,
}

NUMBA_KERNELS = {
    "conv1d_forward": _conv1d_forward_nb,
    "conv1d_backward_input": _conv1d_backward_input_nb,
    "conv1d_backward_weight": _conv1d_backward_weight_nb,
    "maxpool1d_forward": _maxpool1d_forward_nb,
    "maxpool1d_backward": _maxpool1d_backward_nb,
    "dtw_cost": _dtw_cost_nb,
    "dtw_matrix": _dtw_matrix_nb,
    "pairwise_euclidean": _pairwise_euclidean_nb,
}

_ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS

conv1d_forward = _ACTIVE["conv1d_forward"]
conv1d_backward_input = _ACTIVE["conv1d_backward_input"]
conv1d_backward_weight = _ACTIVE["conv1d_backward_weight"]
maxpool1d_forward = _ACTIVE["maxpool1d_forward"]
maxpool1d_backward = _ACTIVE["maxpool1d_backward"]
dtw_cost = _ACTIVE["dtw_cost"]
dtw_matrix = _ACTIVE["dtw_matrix"]
pairwise_euclidean = _ACTIVE["pairwise_euclidean"]
