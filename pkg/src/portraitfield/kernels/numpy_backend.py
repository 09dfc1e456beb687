"""Numpy implementations of the hot kernels.

Convolution is expressed as a strided sliding-window view contracted with
tensordot, which routes through BLAS. This is the fallback selected when the
compiled extension is unavailable; it also serves float64 inputs (used by the
finite-difference oracle), which the extension does not handle.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

NAME = "numpy"


def set_num_threads(n: int) -> None:
    # BLAS thread pools are process-global and configured via environment
    # variables before numpy loads; nothing to do per-call here.
    return None


def conv2d_forward(x, w, sh, sw, ph, pw):
    """x: (C_in, H, W), w: (C_out, C_in, kh, kw) -> (C_out, OH, OW)."""
    kh, kw = w.shape[2], w.shape[3]
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw))) if (ph or pw) else x
    windows = sliding_window_view(xp, (kh, kw), axis=(1, 2))[:, ::sh, ::sw]
    out = np.tensordot(w, windows, axes=([1, 2, 3], [0, 3, 4]))
    return np.ascontiguousarray(out)


def conv2d_backward_input(gy, w, x_shape, sh, sw, ph, pw):
    c_in, h, wdt = x_shape
    kh, kw = w.shape[2], w.shape[3]
    oh, ow = gy.shape[1], gy.shape[2]
    gxp = np.zeros((c_in, h + 2 * ph, wdt + 2 * pw), dtype=gy.dtype)
    for di in range(kh):
        for dj in range(kw):
            # (C_out, C_in) x (C_out, OH, OW) -> (C_in, OH, OW); output
            # positions land on a stride-spaced, non-overlapping slice
            t = np.tensordot(w[:, :, di, dj], gy, axes=([0], [0]))
            gxp[:, di : di + sh * oh : sh, dj : dj + sw * ow : sw] += t
    return np.ascontiguousarray(gxp[:, ph : ph + h, pw : pw + wdt])


def conv2d_backward_kernel(gy, x, kh, kw, sh, sw, ph, pw):
    c_out = gy.shape[0]
    c_in = x.shape[0]
    oh, ow = gy.shape[1], gy.shape[2]
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw))) if (ph or pw) else x
    gw = np.empty((c_out, c_in, kh, kw), dtype=gy.dtype)
    for di in range(kh):
        for dj in range(kw):
            xs = xp[:, di : di + sh * oh : sh, dj : dj + sw * ow : sw]
            gw[:, :, di, dj] = np.tensordot(gy, xs, axes=([1, 2], [1, 2]))
    return gw


def upsample2x_forward(x):
    return np.repeat(np.repeat(x, 2, axis=1), 2, axis=2)


def upsample2x_backward(gy):
    c, h2, w2 = gy.shape
    return gy.reshape(c, h2 // 2, 2, w2 // 2, 2).sum(axis=(2, 4))
