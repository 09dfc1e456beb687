# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled float32 kernels: direct convolution and nearest-neighbor resampling.

Each parallel loop owns a disjoint slice of the output, so results are
deterministic for any thread count.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel import prange

cnp.import_array()

NAME = "accel"

cdef int _num_threads = 1


def set_num_threads(n):
    global _num_threads
    _num_threads = max(1, int(n))


def conv2d_forward(x, w, int sh, int sw, int ph, int pw):
    if ph or pw:
        x = np.pad(x, ((0, 0), (ph, ph), (pw, pw)))
    cdef float[:, :, ::1] xp = np.ascontiguousarray(x, dtype=np.float32)
    cdef float[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float32)
    cdef Py_ssize_t c_out = wv.shape[0], c_in = wv.shape[1]
    cdef Py_ssize_t kh = wv.shape[2], kw = wv.shape[3]
    cdef Py_ssize_t hp = xp.shape[1], wp = xp.shape[2]
    cdef Py_ssize_t oh = (hp - kh) // sh + 1, ow = (wp - kw) // sw + 1
    out_arr = np.zeros((c_out, oh, ow), dtype=np.float32)
    cdef float[:, :, ::1] out = out_arr
    cdef Py_ssize_t co, ci, di, dj, oy, ox
    cdef float wco
    cdef int nt = _num_threads
    for co in prange(c_out, nogil=True, num_threads=nt, schedule="static"):
        for ci in range(c_in):
            for di in range(kh):
                for dj in range(kw):
                    wco = wv[co, ci, di, dj]
                    for oy in range(oh):
                        for ox in range(ow):
                            out[co, oy, ox] += wco * xp[ci, oy * sh + di, ox * sw + dj]
    return out_arr


def conv2d_backward_input(gy, w, x_shape, int sh, int sw, int ph, int pw):
    cdef float[:, :, ::1] g = np.ascontiguousarray(gy, dtype=np.float32)
    cdef float[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float32)
    cdef Py_ssize_t c_out = wv.shape[0], c_in = wv.shape[1]
    cdef Py_ssize_t kh = wv.shape[2], kw = wv.shape[3]
    cdef Py_ssize_t h = x_shape[1], wdt = x_shape[2]
    cdef Py_ssize_t oh = g.shape[1], ow = g.shape[2]
    gxp_arr = np.zeros((c_in, h + 2 * ph, wdt + 2 * pw), dtype=np.float32)
    cdef float[:, :, ::1] gxp = gxp_arr
    cdef Py_ssize_t ci, co, di, dj, oy, ox
    cdef float wco
    cdef int nt = _num_threads
    for ci in prange(c_in, nogil=True, num_threads=nt, schedule="static"):
        for co in range(c_out):
            for di in range(kh):
                for dj in range(kw):
                    wco = wv[co, ci, di, dj]
                    for oy in range(oh):
                        for ox in range(ow):
                            gxp[ci, oy * sh + di, ox * sw + dj] += wco * g[co, oy, ox]
    if ph or pw:
        return np.ascontiguousarray(gxp_arr[:, ph : ph + h, pw : pw + wdt])
    return gxp_arr


def conv2d_backward_kernel(gy, x, int kh, int kw, int sh, int sw, int ph, int pw):
    if ph or pw:
        x = np.pad(x, ((0, 0), (ph, ph), (pw, pw)))
    cdef float[:, :, ::1] xp = np.ascontiguousarray(x, dtype=np.float32)
    cdef float[:, :, ::1] g = np.ascontiguousarray(gy, dtype=np.float32)
    cdef Py_ssize_t c_out = g.shape[0], c_in = xp.shape[0]
    cdef Py_ssize_t oh = g.shape[1], ow = g.shape[2]
    gw_arr = np.zeros((c_out, c_in, kh, kw), dtype=np.float32)
    cdef float[:, :, :, ::1] gw = gw_arr
    cdef Py_ssize_t co, ci, di, dj, oy, ox
    cdef float acc
    cdef int nt = _num_threads
    for co in prange(c_out, nogil=True, num_threads=nt, schedule="static"):
        for ci in range(c_in):
            for di in range(kh):
                for dj in range(kw):
                    acc = 0.0
                    for oy in range(oh):
                        for ox in range(ow):
                            acc = acc + g[co, oy, ox] * xp[ci, oy * sh + di, ox * sw + dj]
                    gw[co, ci, di, dj] = acc
    return gw_arr


def upsample2x_forward(x):
    cdef float[:, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float32)
    cdef Py_ssize_t c = xv.shape[0], h = xv.shape[1], w = xv.shape[2]
    out_arr = np.empty((c, 2 * h, 2 * w), dtype=np.float32)
    cdef float[:, :, ::1] out = out_arr
    cdef Py_ssize_t ci, i, j
    cdef float v
    cdef int nt = _num_threads
    for ci in prange(c, nogil=True, num_threads=nt, schedule="static"):
        for i in range(h):
            for j in range(w):
                v = xv[ci, i, j]
                out[ci, 2 * i, 2 * j] = v
                out[ci, 2 * i, 2 * j + 1] = v
                out[ci, 2 * i + 1, 2 * j] = v
                out[ci, 2 * i + 1, 2 * j + 1] = v
    return out_arr


def upsample2x_backward(gy):
    cdef float[:, :, ::1] g = np.ascontiguousarray(gy, dtype=np.float32)
    cdef Py_ssize_t c = g.shape[0], h = g.shape[1] // 2, w = g.shape[2] // 2
    out_arr = np.empty((c, h, w), dtype=np.float32)
    cdef float[:, :, ::1] out = out_arr
    cdef Py_ssize_t ci, i, j
    cdef int nt = _num_threads
    for ci in prange(c, nogil=True, num_threads=nt, schedule="static"):
        for i in range(h):
            for j in range(w):
                out[ci, i, j] = (
                    g[ci, 2 * i, 2 * j]
                    + g[ci, 2 * i, 2 * j + 1]
                    + g[ci, 2 * i + 1, 2 * j]
                    + g[ci, 2 * i + 1, 2 * j + 1]
                )
    return out_arr
