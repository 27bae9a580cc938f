# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled convolution kernels.

The forward pass sums kernel taps in the same (channel, row, col) order as
kernels/reference.py, so forward outputs match the numpy fallback bit for
bit (the build disables FP contraction to keep the rounding sequence equal).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv2d_forward(double[:, :, :, ::1] x, double[:, :, :, ::1] w):
    cdef Py_ssize_t batch = x.shape[0], in_ch = x.shape[1], h = x.shape[2], wid = x.shape[3]
    cdef Py_ssize_t filters = w.shape[0], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t oh = h - kh + 1, ow = wid - kw + 1
    out_arr = np.empty((batch, filters, oh, ow))
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, f, i, j, c, di, dj
    cdef double acc
    for b in range(batch):
        for f in range(filters):
            for i in range(oh):
                for j in range(ow):
                    acc = 0.0
                    for c in range(in_ch):
                        for di in range(kh):
                            for dj in range(kw):
                                acc += x[b, c, i + di, j + dj] * w[f, c, di, dj]
                    out[b, f, i, j] = acc
    return out_arr


def conv2d_backward_input(double[:, :, :, ::1] gy, double[:, :, :, ::1] w,
                          Py_ssize_t h, Py_ssize_t wid):
    cdef Py_ssize_t batch = gy.shape[0], filters = gy.shape[1], oh = gy.shape[2], ow = gy.shape[3]
    cdef Py_ssize_t in_ch = w.shape[1], kh = w.shape[2], kw = w.shape[3]
    gx_arr = np.zeros((batch, in_ch, h, wid))
    cdef double[:, :, :, ::1] gx = gx_arr
    cdef Py_ssize_t b, f, i, j, c, di, dj
    cdef double g
    for b in range(batch):
        for f in range(filters):
            for i in range(oh):
                for j in range(ow):
                    g = gy[b, f, i, j]
                    for c in range(in_ch):
                        for di in range(kh):
                            for dj in range(kw):
                                gx[b, c, i + di, j + dj] += g * w[f, c, di, dj]
    return gx_arr


def conv2d_backward_weights(double[:, :, :, ::1] gy, double[:, :, :, ::1] x,
                            Py_ssize_t kh, Py_ssize_t kw):
    cdef Py_ssize_t batch = gy.shape[0], filters = gy.shape[1], oh = gy.shape[2], ow = gy.shape[3]
    cdef Py_ssize_t in_ch = x.shape[1]
    gw_arr = np.zeros((filters, in_ch, kh, kw))
    cdef double[:, :, :, ::1] gw = gw_arr
    cdef Py_ssize_t b, f, i, j, c, di, dj
    cdef double g
    for b in range(batch):
        for f in range(filters):
            for i in range(oh):
                for j in range(ow):
                    g = gy[b, f, i, j]
                    for c in range(in_ch):
                        for di in range(kh):
                            for dj in range(kw):
                                gw[f, c, di, dj] += g * x[b, c, i + di, j + dj]
    return gw_arr
