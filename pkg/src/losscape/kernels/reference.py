"""Numpy implementations of the convolution kernels.

These are the fallback used when the compiled extension is unavailable.
The forward pass accumulates kernel taps in (channel, row, col) order, the
same order the compiled kernel uses, so both backends produce bit-identical
outputs. The backward passes contract through BLAS and agree with the
compiled versions only to rounding (~1e-15 relative).
"""

import numpy as np


def conv2d_forward(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Valid (no padding), stride-1 2D convolution.

    x: (batch, in_ch, H, W) float64
    w: (filters, in_ch, KH, KW) float64
    returns (batch, filters, H-KH+1, W-KW+1)
    """
    batch, in_ch, h, wid = x.shape
    filters, _, kh, kw = w.shape
    oh, ow = h - kh + 1, wid - kw + 1
    out = np.zeros((batch, filters, oh, ow))
    for c in range(in_ch):
        for di in range(kh):
            for dj in range(kw):
                patch = x[:, None, c, di : di + oh, dj : dj + ow]
                out += patch * w[None, :, c, di, dj, None, None]
    return out


def conv2d_backward_input(gy: np.ndarray, w: np.ndarray, h: int, wid: int) -> np.ndarray:
    """Gradient of conv2d_forward w.r.t. its input, given upstream gy."""
    filters, in_ch, kh, kw = w.shape
    batch, _, oh, ow = gy.shape
    gx = np.zeros((batch, in_ch, h, wid))
    for di in range(kh):
        for dj in range(kw):
            # (batch, oh, ow, in_ch) <- contract gy's filter axis against w
            contrib = np.tensordot(gy, w[:, :, di, dj], axes=(1, 0))
            gx[:, :, di : di + oh, dj : dj + ow] += contrib.transpose(0, 3, 1, 2)
    return gx


def conv2d_backward_weights(gy: np.ndarray, x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """Gradient of conv2d_forward w.r.t. the filter weights."""
    batch, filters, oh, ow = gy.shape
    _, in_ch, _, _ = x.shape
    gw = np.empty((filters, in_ch, kh, kw))
    for di in range(kh):
        for dj in range(kw):
            patch = x[:, :, di : di + oh, dj : dj + ow]
            gw[:, :, di, dj] = np.tensordot(gy, patch, axes=([0, 2, 3], [0, 2, 3]))
    return gw
