"""Convolution kernel backend selection.

The compiled extension is used when it imported cleanly; otherwise the numpy
reference implementation takes over. Set LOSSCAPE_KERNELS=python or
LOSSCAPE_KERNELS=compiled to force a backend (the latter raises if the
extension is missing). The active choice is exposed as BACKEND.
"""

import os

from . import reference

_requested = os.environ.get("LOSSCAPE_KERNELS", "auto").strip().lower()

if _requested in ("auto", "", "compiled"):
    try:
        from . import _convkern as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = reference
        BACKEND = "python"
elif _requested == "python":
    _impl = reference
    BACKEND = "python"
else:
    raise ValueError(
        f"LOSSCAPE_KERNELS={_requested!r}: expected 'auto', 'compiled', or 'python'"
    )


def _as_c_contiguous(a):
    import numpy as np

    return np.ascontiguousarray(a, dtype=np.float64)


if BACKEND == "compiled":
    # The extension requires C-contiguous float64 input; perturbed weight
    # views handed to forward() can be non-contiguous slices.
    def conv2d_forward(x, w):
        return _impl.conv2d_forward(_as_c_contiguous(x), _as_c_contiguous(w))

    def conv2d_backward_input(gy, w, h, wid):
        return _impl.conv2d_backward_input(_as_c_contiguous(gy), _as_c_contiguous(w), h, wid)

    def conv2d_backward_weights(gy, x, kh, kw):
        return _impl.conv2d_backward_weights(_as_c_contiguous(gy), _as_c_contiguous(x), kh, kw)

else:
    conv2d_forward = _impl.conv2d_forward
    conv2d_backward_input = _impl.conv2d_backward_input
    conv2d_backward_weights = _impl.conv2d_backward_weights
