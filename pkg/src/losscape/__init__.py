"""losscape: compute, store, serve, and compare loss-landscape slices of
small neural networks."""

from . import analysis, csvio, datasets, landscape, nn, train
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "analysis",
    "csvio",
    "datasets",
    "landscape",
    "nn",
    "train",
    "KERNEL_BACKEND",
    "__version__",
]
