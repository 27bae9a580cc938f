"""Synthetic desk-scale datasets, deterministic from a seed.

Both kinds produce single-channel 8x8 inputs of shape (n, 1, 8, 8) so the
same data feeds conv models directly and dense models through a flatten
layer. Targets are int64 class indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

IMAGE_SIDE = 8
BLOB_CLASSES = 4
BLOB_SEPARATION = 5.0
XOR_CLASSES = 2
XOR_NOISE = 0.3

KINDS = ("blobs", "xor-image")


@dataclass
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError(
                f"inputs batch {self.inputs.shape[0]} != targets batch {self.targets.shape[0]}"
            )

    @property
    def size(self) -> int:
        return int(self.inputs.shape[0])


def synth_dataset(kind: str, size: int, seed: int) -> Dataset:
    if size < 1:
        raise ValueError(f"dataset size must be >= 1, got {size}")
    if kind == "blobs":
        return _blobs(size, seed)
    if kind == "xor-image":
        return _xor_image(size, seed)
    raise ValueError(f"unknown dataset kind {kind!r}; expected one of {KINDS}")


def _blobs(size: int, seed: int) -> Dataset:
    """Four well-separated Gaussian clusters in 64-dim space (unit noise,
    centers BLOB_SEPARATION apart from the origin), linearly separable."""
    rng = np.random.default_rng(seed)
    dim = IMAGE_SIDE * IMAGE_SIDE
    centers = rng.standard_normal((BLOB_CLASSES, dim))
    centers *= BLOB_SEPARATION / np.linalg.norm(centers, axis=1, keepdims=True)
    labels = rng.integers(0, BLOB_CLASSES, size)
    points = centers[labels] + rng.standard_normal((size, dim))
    inputs = points.reshape(size, 1, IMAGE_SIDE, IMAGE_SIDE)
    return Dataset(inputs=inputs, targets=labels.astype(np.int64))


def _xor_image(size: int, seed: int) -> Dataset:
    """8x8 images whose four 4x4 quadrants are filled with +/-1 plus noise;
    the class is the parity of the number of positive quadrants. Not linearly
    separable, learnable by a small conv net."""
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, (size, 2, 2)) * 2 - 1
    labels = ((signs > 0).sum(axis=(1, 2)) % 2).astype(np.int64)
    half = IMAGE_SIDE // 2
    quadrants = np.repeat(np.repeat(signs.astype(np.float64), half, axis=1), half, axis=2)
    images = quadrants + XOR_NOISE * rng.standard_normal((size, IMAGE_SIDE, IMAGE_SIDE))
    return Dataset(inputs=images[:, None, :, :], targets=labels)
