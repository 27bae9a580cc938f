"""Mini-batch SGD with seeded, reproducible shuffling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; .epoch is the epoch it happened in."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int
    learning_rate: float
    epochs: int
    seed: int = 0

    def validate(self, dataset_size: int) -> None:
        if not 1 <= self.batch_size <= dataset_size:
            raise ValueError(
                f"batch_size {self.batch_size} outside [1, {dataset_size}] for this dataset"
            )
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")


def train_sgd(model, init_params, dataset, config: TrainConfig,
              loss_kind: str = "cross-entropy", on_epoch=None):
    """Plain SGD over seeded shuffles of the dataset.

    Shuffle order comes from PCG64 (numpy default_rng) seeded with
    config.seed, one permutation per epoch, so runs with identical seeds are
    bit-identical. The trailing partial batch is trained on. on_epoch, if
    given, receives (epoch_index, mean_example_loss). Returns the final
    parameters (the input is not mutated).
    """
    if dataset.size == 0:
        raise ValueError("cannot train on an empty dataset")
    config.validate(dataset.size)
    params = nn.copy_params(init_params)
    if config.epochs == 0:
        return params
    rng = np.random.default_rng(config.seed)
    n = dataset.size
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            x = dataset.inputs[idx]
            t = dataset.targets[idx]
            # divergence is detected and reported, so let the arithmetic
            # produce inf/nan quietly instead of warning
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                loss, grads = nn.loss_and_gradient(model, params, x, t, loss_kind)
            if not np.isfinite(loss):
                raise TrainingDiverged(epoch, loss)
            total += loss * len(idx)
            for layer_p, layer_g in zip(params, grads):
                for tensor, grad in zip(layer_p, layer_g):
                    tensor -= config.learning_rate * grad
        if on_epoch is not None:
            on_epoch(epoch, total / n)
    return params
