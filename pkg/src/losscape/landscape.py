"""Direction sampling, per-filter normalization, and 2D grid slice evaluation.

A slice is defined by two parameter-shaped direction vectors (delta, eta)
around trained weights theta_star: grid point (x, y) evaluates the mean loss
at theta_star + x*delta + y*eta over a fixed, seed-chosen subsample of the
dataset. Directions are drawn i.i.d. N(0, 1) and each filter block is then
rescaled to the Frobenius norm of the corresponding trained filter, which
makes slices comparable across models.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import nn

FULL = "full"

BIAS_WARNING = "bias and scalar parameters received zero direction entries"


@dataclass
class DirectionPair:
    """Two ModelParameters-shaped random directions.

    delta and eta come from disjoint PCG64 substreams (numpy default_rng on
    SeedSequence(seed).spawn(2): child 0 -> delta, child 1 -> eta).
    """

    delta: list
    eta: list
    seed: int
    normalized: bool = False
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -1.0
    x_max: float = 1.0
    y_min: float = -1.0
    y_max: float = 1.0
    resolution_x: int = 60
    resolution_y: int = 60

    def validate(self) -> None:
        if self.resolution_x < 1 or self.resolution_y < 1:
            raise ValueError("grid resolutions must be >= 1")
        if self.resolution_x > 1 and not self.x_min < self.x_max:
            raise ValueError(f"x range [{self.x_min}, {self.x_max}] needs x_min < x_max")
        if self.resolution_y > 1 and not self.y_min < self.y_max:
            raise ValueError(f"y range [{self.y_min}, {self.y_max}] needs y_min < y_max")
        if self.resolution_x == 1 and self.x_min != self.x_max:
            raise ValueError("resolution_x == 1 needs x_min == x_max")
        if self.resolution_y == 1 and self.y_min != self.y_max:
            raise ValueError("resolution_y == 1 needs y_min == y_max")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Uniform linspace along each axis, both endpoints included."""
        self.validate()
        xs = np.linspace(self.x_min, self.x_max, self.resolution_x)
        ys = np.linspace(self.y_min, self.y_max, self.resolution_y)
        return xs, ys


@dataclass(frozen=True)
class EvalConfig:
    subsample: int | str = 100      # example count, or "full"
    subsample_seed: int = 0
    loss_kind: str = "cross-entropy"

    def validate(self) -> None:
        if isinstance(self.subsample, str):
            if self.subsample != FULL:
                raise ValueError(f"subsample must be a count or '{FULL}', got {self.subsample!r}")
        elif self.subsample < 1:
            raise ValueError(f"subsample count must be >= 1, got {self.subsample}")
        if self.loss_kind not in nn.LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.loss_kind!r}")


@dataclass
class LandscapeGrid:
    """Rectangular slice: losses[j][i] belongs to (x_values[i], y_values[j]).

    Entries are finite losses, +/-inf for divergent evaluations, or NaN for
    masked points.
    """

    x_values: np.ndarray
    y_values: np.ndarray
    losses: np.ndarray

    def __post_init__(self):
        self.x_values = np.asarray(self.x_values, dtype=np.float64)
        self.y_values = np.asarray(self.y_values, dtype=np.float64)
        self.losses = np.asarray(self.losses, dtype=np.float64)
        if self.x_values.ndim != 1 or self.y_values.ndim != 1:
            raise ValueError("axis values must be 1-D")
        if np.any(np.diff(self.x_values) <= 0) or np.any(np.diff(self.y_values) <= 0):
            raise ValueError("axis values must be strictly increasing")
        want = (self.y_values.size, self.x_values.size)
        if self.losses.shape != want:
            raise ValueError(f"losses shape {self.losses.shape} != (res_y, res_x) {want}")

    def copy(self) -> "LandscapeGrid":
        return LandscapeGrid(self.x_values.copy(), self.y_values.copy(), self.losses.copy())


def sample_directions(reference: list, seed: int) -> DirectionPair:
    """Draw an unnormalized direction pair shaped like `reference`.

    Weight tensors (ndim >= 2) get i.i.d. standard-normal entries; bias and
    scalar tensors get zeros (filter normalization is undefined for them),
    recorded as a warning. Deterministic: same seed, same pair, any platform.
    """
    children = np.random.SeedSequence(seed).spawn(2)
    has_excluded = False

    def draw(rng):
        nonlocal has_excluded
        direction = []
        for layer in reference:
            tensors = []
            for t in layer:
                if t.ndim >= 2:
                    tensors.append(rng.standard_normal(t.shape))
                else:
                    tensors.append(np.zeros_like(t))
                    has_excluded = True
            direction.append(tensors)
        return direction

    delta = draw(np.random.default_rng(children[0]))
    eta = draw(np.random.default_rng(children[1]))
    warnings = [BIAS_WARNING] if has_excluded else []
    return DirectionPair(delta=delta, eta=eta, seed=seed, warnings=warnings)


def _unit_norms(t: np.ndarray) -> np.ndarray:
    """Frobenius norm of each filter unit: row of a dense matrix, full kernel
    block of a conv tensor (leading axis indexes units)."""
    return np.sqrt(np.sum(t * t, axis=tuple(range(1, t.ndim))))


def filter_normalize(pair: DirectionPair, reference: list) -> DirectionPair:
    """Rescale each direction filter to the matching reference filter's
    Frobenius norm: d_f <- d_f * |theta_f| / |d_f|.

    Filter granularity is one output unit: a conv filter's full kernel block,
    a dense unit's incoming weight row. Bias entries pass through untouched.
    Filters whose raw direction norm is zero stay all-zero and add a warning.
    Pure; returns a new pair with normalized=True.
    """
    if pair.normalized:
        raise ValueError("direction pair is already normalized")
    zero_filters = 0

    def normalize(direction):
        nonlocal zero_filters
        if len(direction) != len(reference):
            raise nn.ShapeError(
                f"direction has {len(direction)} layers, reference has {len(reference)}"
            )
        out = []
        for layer_d, layer_t in zip(direction, reference):
            if len(layer_d) != len(layer_t):
                raise nn.ShapeError("direction/reference tensor counts differ")
            tensors = []
            for d, t in zip(layer_d, layer_t):
                if d.shape != t.shape:
                    raise nn.ShapeError(f"direction shape {d.shape} != reference {t.shape}")
                if d.ndim < 2:
                    tensors.append(d.copy())
                    continue
                d_norms = _unit_norms(d)
                t_norms = _unit_norms(t)
                zero = d_norms == 0.0
                zero_filters += int(np.count_nonzero(zero))
                scale = np.divide(t_norms, d_norms, out=np.zeros_like(t_norms), where=~zero)
                tensors.append(d * scale.reshape((-1,) + (1,) * (d.ndim - 1)))
            out.append(tensors)
        return out

    delta = normalize(pair.delta)
    eta = normalize(pair.eta)
    warnings = list(pair.warnings)
    if zero_filters:
        warnings.append(f"{zero_filters} zero-norm direction filter(s) left at zero")
    return DirectionPair(delta=delta, eta=eta, seed=pair.seed, normalized=True, warnings=warnings)


def subsample_indices(dataset_size: int, cfg: EvalConfig) -> np.ndarray:
    """The fixed evaluation subset: a seeded permutation's prefix.

    "full" returns 0..dataset_size-1. Otherwise the first N entries of
    np.random.default_rng(subsample_seed).permutation(dataset_size) (PCG64),
    identical across runs and platforms.
    """
    cfg.validate()
    if cfg.subsample == FULL:
        return np.arange(dataset_size)
    n = int(cfg.subsample)
    if n > dataset_size:
        raise ValueError(f"subsample {n} exceeds dataset size {dataset_size}")
    perm = np.random.default_rng(cfg.subsample_seed).permutation(dataset_size)
    return perm[:n]


def evaluate_grid(
    model,
    theta_star: list,
    pair: DirectionPair,
    dataset,
    grid: GridSpec,
    cfg: EvalConfig,
    progress=None,
    workers: int = 1,
) -> LandscapeGrid:
    """Evaluate the loss over the 2D slice.

    The subsample is chosen once and reused at every grid point. Whenever 0
    is a value on both axes, the (0, 0) entry goes through the identical code
    path as every other point, so it equals the plain subsample loss of
    theta_star bit for bit. Non-finite losses are recorded in the grid, not
    raised. `progress`, if given, receives monotonically increasing
    completed-point counts; it must tolerate calls from worker threads.
    Points are independent, so any worker count yields the same matrix.
    """
    xs, ys = grid.axes()
    idx = subsample_indices(dataset.size, cfg)
    inputs = np.ascontiguousarray(dataset.inputs[idx])
    targets = dataset.targets[idx]

    theta = nn.flatten_params(theta_star)
    layout = nn.params_layout(theta_star)
    d_delta = nn.flatten_params(pair.delta)
    d_eta = nn.flatten_params(pair.eta)
    if d_delta.shape != theta.shape or d_eta.shape != theta.shape:
        raise nn.ShapeError("direction pair does not match theta_star's layout")
    # surface structural problems before burning grid time
    nn.forward(model, theta_star, inputs[:1])

    losses = np.empty((ys.size, xs.size))
    done = 0
    lock = threading.Lock()

    def eval_point(j: int, i: int) -> None:
        nonlocal done
        vec = theta + xs[i] * d_delta + ys[j] * d_eta
        params = nn.unflatten_params(layout, vec)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            out = nn.forward(model, params, inputs)
            value = nn.loss_value(out, targets, cfg.loss_kind)
        losses[j, i] = value
        if progress is not None:
            with lock:
                done += 1
                progress(done)

    points = [(j, i) for j in range(ys.size) for i in range(xs.size)]
    if workers <= 1:
        for j, i in points:
            eval_point(j, i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for future in [pool.submit(eval_point, j, i) for j, i in points]:
                future.result()
    return LandscapeGrid(x_values=xs, y_values=ys, losses=losses)


def loss_at_minimizer(model, theta_star, dataset, cfg: EvalConfig) -> float:
    """Plain subsample loss of theta_star via the same path as grid points."""
    single = GridSpec(0.0, 0.0, 0.0, 0.0, 1, 1)
    zero = DirectionPair(
        delta=[[np.zeros_like(t) for t in layer] for layer in theta_star],
        eta=[[np.zeros_like(t) for t in layer] for layer in theta_star],
        seed=0,
        normalized=True,
    )
    return float(evaluate_grid(model, theta_star, zero, dataset, single, cfg).losses[0, 0])
