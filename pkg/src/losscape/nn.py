"""Minimal float64 neural-network substrate.

Sequential models are a list of LayerSpec; parameters are a parallel list of
per-layer tensor lists (numpy float64 arrays). Everything here is pure: the
forward pass, loss, and reverse-mode gradients never mutate their arguments,
so shared parameters can be evaluated from many threads at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

DENSE = "dense"
CONV2D = "conv2d"
RELU = "relu"
RESIDUAL = "residual-block"
FLATTEN = "flatten"

LOSS_KINDS = ("mse", "cross-entropy")

Params = list  # list[list[np.ndarray]], one inner list per layer


class ShapeError(ValueError):
    """Model structure / input shape mismatch."""


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    fan_in: int = 0
    fan_out: int = 0
    in_channels: int = 0
    filters: int = 0
    kernel: int = 0
    has_bias: bool = True
    skip_enabled: bool = False


def dense(fan_in: int, fan_out: int, bias: bool = True) -> LayerSpec:
    if fan_in < 1 or fan_out < 1:
        raise ValueError(f"dense layer needs positive fan_in/fan_out, got {fan_in}->{fan_out}")
    return LayerSpec(DENSE, fan_in=fan_in, fan_out=fan_out, has_bias=bias)


def conv2d(in_channels: int, filters: int, kernel: int, bias: bool = True) -> LayerSpec:
    if in_channels < 1 or filters < 1 or kernel < 1:
        raise ValueError("conv2d layer needs positive channel/filter/kernel counts")
    return LayerSpec(CONV2D, in_channels=in_channels, filters=filters, kernel=kernel, has_bias=bias)


def relu() -> LayerSpec:
    return LayerSpec(RELU, has_bias=False)


def flatten() -> LayerSpec:
    return LayerSpec(FLATTEN, has_bias=False)


def residual_block(width: int, skip: bool = True, bias: bool = True) -> LayerSpec:
    """Two dense layers with a relu between; optionally adds the block input
    to its output (the skip path), which requires fan_in == fan_out."""
    if width < 1:
        raise ValueError("residual block needs positive width")
    return LayerSpec(RESIDUAL, fan_in=width, fan_out=width, has_bias=bias, skip_enabled=skip)


def layer_output_shape(spec: LayerSpec, in_shape: tuple) -> tuple:
    """Per-example output shape for a per-example input shape (no batch dim)."""
    if spec.kind == DENSE:
        if in_shape != (spec.fan_in,):
            raise ShapeError(f"dense expects input shape ({spec.fan_in},), got {in_shape}")
        return (spec.fan_out,)
    if spec.kind == CONV2D:
        if len(in_shape) != 3 or in_shape[0] != spec.in_channels:
            raise ShapeError(
                f"conv2d expects input shape ({spec.in_channels}, H, W), got {in_shape}"
            )
        h, w = in_shape[1], in_shape[2]
        if h < spec.kernel or w < spec.kernel:
            raise ShapeError(f"conv2d kernel {spec.kernel} larger than input {in_shape}")
        return (spec.filters, h - spec.kernel + 1, w - spec.kernel + 1)
    if spec.kind == RELU:
        return in_shape
    if spec.kind == FLATTEN:
        return (int(np.prod(in_shape, dtype=np.int64)),)
    if spec.kind == RESIDUAL:
        if in_shape != (spec.fan_in,):
            raise ShapeError(f"residual-block expects input shape ({spec.fan_in},), got {in_shape}")
        if spec.skip_enabled and spec.fan_in != spec.fan_out:
            raise ShapeError("residual-block with skip requires fan_in == fan_out")
        return (spec.fan_out,)
    raise ShapeError(f"unknown layer kind {spec.kind!r}")


def model_output_shape(model: list[LayerSpec], input_shape: tuple) -> tuple:
    """Propagate a per-example input shape through the model, validating that
    adjacent layers compose. Errors name the offending layer index."""
    shape = tuple(input_shape)
    for i, spec in enumerate(model):
        try:
            shape = layer_output_shape(spec, shape)
        except ShapeError as e:
            raise ShapeError(f"layer {i} ({spec.kind}): {e}") from None
    return shape


def init_params(model: list[LayerSpec], seed: int) -> Params:
    """He-style scaled Gaussian weights, zero biases, from a PCG64 stream
    (numpy default_rng) seeded with `seed`. Layer order then tensor order."""
    rng = np.random.default_rng(seed)

    def he(shape, fan_in):
        return rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)

    params = []
    for spec in model:
        if spec.kind == DENSE:
            tensors = [he((spec.fan_out, spec.fan_in), spec.fan_in)]
            if spec.has_bias:
                tensors.append(np.zeros(spec.fan_out))
        elif spec.kind == CONV2D:
            k = spec.kernel
            tensors = [he((spec.filters, spec.in_channels, k, k), spec.in_channels * k * k)]
            if spec.has_bias:
                tensors.append(np.zeros(spec.filters))
        elif spec.kind == RESIDUAL:
            tensors = [he((spec.fan_out, spec.fan_in), spec.fan_in)]
            if spec.has_bias:
                tensors.append(np.zeros(spec.fan_out))
            tensors.append(he((spec.fan_out, spec.fan_out), spec.fan_out))
            if spec.has_bias:
                tensors.append(np.zeros(spec.fan_out))
        else:
            tensors = []
        params.append(tensors)
    return params


def describe_model(model: list[LayerSpec]) -> str:
    parts = []
    for spec in model:
        if spec.kind == DENSE:
            parts.append(f"dense({spec.fan_in}->{spec.fan_out})")
        elif spec.kind == CONV2D:
            parts.append(f"conv2d({spec.in_channels}->{spec.filters},k{spec.kernel})")
        elif spec.kind == RESIDUAL:
            skip = "on" if spec.skip_enabled else "off"
            parts.append(f"residual-block({spec.fan_in},skip={skip})")
        else:
            parts.append(spec.kind)
    return "+".join(parts)


def _expected_tensor_count(spec: LayerSpec) -> int:
    if spec.kind in (DENSE, CONV2D):
        return 2 if spec.has_bias else 1
    if spec.kind == RESIDUAL:
        return 4 if spec.has_bias else 2
    return 0


def _check_params(model: list[LayerSpec], params: Params) -> None:
    if len(params) != len(model):
        raise ShapeError(f"params have {len(params)} layers, model has {len(model)}")
    for i, (spec, tensors) in enumerate(zip(model, params)):
        want = _expected_tensor_count(spec)
        if len(tensors) != want:
            raise ShapeError(f"layer {i} ({spec.kind}): expected {want} tensors, got {len(tensors)}")


def _layer_forward(spec: LayerSpec, tensors: list, x: np.ndarray):
    """Returns (output, cache); cache holds what backward needs."""
    if spec.kind == DENSE:
        w = tensors[0]
        if x.shape[1:] != (spec.fan_in,):
            raise ShapeError(f"dense expects input shape ({spec.fan_in},), got {x.shape[1:]}")
        y = x @ w.T
        if spec.has_bias:
            y = y + tensors[1]
        return y, x
    if spec.kind == CONV2D:
        w = tensors[0]
        if x.ndim != 4 or x.shape[1] != spec.in_channels:
            raise ShapeError(
                f"conv2d expects input shape ({spec.in_channels}, H, W), got {x.shape[1:]}"
            )
        if x.shape[2] < spec.kernel or x.shape[3] < spec.kernel:
            raise ShapeError(f"conv2d kernel {spec.kernel} larger than input {x.shape[1:]}")
        y = kernels.conv2d_forward(x, w)
        if spec.has_bias:
            y = y + tensors[1][None, :, None, None]
        return y, x
    if spec.kind == RELU:
        return np.maximum(x, 0.0), x
    if spec.kind == FLATTEN:
        return x.reshape(x.shape[0], -1), x.shape
    if spec.kind == RESIDUAL:
        if x.shape[1:] != (spec.fan_in,):
            raise ShapeError(f"residual-block expects input shape ({spec.fan_in},), got {x.shape[1:]}")
        if spec.has_bias:
            w1, b1, w2, b2 = tensors
            h = x @ w1.T + b1
            a = np.maximum(h, 0.0)
            y = a @ w2.T + b2
        else:
            w1, w2 = tensors
            h = x @ w1.T
            a = np.maximum(h, 0.0)
            y = a @ w2.T
        if spec.skip_enabled:
            y = y + x
        return y, (x, h, a)
    raise ShapeError(f"unknown layer kind {spec.kind!r}")


def _layer_backward(spec: LayerSpec, tensors: list, cache, gy: np.ndarray):
    """Returns (grad_input, grad_tensors)."""
    if spec.kind == DENSE:
        x = cache
        w = tensors[0]
        gw = gy.T @ x
        gx = gy @ w
        grads = [gw]
        if spec.has_bias:
            grads.append(gy.sum(axis=0))
        return gx, grads
    if spec.kind == CONV2D:
        x = cache
        w = tensors[0]
        gw = kernels.conv2d_backward_weights(gy, x, spec.kernel, spec.kernel)
        gx = kernels.conv2d_backward_input(gy, w, x.shape[2], x.shape[3])
        grads = [gw]
        if spec.has_bias:
            grads.append(gy.sum(axis=(0, 2, 3)))
        return gx, grads
    if spec.kind == RELU:
        x = cache
        return gy * (x > 0.0), []
    if spec.kind == FLATTEN:
        return gy.reshape(cache), []
    if spec.kind == RESIDUAL:
        x, h, a = cache
        if spec.has_bias:
            w1, b1, w2, b2 = tensors
        else:
            w1, w2 = tensors
        gw2 = gy.T @ a
        ga = gy @ w2
        gh = ga * (h > 0.0)
        gw1 = gh.T @ x
        gx = gh @ w1
        if spec.skip_enabled:
            gx = gx + gy
        if spec.has_bias:
            return gx, [gw1, gh.sum(axis=0), gw2, gy.sum(axis=0)]
        return gx, [gw1, gw2]
    raise ShapeError(f"unknown layer kind {spec.kind!r}")


def _forward_all(model: list[LayerSpec], params: Params, x: np.ndarray):
    _check_params(model, params)
    caches = []
    out = x
    for i, (spec, tensors) in enumerate(zip(model, params)):
        try:
            out, cache = _layer_forward(spec, tensors, out)
        except ShapeError as e:
            raise ShapeError(f"layer {i} ({spec.kind}): {e}") from None
        caches.append(cache)
    return out, caches


def forward(model: list[LayerSpec], params: Params, inputs: np.ndarray) -> np.ndarray:
    """Run the model on a batch (batch dim first). Pure."""
    out, _ = _forward_all(model, params, np.asarray(inputs, dtype=np.float64))
    return out


def _one_hot(indices: np.ndarray, num_classes: int) -> np.ndarray:
    eye = np.zeros((indices.shape[0], num_classes))
    eye[np.arange(indices.shape[0]), indices] = 1.0
    return eye


def _check_loss_args(predictions: np.ndarray, targets: np.ndarray, kind: str) -> None:
    if kind not in LOSS_KINDS:
        raise ValueError(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")
    if predictions.shape[0] == 0:
        raise ValueError("empty batch")
    if predictions.shape[0] != targets.shape[0]:
        raise ShapeError(
            f"batch mismatch: {predictions.shape[0]} predictions vs {targets.shape[0]} targets"
        )


def loss_value(predictions: np.ndarray, targets: np.ndarray, kind: str) -> float:
    """Mean batch loss. mse averages over every output element; cross-entropy
    treats predictions as logits and averages -log softmax over the batch.
    Integer targets are class indices (one-hot encoded for mse)."""
    predictions = np.asarray(predictions)
    targets = np.asarray(targets)
    _check_loss_args(predictions, targets, kind)
    if kind == "mse":
        if np.issubdtype(targets.dtype, np.integer):
            targets = _one_hot(targets, predictions.shape[1])
        if targets.shape != predictions.shape:
            raise ShapeError(f"mse target shape {targets.shape} != predictions {predictions.shape}")
        diff = predictions - targets
        return float(np.mean(diff * diff))
    # cross-entropy over logits, numerically stable
    logp = _log_softmax(predictions)
    if np.issubdtype(targets.dtype, np.integer):
        picked = logp[np.arange(predictions.shape[0]), targets]
        return float(-np.mean(picked))
    if targets.shape != predictions.shape:
        raise ShapeError(f"target shape {targets.shape} != predictions {predictions.shape}")
    return float(-np.mean(np.sum(targets * logp, axis=1)))


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - np.max(logits, axis=1, keepdims=True)
    return z - np.log(np.sum(np.exp(z), axis=1, keepdims=True))


def _loss_gradient(predictions: np.ndarray, targets: np.ndarray, kind: str) -> np.ndarray:
    if kind == "mse":
        if np.issubdtype(targets.dtype, np.integer):
            targets = _one_hot(targets, predictions.shape[1])
        return (2.0 / predictions.size) * (predictions - targets)
    p = np.exp(_log_softmax(predictions))
    if np.issubdtype(targets.dtype, np.integer):
        t = _one_hot(targets, predictions.shape[1])
    else:
        t = targets
    return (p - t) / predictions.shape[0]


def loss_and_gradient(
    model: list[LayerSpec], params: Params, inputs: np.ndarray, targets: np.ndarray, kind: str
):
    """Mean batch loss and its exact reverse-mode gradient w.r.t. every
    parameter tensor (same nesting as params)."""
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets)
    out, caches = _forward_all(model, params, inputs)
    _check_loss_args(out, targets, kind)
    value = loss_value(out, targets, kind)
    gy = _loss_gradient(out, targets, kind)
    grads: Params = [None] * len(model)
    for i in range(len(model) - 1, -1, -1):
        gy, layer_grads = _layer_backward(model[i], params[i], caches[i], gy)
        grads[i] = layer_grads
    return value, grads


def gradient(
    model: list[LayerSpec], params: Params, inputs: np.ndarray, targets: np.ndarray, kind: str
) -> Params:
    return loss_and_gradient(model, params, inputs, targets, kind)[1]


# --- parameter vector layout ------------------------------------------------

def flatten_params(params: Params) -> np.ndarray:
    """Concatenate all tensors into one float64 vector: layer order, then
    tensor order, then row-major entries. Exact inverse of unflatten_params."""
    parts = [np.asarray(t, dtype=np.float64).ravel() for layer in params for t in layer]
    if not parts:
        return np.zeros(0)
    return np.concatenate(parts)


def params_layout(params: Params) -> list[list[tuple]]:
    return [[tuple(t.shape) for t in layer] for layer in params]


def layout_size(layout: list[list[tuple]]) -> int:
    return int(sum(np.prod(s, dtype=np.int64) for layer in layout for s in layer))


def unflatten_params(layout: list[list[tuple]], flat: np.ndarray, copy: bool = False) -> Params:
    """Rebuild the nested parameter lists from a flat vector. Returns views
    into `flat` unless copy=True."""
    flat = np.asarray(flat, dtype=np.float64)
    total = layout_size(layout)
    if flat.shape != (total,):
        raise ValueError(f"flat vector has shape {flat.shape}, layout needs ({total},)")
    params = []
    offset = 0
    for layer in layout:
        tensors = []
        for shape in layer:
            n = int(np.prod(shape, dtype=np.int64))
            t = flat[offset : offset + n].reshape(shape)
            tensors.append(t.copy() if copy else t)
            offset += n
        params.append(tensors)
    return params


def param_count(params: Params) -> int:
    return int(sum(t.size for layer in params for t in layer))


def copy_params(params: Params) -> Params:
    return [[t.copy() for t in layer] for layer in params]
