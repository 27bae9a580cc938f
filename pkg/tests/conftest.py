"""Shared oracles and fixtures."""

import numpy as np
import pytest

from losscape import datasets, landscape, nn, train


def fd_gradient(model, params, inputs, targets, kind, step=1e-5):
    """Central finite differences of the mean batch loss, one coordinate at a
    time. Independent of the reverse-mode path it checks."""
    theta = nn.flatten_params(params)
    layout = nn.params_layout(params)
    grad = np.empty_like(theta)
    for k in range(theta.size):
        plus, minus = theta.copy(), theta.copy()
        plus[k] += step
        minus[k] -= step
        lp = nn.loss_value(nn.forward(model, nn.unflatten_params(layout, plus), inputs), targets, kind)
        lm = nn.loss_value(nn.forward(model, nn.unflatten_params(layout, minus), inputs), targets, kind)
        grad[k] = (lp - lm) / (2.0 * step)
    return grad


def random_model(rng):
    """A random small architecture plus a matching input shape, <= 1,000
    parameters."""
    arch = rng.integers(0, 3)
    if arch == 0:  # dense stack
        widths = [int(rng.integers(2, 9)) for _ in range(int(rng.integers(2, 4)))]
        model = []
        for a, b in zip(widths[:-1], widths[1:]):
            model.append(nn.dense(a, b, bias=bool(rng.integers(0, 2))))
            model.append(nn.relu())
        model.pop()  # no trailing relu
        return model, (widths[0],)
    if arch == 1:  # conv head
        side = int(rng.integers(4, 7))
        in_ch = int(rng.integers(1, 3))
        filters = int(rng.integers(1, 4))
        kernel = int(rng.integers(2, 4))
        out_side = side - kernel + 1
        flat = filters * out_side * out_side
        model = [
            nn.conv2d(in_ch, filters, kernel, bias=bool(rng.integers(0, 2))),
            nn.relu(),
            nn.flatten(),
            nn.dense(flat, int(rng.integers(2, 5))),
        ]
        return model, (in_ch, side, side)
    width = int(rng.integers(2, 7))  # residual sandwich
    model = [
        nn.dense(int(rng.integers(2, 7)), width),
        nn.residual_block(width, skip=bool(rng.integers(0, 2)), bias=bool(rng.integers(0, 2))),
        nn.relu(),
        nn.dense(width, int(rng.integers(2, 5))),
    ]
    return model, (model[0].fan_in,)


def random_batch(rng, model, input_shape, kind):
    """Inputs plus targets compatible with the model's output and the loss."""
    batch = int(rng.integers(2, 6))
    x = rng.standard_normal((batch,) + input_shape)
    out_shape = nn.model_output_shape(model, input_shape)
    if kind == "cross-entropy":
        t = rng.integers(0, out_shape[0], batch)
    else:
        t = rng.standard_normal((batch,) + out_shape)
    return x, t


def quadratic_setup():
    """Linear model on identity data whose grid slice is exactly x^2 + y^2.

    One bias-free dense(2 -> 2) layer, inputs = I, targets = the columns of
    the reference weights, mse. With directions D1, D2 that are Frobenius-
    orthogonal and have squared norm 4 (= number of output elements), the
    mean loss at W* + x D1 + y D2 is (4x^2 + 4y^2)/4 = x^2 + y^2.
    """
    model = [nn.dense(2, 2, bias=False)]
    w_star = np.array([[0.3, -1.2], [0.7, 0.4]])
    theta = [[w_star]]
    data = datasets.Dataset(inputs=np.eye(2), targets=w_star.T.copy())
    pair = landscape.DirectionPair(
        delta=[[np.array([[2.0, 0.0], [0.0, 0.0]])]],
        eta=[[np.array([[0.0, 2.0], [0.0, 0.0]])]],
        seed=0,
        normalized=True,
    )
    return model, theta, pair, data


# the fidelity/throughput model: a ~10k-parameter conv autoencoder trained on
# the blobs inputs; its 28-unit bottleneck leaves an irreducible, homogeneous
# reconstruction floor, so small subsamples estimate the loss reliably
FIDELITY_MODEL = [
    nn.conv2d(1, 8, 3),
    nn.relu(),
    nn.flatten(),
    nn.dense(288, 28),
    nn.relu(),
    nn.dense(28, 64),
]
FIDELITY_TRAIN = train.TrainConfig(batch_size=32, learning_rate=5e-4, epochs=30, seed=5)


def reconstruction_dataset(size=2000, seed=7):
    base = datasets.synth_dataset("blobs", size, seed)
    return datasets.Dataset(inputs=base.inputs, targets=base.inputs.reshape(size, -1))


@pytest.fixture(scope="session")
def trained_recon():
    """(model, theta_star, dataset): the trained ~10k-parameter conv model."""
    data = reconstruction_dataset()
    params0 = nn.init_params(FIDELITY_MODEL, seed=3)
    theta = train.train_sgd(FIDELITY_MODEL, params0, data, FIDELITY_TRAIN, loss_kind="mse")
    return FIDELITY_MODEL, theta, data
