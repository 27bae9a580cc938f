import numpy as np
import pytest

from losscape import datasets, nn, train


def line_dataset(n=64, slope=2.0, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, (n, 1))
    return datasets.Dataset(inputs=x, targets=slope * x)


def test_descends_on_convex_quadratic():
    data = line_dataset()
    model = [nn.dense(1, 1, bias=False)]
    init = [[np.array([[5.0]])]]
    before = nn.loss_value(nn.forward(model, init, data.inputs), data.targets, "mse")
    final = train.train_sgd(model, init, data, train.TrainConfig(8, 0.05, 3, seed=1), "mse")
    after = nn.loss_value(nn.forward(model, final, data.inputs), data.targets, "mse")
    assert after < before


def test_zero_epochs_returns_init_unchanged():
    data = line_dataset()
    model = [nn.dense(1, 1, bias=False)]
    init = [[np.array([[5.0]])]]
    out = train.train_sgd(model, init, data, train.TrainConfig(8, 0.05, 0, seed=1), "mse")
    assert np.array_equal(out[0][0], init[0][0])


def test_converges_to_least_squares_solution():
    # y = 2x has the closed-form minimizer w = 2
    data = line_dataset(slope=2.0)
    model = [nn.dense(1, 1, bias=False)]
    init = [[np.array([[0.0]])]]
    final = train.train_sgd(model, init, data, train.TrainConfig(8, 0.1, 60, seed=2), "mse")
    assert abs(final[0][0][0, 0] - 2.0) < 1e-3


def test_deterministic_given_seed():
    data = datasets.synth_dataset("blobs", 128, seed=3)
    model = [nn.flatten(), nn.dense(64, 4)]
    init = nn.init_params(model, seed=4)
    cfg = train.TrainConfig(16, 0.01, 3, seed=5)
    a = train.train_sgd(model, init, data, cfg, "cross-entropy")
    b = train.train_sgd(model, init, data, cfg, "cross-entropy")
    assert np.array_equal(nn.flatten_params(a), nn.flatten_params(b))
    c = train.train_sgd(model, init, data, train.TrainConfig(16, 0.01, 3, seed=6), "cross-entropy")
    assert not np.array_equal(nn.flatten_params(a), nn.flatten_params(c))


def test_input_params_not_mutated():
    data = line_dataset()
    model = [nn.dense(1, 1, bias=False)]
    init = [[np.array([[5.0]])]]
    train.train_sgd(model, init, data, train.TrainConfig(8, 0.05, 2, seed=1), "mse")
    assert init[0][0][0, 0] == 5.0


def test_divergence_carries_epoch():
    data = line_dataset()
    model = [nn.dense(1, 1, bias=False)]
    init = [[np.array([[5.0]])]]
    with pytest.raises(train.TrainingDiverged) as err:
        train.train_sgd(model, init, data, train.TrainConfig(8, 1e6, 10, seed=1), "mse")
    assert err.value.epoch >= 0
    assert "epoch" in str(err.value)


def test_reports_per_epoch_mean_loss():
    data = line_dataset()
    model = [nn.dense(1, 1, bias=False)]
    init = [[np.array([[5.0]])]]
    seen = []
    train.train_sgd(model, init, data, train.TrainConfig(8, 0.05, 4, seed=1), "mse",
                    on_epoch=lambda e, l: seen.append((e, l)))
    assert [e for e, _ in seen] == [0, 1, 2, 3]
    assert all(np.isfinite(l) for _, l in seen)
    assert seen[-1][1] < seen[0][1]


def test_config_validation():
    data = line_dataset(n=10)
    with pytest.raises(ValueError, match="batch_size"):
        train.TrainConfig(0, 0.1, 1).validate(data.size)
    with pytest.raises(ValueError, match="batch_size"):
        train.TrainConfig(11, 0.1, 1).validate(data.size)
    with pytest.raises(ValueError, match="learning_rate"):
        train.TrainConfig(2, -0.1, 1).validate(data.size)
    with pytest.raises(ValueError, match="epochs"):
        train.TrainConfig(2, 0.1, -1).validate(data.size)
