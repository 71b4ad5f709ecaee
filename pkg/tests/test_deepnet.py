import numpy as np
import pytest

from core.classifiers import predict_many, train
from core.classifiers.base import ClassifierKind, TrainingSet
from core.classifiers.deepnet import (
    DeepNetConfig,
    bce_loss,
    init_params,
    loss_and_gradients,
    network_params,
    train_deepnet,
)
from core.errors import ConfigError, NonFiniteLoss, SingleClass


def blobs(rng, n=40, d=6):
    x = np.vstack([rng.normal(-1.5, 0.5, size=(n // 2, d)), rng.normal(1.5, 0.5, size=(n // 2, d))])
    y = np.repeat([0, 1], n // 2)
    return TrainingSet(x, y)


def test_init_params_shapes():
    params = init_params(16, (64, 32), seed=0)
    assert params["W0"].shape == (16, 64)
    assert params["W1"].shape == (64, 32)
    assert params["W2"].shape == (32, 1)
    assert not params["b0"].any()


def test_gradients_match_central_differences(rng):
    x = rng.normal(size=(5, 8))
    y = np.array([0.0, 1.0, 1.0, 0.0, 1.0])
    params = init_params(8, (64, 32), seed=2)
    _, grads = loss_and_gradients(params, x, y)
    eps = 1e-6
    for name, value in params.items():
        numeric = np.zeros_like(value)
        for index in np.ndindex(value.shape):
            original = value[index]
            value[index] = original + eps
            plus = bce_loss(params, x, y)
            value[index] = original - eps
            minus = bce_loss(params, x, y)
            value[index] = original
            numeric[index] = (plus - minus) / (2 * eps)
        error = np.linalg.norm(grads[name] - numeric) / max(np.linalg.norm(numeric), 1e-12)
        assert error <= 1e-4, name


def test_full_batch_loss_decreases_with_small_step(rng):
    data = blobs(rng)
    model = train_deepnet(data, DeepNetConfig(lr=1e-3, epochs=20, batch_size=data.n))
    history = np.array(model.metadata["loss_history"])
    assert len(history) == 21
    assert np.all(np.diff(history) <= 1e-12)


def test_deep_net_learns_blobs(rng):
    data = blobs(rng, n=100, d=2)
    model = train(ClassifierKind.DEEP_NET, data, DeepNetConfig())
    labels, scores = predict_many(model, data.x)
    assert np.mean(labels == data.y) >= 0.99
    assert np.all((scores >= 0) & (scores <= 1))
    assert model.metadata["final_loss"] < model.metadata["loss_history"][0]


def test_training_is_deterministic(rng):
    data = blobs(rng)
    a = train_deepnet(data, DeepNetConfig(epochs=5, seed=7))
    b = train_deepnet(data, DeepNetConfig(epochs=5, seed=7))
    for name, value in network_params(a).items():
        assert np.array_equal(value, network_params(b)[name])


def test_zero_epochs_keeps_initial_weights(rng):
    data = blobs(rng)
    model = train_deepnet(data, DeepNetConfig(epochs=0, seed=3))
    expected = init_params(data.d, (64, 32), seed=3)
    for name, value in expected.items():
        assert np.array_equal(model.parameters[name], value)


def test_diverging_training_raises(rng):
    data = TrainingSet(rng.normal(0.0, 1e3, size=(20, 4)), np.tile([0, 1], 10))
    with np.errstate(all="ignore"):
        with pytest.raises(NonFiniteLoss):
            train_deepnet(data, DeepNetConfig(lr=1e200, epochs=5, scale_inputs=False))


def test_single_class_is_rejected(rng):
    with pytest.raises(SingleClass):
        train_deepnet(TrainingSet(rng.normal(size=(6, 3)), np.zeros(6, dtype=int)))


@pytest.mark.parametrize("cfg", [
    DeepNetConfig(hidden_layers=(0,)),
    DeepNetConfig(lr=0.0),
    DeepNetConfig(batch_size=0),
    DeepNetConfig(epochs=-1),
])
def test_bad_config_is_rejected(rng, cfg):
    with pytest.raises(ConfigError):
        train_deepnet(blobs(rng), cfg)
