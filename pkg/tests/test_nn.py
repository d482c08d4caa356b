#!/usr/bin/python

# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import numpy as np
import pytest

from crashblame.errors import InvalidConfigError, TrainingError
from crashblame.nn import (
    AdamState,
    LstmParams,
    TrainConfig,
    adam_step,
    attend,
    attend_backward,
    bilstm_backward,
    bilstm_forward,
    dense_backward,
    dense_forward,
    dropout,
    emissions,
    emissions_backward,
    grad_check,
    lstm_backward,
    lstm_forward,
)
from crashblame.nn.attention import attention_weights
from crashblame.nn.layers import dropout_backward

TOLERANCE = 1e-4


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def lstm_dict(rng, input_size, hidden_size, prefix):
    return LstmParams.init(rng, input_size, hidden_size).to_params(prefix)


def test_lstm_gradients(rng):
    params = lstm_dict(rng, 4, 3, "lstm")
    params["x"] = rng.standard_normal((5, 4))
    weights = rng.standard_normal((5, 3))

    def model(p):
        lstm = LstmParams.from_params(p, "lstm")
        states, cache = lstm_forward(lstm, p["x"])
        dx, grads = lstm_backward(lstm, cache, weights)
        return float((states * weights).sum()), {"x": dx, **grads.to_params("lstm")}

    assert grad_check(model, params) < TOLERANCE


def test_bilstm_gradients(rng):
    params = {**lstm_dict(rng, 3, 2, "fwd"), **lstm_dict(rng, 3, 2, "bwd")}
    params["x"] = rng.standard_normal((6, 3))
    weights = rng.standard_normal((6, 4))

    def model(p):
        fwd = LstmParams.from_params(p, "fwd")
        bwd = LstmParams.from_params(p, "bwd")
        states, cache = bilstm_forward(fwd, bwd, p["x"])
        dx, fgrads, bgrads = bilstm_backward(fwd, bwd, cache, weights)
        grads = {"x": dx, **fgrads.to_params("fwd"), **bgrads.to_params("bwd")}
        return float((states * weights).sum()), grads

    assert grad_check(model, params) < TOLERANCE


def test_bilstm_directions(rng):
    fwd = LstmParams.init(rng, 3, 2)
    bwd = LstmParams.init(rng, 3, 2)
    inputs = rng.standard_normal((4, 3))
    states, _ = bilstm_forward(fwd, bwd, inputs)
    assert states.shape == (4, 4)
    # the first frame's forward half only sees the first input
    alone, _ = lstm_forward(fwd, inputs[:1])
    np.testing.assert_allclose(states[0, :2], alone[0])
    # the last frame's backward half only sees the last input
    alone, _ = lstm_forward(bwd, inputs[-1:])
    np.testing.assert_allclose(states[-1, 2:], alone[0])


def test_lstm_shape_errors(rng):
    lstm = LstmParams.init(rng, 3, 2)
    with pytest.raises(ValueError):
        lstm_forward(lstm, np.zeros((4, 5)))
    with pytest.raises(ValueError):
        LstmParams(W=np.zeros((8, 3)), U=np.zeros((8, 3)), b=np.zeros(8))


def test_dense_gradients(rng):
    params = {
        "W": rng.standard_normal((3, 4)),
        "b": rng.standard_normal(3),
        "x": rng.standard_normal((5, 4)),
    }
    weights = rng.standard_normal((5, 3))

    def model(p):
        y = dense_forward(p["W"], p["b"], p["x"])
        dx, dW, db = dense_backward(p["W"], p["x"], weights)
        return float((y * weights).sum()), {"W": dW, "b": db, "x": dx}

    assert grad_check(model, params) < TOLERANCE
    with pytest.raises(ValueError):
        dense_forward(params["W"], params["b"], np.zeros((5, 3)))


def test_dropout(rng):
    x = np.ones((50, 20))
    y, mask = dropout(x, 0.25, rng)
    assert set(np.unique(mask)) <= {0.0, 1 / 0.75}
    np.testing.assert_array_equal(dropout_backward(np.ones_like(x), mask), mask)
    assert 0.6 < (mask > 0).mean() < 0.9

    same, none = dropout(x, 0.25, rng, train=False)
    assert none is None
    assert same is x

    first, _ = dropout(x, 0.5, 3)
    second, _ = dropout(x, 0.5, 3)
    np.testing.assert_array_equal(first, second)

    with pytest.raises(ValueError):
        dropout(x, 1.0, rng)


def test_attention_gradients(rng):
    params = {"h": rng.standard_normal((5, 4)), "w": rng.standard_normal(4)}
    r = rng.standard_normal(4)
    q = rng.standard_normal(5)

    def model(p):
        alpha, h_star, cache = attend(p["h"], p["w"])
        dh, dw = attend_backward(p["w"], cache, r, dalpha=q)
        return float(h_star @ r + alpha @ q), {"h": dh, "w": dw}

    assert grad_check(model, params) < TOLERANCE


def test_emission_gradients(rng):
    params = {
        "h": rng.standard_normal((5, 4)),
        "h_star": rng.standard_normal(4),
        "E": rng.standard_normal((2, 8)),
        "e": rng.standard_normal(2),
    }
    weights = rng.standard_normal((5, 2))

    def model(p):
        P = emissions(p["h"], p["h_star"], p["E"], p["e"])
        dh, dh_star, dE, de = emissions_backward(p["h"], p["h_star"], p["E"], weights)
        return float((P * weights).sum()), {"h": dh, "h_star": dh_star, "E": dE, "e": de}

    assert grad_check(model, params) < TOLERANCE
    with pytest.raises(ValueError):
        emissions(params["h"], params["h_star"], np.zeros((2, 4)), params["e"])


def test_attention_invariants(rng):
    for _ in range(1000):
        steps = int(rng.integers(1, 30))
        scores = rng.standard_normal(steps) * 5
        alpha = attention_weights(scores)
        assert abs(alpha.sum() - 1) < 1e-6
        assert np.all(alpha >= 0)
        shifted = attention_weights(scores + rng.uniform(-100, 100))
        np.testing.assert_allclose(shifted, alpha, atol=1e-9, rtol=0)


def test_attention_single_frame(rng):
    states = rng.standard_normal((1, 4))
    alpha, h_star, _ = attend(states, rng.standard_normal(4))
    assert alpha.tolist() == [1.0]
    np.testing.assert_allclose(h_star, np.tanh(states[0]))
    with pytest.raises(ValueError):
        attend(np.zeros((0, 4)), np.zeros(4))


def test_adam_first_step():
    params = {"x": np.array([1.0, -2.0])}
    state = AdamState()
    adam_step(state, params, {"x": np.array([0.5, -4.0])}, lr=0.1)
    # the first bias-corrected step moves every entry by about lr
    np.testing.assert_allclose(params["x"], [0.9, -1.9], atol=1e-6)
    assert state.t == 1


def test_adam_minimizes_quadratic():
    params = {"x": np.array([10.0, -5.0])}
    state = AdamState()
    target = np.array([3.0, 1.0])
    for _ in range(2000):
        adam_step(state, params, {"x": 2 * (params["x"] - target)}, lr=0.05)
    np.testing.assert_allclose(params["x"], target, atol=0.05)


def test_adam_errors():
    params = {"x": np.zeros(2)}
    with pytest.raises(TrainingError) as error:
        adam_step(AdamState(), params, {"x": np.array([np.nan, 0.0])}, lr=0.1)
    assert "x" in str(error.value)
    with pytest.raises(ValueError):
        adam_step(AdamState(), params, {"x": np.zeros(3)}, lr=0.1)
    with pytest.raises(ValueError):
        adam_step(AdamState(), params, {"y": np.zeros(2)}, lr=0.1)
    np.testing.assert_array_equal(params["x"], [0.0, 0.0])


def test_train_config(tmp_path):
    config = TrainConfig()
    assert config.hidden_size == 200
    assert config.dropout == 0.25
    assert config.class_weight == 0.5

    updated = config.update(hidden_size=8, seed=None)
    assert updated.hidden_size == 8
    assert updated.seed == 0
    with pytest.raises(InvalidConfigError):
        config.update(unknown=1)
    with pytest.raises(InvalidConfigError):
        TrainConfig(dropout=1.0)
    with pytest.raises(InvalidConfigError):
        TrainConfig.from_dict({"batch_size": 0})

    path = tmp_path / "train.yaml"
    path.write_text("hidden_size: 16\nconstrained_decoding: false\n")
    loaded = TrainConfig.load(str(path))
    assert loaded.hidden_size == 16
    assert loaded.constrained_decoding is False
