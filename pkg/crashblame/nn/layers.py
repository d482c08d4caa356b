# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Dense, dropout and LSTM layers over 64-bit numpy arrays, each with a
# hand-derived backward pass. Gate blocks are stacked in the order
# input, forget, output, candidate.

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

GATES = ("input", "forget", "output", "candidate")


def check_shape(name, actual, expected):
    if tuple(actual) != tuple(expected):
        raise ValueError(
            "%s has shape %s, expected %s" % (name, tuple(actual), tuple(expected))
        )


def glorot_uniform(rng, fan_out, fan_in, rows=None):
    """
    Uniform in (-r, r) with r = sqrt(6 / (fan_in + fan_out)).
    """
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(rows or fan_out, fan_in))


@dataclass
class LstmParams:
    W: np.ndarray  # 4H x D
    U: np.ndarray  # 4H x H
    b: np.ndarray  # 4H

    def __post_init__(self):
        hidden = self.hidden_size
        check_shape("U", self.U.shape, (4 * hidden, hidden))
        check_shape("b", self.b.shape, (4 * hidden,))
        if self.W.ndim != 2 or self.W.shape[0] != 4 * hidden:
            raise ValueError(
                "W has shape %s, expected (%s, input size)" % (self.W.shape, 4 * hidden)
            )

    @property
    def hidden_size(self):
        return self.U.shape[1]

    @property
    def input_size(self):
        return self.W.shape[1]

    @classmethod
    def init(cls, rng, input_size, hidden_size):
        W = glorot_uniform(rng, hidden_size, input_size, rows=4 * hidden_size)
        U = glorot_uniform(rng, hidden_size, hidden_size, rows=4 * hidden_size)
        b = np.zeros(4 * hidden_size)
        b[hidden_size : 2 * hidden_size] = 1.0
        return cls(W=W, U=U, b=b)

    @classmethod
    def zeros(cls, input_size, hidden_size):
        return cls(
            W=np.zeros((4 * hidden_size, input_size)),
            U=np.zeros((4 * hidden_size, hidden_size)),
            b=np.zeros(4 * hidden_size),
        )

    @classmethod
    def from_params(cls, params, prefix):
        return cls(
            W=params[prefix + ".W"], U=params[prefix + ".U"], b=params[prefix + ".b"]
        )

    def to_params(self, prefix):
        return {prefix + ".W": self.W, prefix + ".U": self.U, prefix + ".b": self.b}


def lstm_forward(params, inputs):
    """
    Run the recurrence from a zero state over inputs (T x D).
    Returns the hidden states (T x H) and a cache for lstm_backward.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != params.input_size:
        raise ValueError(
            "inputs have shape %s, expected (T, %s)" % (inputs.shape, params.input_size)
        )
    steps = inputs.shape[0]
    hidden = params.hidden_size

    projected = inputs @ params.W.T + params.b
    gates = np.zeros((steps, 4 * hidden))
    cells = np.zeros((steps, hidden))
    states = np.zeros((steps, hidden))
    h_prev = np.zeros(hidden)
    c_prev = np.zeros(hidden)
    for t in range(steps):
        z = projected[t] + params.U @ h_prev
        gate = gates[t]
        gate[: 3 * hidden] = expit(z[: 3 * hidden])
        gate[3 * hidden :] = np.tanh(z[3 * hidden :])
        i, f, o, g = np.split(gate, 4)
        c_prev = f * c_prev + i * g
        h_prev = o * np.tanh(c_prev)
        cells[t] = c_prev
        states[t] = h_prev

    cache = {"inputs": inputs, "gates": gates, "cells": cells, "states": states}
    return states, cache


def lstm_backward(params, cache, dstates):
    """
    Backpropagate dstates (T x H) through time.
    Returns (dinputs, LstmParams of gradients).
    """
    inputs = cache["inputs"]
    gates = cache["gates"]
    cells = cache["cells"]
    states = cache["states"]
    check_shape("dstates", dstates.shape, states.shape)
    steps, hidden = states.shape

    grads = LstmParams.zeros(params.input_size, hidden)
    dz = np.zeros((steps, 4 * hidden))
    dh_next = np.zeros(hidden)
    dc_next = np.zeros(hidden)
    for t in reversed(range(steps)):
        i, f, o, g = np.split(gates[t], 4)
        c_prev = cells[t - 1] if t > 0 else np.zeros(hidden)
        tanh_c = np.tanh(cells[t])

        dh = dstates[t] + dh_next
        dc = dh * o * (1.0 - tanh_c ** 2) + dc_next
        dz[t] = np.concatenate(
            [
                dc * g * i * (1.0 - i),
                dc * c_prev * f * (1.0 - f),
                dh * tanh_c * o * (1.0 - o),
                dc * i * (1.0 - g ** 2),
            ]
        )
        dh_next = params.U.T @ dz[t]
        dc_next = dc * f

    previous = np.vstack([np.zeros((1, hidden)), states[:-1]])
    grads.W += dz.T @ inputs
    grads.U += dz.T @ previous
    grads.b += dz.sum(axis=0)
    return dz @ params.W, grads


def bilstm_forward(fwd_params, bwd_params, inputs):
    """
    Concatenate a left-to-right pass with a right-to-left pass (T x 2H).
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    forward, fwd_cache = lstm_forward(fwd_params, inputs)
    backward, bwd_cache = lstm_forward(bwd_params, inputs[::-1])
    states = np.hstack([forward, backward[::-1]])
    return states, {"fwd": fwd_cache, "bwd": bwd_cache}


def bilstm_backward(fwd_params, bwd_params, cache, dstates):
    hidden = fwd_params.hidden_size
    dfwd, fwd_grads = lstm_backward(fwd_params, cache["fwd"], dstates[:, :hidden])
    dbwd, bwd_grads = lstm_backward(
        bwd_params, cache["bwd"], dstates[:, hidden:][::-1]
    )
    return dfwd + dbwd[::-1], fwd_grads, bwd_grads


def dense_forward(W, b, x):
    """
    x @ W.T + b for a vector or a matrix of rows.
    """
    x = np.asarray(x, dtype=np.float64)
    if W.ndim != 2 or x.shape[-1] != W.shape[1]:
        raise ValueError("cannot apply weights %s to input %s" % (W.shape, x.shape))
    check_shape("bias", b.shape, (W.shape[0],))
    return x @ W.T + b


def dense_backward(W, x, dy):
    """
    Returns (dx, dW, db).
    """
    x2 = np.atleast_2d(x)
    dy2 = np.atleast_2d(dy)
    dx = dy @ W
    return dx, dy2.T @ x2, dy2.sum(axis=0)


def dropout(x, rate, rng=None, train=True):
    """
    Inverted dropout. Returns (output, mask); the mask already carries the
    1 / (1 - rate) scale and is None when dropout is a no-op.
    """
    if not 0 <= rate < 1:
        raise ValueError("dropout rate must be in [0, 1), got %s" % rate)
    if not train or rate == 0:
        return x, None
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    mask = (rng.random(np.shape(x)) >= rate) / (1.0 - rate)
    return x * mask, mask


def dropout_backward(dy, mask):
    return dy if mask is None else dy * mask
