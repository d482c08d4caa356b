# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Frame-level attention and the emission head that feeds the CRF.
#
#   scores = h @ w           (one score per frame)
#   alpha  = softmax(scores)
#   h_star = tanh(alpha @ h)  (the stack context vector)
#   P_i    = E @ [h_i ; h_star] + e

import numpy as np
from scipy.special import softmax

from .layers import check_shape, dense_backward, dense_forward


def attention_weights(scores):
    return softmax(scores)


def attend(states, w):
    """
    Attention weights over frames (T) and the context vector (2H).
    Returns (alpha, h_star, cache).
    """
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 2 or states.shape[0] == 0:
        raise ValueError("attention needs at least one frame, got shape %s" % (states.shape,))
    check_shape("attention vector", w.shape, (states.shape[1],))
    scores = states @ w
    alpha = attention_weights(scores)
    h_star = np.tanh(alpha @ states)
    return alpha, h_star, {"states": states, "alpha": alpha, "h_star": h_star}


def attend_backward(w, cache, dh_star, dalpha=None):
    """
    Returns (dstates, dw).
    """
    states = cache["states"]
    alpha = cache["alpha"]
    dpooled = dh_star * (1.0 - cache["h_star"] ** 2)

    dstates = np.outer(alpha, dpooled)
    dweights = states @ dpooled
    if dalpha is not None:
        dweights = dweights + dalpha
    dscores = alpha * (dweights - alpha @ dweights)
    dstates += np.outer(dscores, w)
    return dstates, states.T @ dscores


def emission_inputs(states, h_star):
    steps = states.shape[0]
    return np.hstack([states, np.tile(h_star, (steps, 1))])


def emissions(states, h_star, E, e):
    """
    Per-frame tag scores (T x k) from each frame state joined with h_star.
    No softmax: the CRF consumes raw scores.
    """
    width = states.shape[1] + h_star.shape[0]
    if E.ndim != 2 or E.shape[1] != width:
        raise ValueError(
            "emission weights have shape %s, expected (k, %s)" % (E.shape, width)
        )
    return dense_forward(E, e, emission_inputs(states, h_star))


def emissions_backward(states, h_star, E, dP):
    """
    Returns (dstates, dh_star, dE, de).
    """
    joined = emission_inputs(states, h_star)
    djoined, dE, de = dense_backward(E, joined, dP)
    width = states.shape[1]
    return djoined[:, :width], djoined[:, width:].sum(axis=0), dE, de
