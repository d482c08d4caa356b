# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

import numpy as np

DEFAULT_EPS = 1e-5

# Gradients smaller than this are compared in absolute terms
RELATIVE_FLOOR = 1e-5


def relative_error(analytic, numeric, floor=RELATIVE_FLOOR):
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def numeric_gradient(loss_fn, params, name, eps=DEFAULT_EPS):
    """
    Central differences of loss_fn(params) for every entry of params[name].
    The parameter is restored after each perturbation.
    """
    values = params[name]
    grad = np.zeros_like(values)
    for j in range(values.size):
        original = values.flat[j]
        values.flat[j] = original + eps
        plus = loss_fn(params)
        values.flat[j] = original - eps
        minus = loss_fn(params)
        values.flat[j] = original
        grad.flat[j] = (plus - minus) / (2 * eps)
    return grad


def grad_check(model_fn, params, eps=DEFAULT_EPS, names=None):
    """
    Compare the analytic gradients of model_fn against central differences.

    model_fn(params) returns (loss, grads) where grads maps parameter names to
    arrays shaped like params. Returns the max relative error over all
    checked entries.
    """
    _, analytic = model_fn(params)

    def loss_fn(p):
        return model_fn(p)[0]

    worst = 0.0
    for name in sorted(names or analytic):
        numeric = numeric_gradient(loss_fn, params, name, eps)
        if numeric.size:
            worst = max(worst, float(relative_error(analytic[name], numeric).max()))
    return worst
