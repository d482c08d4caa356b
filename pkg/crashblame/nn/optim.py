# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from crashblame.errors import TrainingError


@dataclass
class AdamState:
    """
    First and second moment estimates per named parameter, and the step count.
    """

    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def from_config(cls, config):
        return cls(beta1=config.beta1, beta2=config.beta2, epsilon=config.epsilon)


def adam_step(state, params, grads, lr):
    """
    One bias-corrected adaptive-moment update of params, in place.
    Parameters without a gradient entry are left alone.
    """
    for name, grad in grads.items():
        if name not in params:
            raise ValueError("gradient for unknown parameter %s" % name)
        if grad.shape != params[name].shape:
            raise ValueError(
                "gradient for %s has shape %s, parameter has %s"
                % (name, grad.shape, params[name].shape)
            )
        if not np.all(np.isfinite(grad)):
            raise TrainingError("non-finite gradient for parameter %s" % name)

    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    step_size = lr / bc1

    for name in sorted(grads):
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(params[name])
            state.v[name] = np.zeros_like(params[name])
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        params[name] -= step_size * m / (np.sqrt(v / bc2) + state.epsilon)
    return params
