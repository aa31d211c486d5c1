from typing import Dict

import numpy as np

from dementia_detection.generic_tools.exceptions import ShapeError


class TrainState:
    """Adam moments per parameter name, step count and hyper parameters."""
    learning_rate: float
    beta1: float
    beta2: float
    epsilon: float
    step: int
    m: Dict[str, np.ndarray]
    v: Dict[str, np.ndarray]

    def __init__(self, learning_rate: float = 0.001, beta1: float = 0.9, beta2: float = 0.999,
                 epsilon: float = 1e-7):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step = 0
        self.m = {}
        self.v = {}


def adam_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], state: TrainState):
    """Bias corrected adaptive moment update, applied in place to params."""
    state.step += 1
    bc1 = 1. - state.beta1 ** state.step
    bc2 = 1. - state.beta2 ** state.step
    for k in params:
        g = grads[k]
        if g.shape != params[k].shape:
            raise ShapeError("gradient of {} has shape {}, parameter {}".format(k, g.shape, params[k].shape))
        if k not in state.m:
            state.m[k] = np.zeros_like(params[k])
            state.v[k] = np.zeros_like(params[k])
        state.m[k] *= state.beta1
        state.m[k] += (1. - state.beta1) * g
        state.v[k] *= state.beta2
        state.v[k] += (1. - state.beta2) * (g * g)
        m_hat = state.m[k] / bc1
        v_hat = state.v[k] / bc2
        params[k] -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return params
