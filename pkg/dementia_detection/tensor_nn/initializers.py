from typing import Tuple

import numpy as np

from dementia_detection.tensor_nn.layers import Activation, DenseParams, LstmParams


def glorot_init(shape: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """Uniform on +-sqrt(6 / (fan_in + fan_out)) for a (fan_out, fan_in) weight matrix."""
    if len(shape) != 2:
        raise ValueError("glorot initialization needs a 2-D shape, got {}".format(shape))
    fan_out, fan_in = shape
    limit = np.sqrt(6. / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def orthogonal_init(shape: Tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    rows, cols = shape
    a = rng.normal(size=(max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    return q if rows >= cols else q.T


def lstm_bias_init(units: int) -> np.ndarray:
    b = np.zeros(4 * units)
    b[units:2 * units] = 1.
    return b


def init_lstm(input_dim: int, units: int, rng: np.random.Generator, dropout: float = 0.2,
              recurrent_dropout: float = 0.2) -> LstmParams:
    return LstmParams(W=glorot_init((4 * units, input_dim), rng),
                      U=orthogonal_init((4 * units, units), rng),
                      b=lstm_bias_init(units),
                      dropout=dropout,
                      recurrent_dropout=recurrent_dropout)


def init_dense(input_dim: int, output_dim: int, rng: np.random.Generator,
               activation: Activation = Activation.SIGMOID) -> DenseParams:
    return DenseParams(W=glorot_init((output_dim, input_dim), rng), b=np.zeros(output_dim),
                       activation=activation)
