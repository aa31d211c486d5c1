"""
Forward and backward passes of the layers used by the models: dense, LSTM, masked mean pooling over time,
dropout and concatenation.

Arrays are numpy float64. Forward functions return (output, cache); backward functions take the upstream
gradient and the cache and return the input gradient (plus a dict of parameter gradients for layers that
have parameters). Sequences are batch major (B x L x d) with a boolean mask (B x L) whose padding is
trailing.
"""
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from dementia_detection.generic_tools.exceptions import ShapeError

Tensor = np.ndarray


class Activation(Enum):
    SIGMOID = 0
    IDENTITY = 1


def sigmoid(x: Tensor) -> Tensor:
    # split by sign so that exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1. / (1. + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1. + ex)
    return out


def check_rate(rate: float, name: str = "dropout"):
    if not 0. <= rate < 1.:
        raise ValueError("{} rate must lie in [0, 1), got {}".format(name, rate))


class DenseParams:
    W: Tensor
    b: Tensor
    activation: Activation

    def __init__(self, W: Tensor, b: Tensor, activation: Activation = Activation.SIGMOID):
        if W.ndim != 2 or b.shape != (W.shape[0],):
            raise ShapeError("dense weights {} and bias {} disagree".format(W.shape, b.shape))
        self.W = W
        self.b = b
        self.activation = activation

    @property
    def in_dim(self) -> int:
        return self.W.shape[1]

    @property
    def out_dim(self) -> int:
        return self.W.shape[0]

    @property
    def n_params(self) -> int:
        return self.W.size + self.b.size


class LstmParams:
    """Gate blocks of W (4u x in), U (4u x u) and b (4u) are ordered input, forget, candidate, output."""
    W: Tensor
    U: Tensor
    b: Tensor
    units: int
    dropout: float
    recurrent_dropout: float

    def __init__(self, W: Tensor, U: Tensor, b: Tensor, dropout: float = 0.2, recurrent_dropout: float = 0.2):
        units = U.shape[1]
        if U.shape != (4 * units, units) or W.ndim != 2 or W.shape[0] != 4 * units or b.shape != (4 * units,):
            raise ShapeError("lstm weights W {}, U {}, b {} disagree".format(W.shape, U.shape, b.shape))
        check_rate(dropout)
        check_rate(recurrent_dropout, "recurrent dropout")
        self.W = W
        self.U = U
        self.b = b
        self.units = units
        self.dropout = dropout
        self.recurrent_dropout = recurrent_dropout

    @property
    def input_dim(self) -> int:
        return self.W.shape[1]

    @property
    def n_params(self) -> int:
        return self.W.size + self.U.size + self.b.size


def dense_forward(x: Tensor, p: DenseParams) -> Tuple[Tensor, Dict]:
    if x.ndim != 2 or x.shape[1] != p.in_dim:
        raise ShapeError("dense layer expects B x {}, got {}".format(p.in_dim, x.shape))
    z = x @ p.W.T + p.b
    y = sigmoid(z) if p.activation == Activation.SIGMOID else z
    return y, {"x": x, "y": y, "params": p}


def dense_backward(dy: Tensor, cache: Dict) -> Tuple[Tensor, Dict[str, Tensor]]:
    p: DenseParams = cache["params"]
    dz = dy * cache["y"] * (1. - cache["y"]) if p.activation == Activation.SIGMOID else dy
    return dz @ p.W, {"W": dz.T @ cache["x"], "b": dz.sum(axis=0)}


def check_mask(mask: Tensor, shape: Tuple[int, int]):
    if mask.shape != shape:
        raise ShapeError("mask of shape {} for sequences of shape {}".format(mask.shape, shape))
    if np.any(mask[:, 1:] & ~mask[:, :-1]):
        raise ShapeError("sequence mask has a true step after a false one, padding must be trailing")


def dropout_mask(shape: Tuple[int, ...], rate: float, training: bool,
                 rng: Optional[np.random.Generator]) -> Tensor:
    """Inverted dropout multiplier: 0 or 1/(1-rate), ones at inference."""
    if not training or rate == 0.:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1. - rate)


def lstm_forward(x: Tensor, mask: Tensor, p: LstmParams, training: bool = False,
                 rng: Optional[np.random.Generator] = None) -> Tuple[Tensor, Tensor, Dict]:
    """
    :return: h_seq (B x L x units), h_last (B x units), cache. Masked steps carry h and c forward
    unchanged so h_last is the state at the last true step.
    """
    if x.ndim != 3 or x.shape[2] != p.input_dim:
        raise ShapeError("lstm expects B x L x {}, got {}".format(p.input_dim, x.shape))
    n, length, _ = x.shape
    check_mask(mask, (n, length))
    u = p.units
    mx = dropout_mask((n, p.input_dim), p.dropout, training, rng)
    mh = dropout_mask((n, u), p.recurrent_dropout, training, rng)
    h = np.zeros((n, u))
    c = np.zeros((n, u))
    h_seq = np.zeros((n, length, u))
    steps = []
    for t in range(length):
        xd = x[:, t] * mx
        hd = h * mh
        z = xd @ p.W.T + hd @ p.U.T + p.b
        i = sigmoid(z[:, :u])
        f = sigmoid(z[:, u:2 * u])
        g = np.tanh(z[:, 2 * u:3 * u])
        o = sigmoid(z[:, 3 * u:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        m = mask[:, t][:, None]
        steps.append({"xd": xd, "hd": hd, "c_prev": c, "i": i, "f": f, "g": g, "o": o, "tc": tc})
        c = np.where(m, c_new, c)
        h = np.where(m, h_new, h)
        h_seq[:, t] = h
    return h_seq, h, {"mask": mask, "mx": mx, "mh": mh, "steps": steps, "params": p}


def lstm_backward(dh_last: Tensor, cache: Dict,
                  dh_seq: Optional[Tensor] = None) -> Tuple[Tensor, Dict[str, Tensor]]:
    """Backpropagation through time, replaying the dropout masks of the forward pass."""
    p: LstmParams = cache["params"]
    mask = cache["mask"]
    steps = cache["steps"]
    n, length = mask.shape
    dW = np.zeros_like(p.W)
    dU = np.zeros_like(p.U)
    db = np.zeros_like(p.b)
    dx = np.zeros((n, length, p.input_dim))
    dh = dh_last.copy()
    dc = np.zeros_like(dh)
    for t in reversed(range(length)):
        s = steps[t]
        if dh_seq is not None:
            dh = dh + dh_seq[:, t]
        m = mask[:, t][:, None].astype(np.float64)
        dh_new = dh * m
        do = dh_new * s["tc"]
        dc_new = dc * m + dh_new * s["o"] * (1. - s["tc"] ** 2)
        di = dc_new * s["g"]
        dg = dc_new * s["i"]
        df = dc_new * s["c_prev"]
        dz = np.concatenate([di * s["i"] * (1. - s["i"]),
                             df * s["f"] * (1. - s["f"]),
                             dg * (1. - s["g"] ** 2),
                             do * s["o"] * (1. - s["o"])], axis=1)
        dW += dz.T @ s["xd"]
        dU += dz.T @ s["hd"]
        db += dz.sum(axis=0)
        dx[:, t] = (dz @ p.W) * cache["mx"]
        dc = dc_new * s["f"] + dc * (1. - m)
        dh = (dz @ p.U) * cache["mh"] + dh * (1. - m)
    return dx, {"W": dW, "U": dU, "b": db}


def mean_pool_time(x: Tensor, mask: Tensor) -> Tuple[Tensor, Dict]:
    if x.ndim != 3:
        raise ShapeError("pooling expects B x T x d, got {}".format(x.shape))
    if mask.shape != x.shape[:2]:
        raise ShapeError("mask of shape {} for sequences of shape {}".format(mask.shape, x.shape))
    counts = mask.sum(axis=1).astype(np.float64)
    if np.any(counts == 0):
        raise ShapeError("cannot pool a sequence with no true step (rows {})".format(
            np.flatnonzero(counts == 0).tolist()))
    weights = mask[:, :, None] / counts[:, None, None]
    return (x * weights).sum(axis=1), {"weights": weights}


def mean_pool_time_backward(dy: Tensor, cache: Dict) -> Tensor:
    return dy[:, None, :] * cache["weights"]


def dropout(x: Tensor, rate: float = 0.2, training: bool = False,
            rng: Optional[np.random.Generator] = None) -> Tuple[Tensor, Dict]:
    check_rate(rate)
    scale = dropout_mask(x.shape, rate, training, rng)
    return x * scale, {"scale": scale}


def dropout_backward(dy: Tensor, cache: Dict) -> Tensor:
    return dy * cache["scale"]


def concat(xs: Sequence[Tensor]) -> Tuple[Tensor, Dict]:
    sizes = {x.shape[0] for x in xs}
    if len(sizes) != 1:
        raise ShapeError("cannot concatenate batches of sizes {}".format([x.shape[0] for x in xs]))
    return np.concatenate(xs, axis=1), {"widths": [x.shape[1] for x in xs]}


def concat_backward(dy: Tensor, cache: Dict) -> List[Tensor]:
    bounds = np.cumsum(cache["widths"])[:-1]
    return np.split(dy, bounds, axis=1)
