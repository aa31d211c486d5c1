from typing import Tuple

import numpy as np

EPSILON = 1e-12


def bce_loss(p: np.ndarray, y: np.ndarray, eps: float = EPSILON) -> Tuple[float, np.ndarray]:
    """
    Mean binary cross entropy of probabilities p against labels y, with p clamped to [eps, 1 - eps].
    :return: the loss and its gradient with respect to p
    """
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    pc = np.clip(p, eps, 1. - eps)
    loss = -np.mean(y * np.log(pc) + (1. - y) * np.log(1. - pc))
    dp = (-y / pc + (1. - y) / (1. - pc)) / p.size
    return float(loss), dp
