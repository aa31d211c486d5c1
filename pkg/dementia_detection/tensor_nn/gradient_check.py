from typing import Callable

import numpy as np


def numerical_gradient(f: Callable[[], float], x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """
    Central differences of the scalar f() with respect to every entry of x. x is perturbed in place and
    restored, so f must read x (directly or through a parameter dict holding it).
    """
    grad = np.zeros(x.shape)
    for i in range(x.size):
        old = x.flat[i]
        x.flat[i] = old + h
        f_plus = f()
        x.flat[i] = old - h
        f_minus = f()
        x.flat[i] = old
        grad.flat[i] = (f_plus - f_minus) / (2. * h)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    norm = np.linalg.norm(a) + np.linalg.norm(b)
    if norm == 0.:
        return 0.
    return float(np.linalg.norm(a - b) / norm)
