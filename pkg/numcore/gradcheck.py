"""
Central finite-difference checks against the tape.
"""

from typing import Callable, List, Sequence

import numpy as np

from numcore.tensor import DiffTensor, backward, no_grad


def numeric_gradient(
    fn: Callable[[], DiffTensor],
    leaf: DiffTensor,
    h: float = 1e-5,
) -> np.ndarray:
    """d fn() / d leaf by central differences, perturbing leaf.values in place."""
    grad = np.zeros(leaf.shape, dtype=np.float64)
    leaf.values = np.ascontiguousarray(leaf.values)
    flat = leaf.values.reshape(-1)
    out = grad.reshape(-1)
    with no_grad():
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            plus = fn().item()
            flat[i] = original - h
            minus = fn().item()
            flat[i] = original
            out[i] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-7) -> float:
    """||a - n|| / max(||a||, ||n||, floor)."""
    diff = np.linalg.norm(np.asarray(analytic, dtype=np.float64) - numeric)
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), floor)
    return float(diff / scale)


def check_gradients(
    fn: Callable[[], DiffTensor],
    leaves: Sequence[DiffTensor],
    h: float = 1e-5,
) -> List[float]:
    """
    Relative error between tape and finite-difference gradients, one per leaf.

    `fn` must rebuild the graph from the leaves on every call.
    """
    for leaf in leaves:
        leaf.zero_grad()
    backward(fn())
    errors = []
    for leaf in leaves:
        analytic = leaf.grad.copy()
        errors.append(relative_error(analytic, numeric_gradient(fn, leaf, h)))
    return errors
