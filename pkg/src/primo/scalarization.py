"""Random linear scalarization of objective vectors."""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def sample_weights(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` positive weights summing to one: uniform draws divided by their sum."""
    if n < 1:
        raise DomainError("need at least one objective")
    while True:
        w = rng.random(n)
        total = w.sum()
        if total > 0 and np.all(w > 0):
            return w / total


def scalarize(w, y) -> float | np.ndarray:
    """Weighted sum ``w . y``; ``y`` may be one vector or a stack of them."""
    w = np.asarray(w, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != w.shape[-1]:
        raise DomainError(f"weights have length {w.shape[-1]}, objectives {y.shape[-1]}")
    out = y @ w
    return float(out) if np.ndim(out) == 0 else out
