"""Dominance, Pareto sets and the hypervolume indicator (all objectives minimized)."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DomainError

MC_SAMPLES = 200_000


def _as_points(points, n: int | None = None) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, n if n is not None else 0)
    if arr.ndim == 1:
        arr = arr[None, :]
    if n is not None and arr.shape[1] != n:
        raise DomainError(f"points have {arr.shape[1]} objectives, reference has {n}")
    return arr


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff ``a`` Pareto-dominates ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DomainError(f"length mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def non_dominated_mask(points) -> np.ndarray:
    """Boolean mask of the points not dominated by any other point."""
    y = _as_points(points)
    m = len(y)
    if m == 0:
        return np.zeros(0, dtype=bool)
    if y.shape[1] == 2:
        # sort by f1 then f2; a point survives iff its f2 beats every earlier point
        # that is not an exact duplicate of it
        order = np.lexsort((y[:, 1], y[:, 0]))
        mask = np.zeros(m, dtype=bool)
        best_f2 = np.inf
        i = 0
        while i < m:
            j = i
            head = y[order[i]]
            while j < m and np.array_equal(y[order[j]], head):
                j += 1
            if head[1] < best_f2:
                mask[order[i:j]] = True
                best_f2 = head[1]
            i = j
        return mask
    le = np.all(y[:, None, :] <= y[None, :, :], axis=2)
    lt = np.any(y[:, None, :] < y[None, :, :], axis=2)
    dominated = np.any(le & lt, axis=0)
    return ~dominated


def pareto_set(points, payloads: Sequence | None = None):
    """Non-dominated subset of ``points`` in input order.

    Returns the surviving objective vectors as an ``(k, n)`` array, or a list of
    ``(payload, vector)`` pairs when ``payloads`` is given.
    """
    y = _as_points(points)
    mask = non_dominated_mask(y)
    if payloads is None:
        return y[mask]
    if len(payloads) != len(y):
        raise DomainError("payloads and points differ in length")
    return [(payloads[i], y[i]) for i in np.flatnonzero(mask)]


def _hv2d(y: np.ndarray, ref: np.ndarray) -> float:
    y = np.minimum(y, ref)
    y = y[non_dominated_mask(y)]
    if len(y) == 0:
        return 0.0
    y = y[np.argsort(y[:, 0], kind="stable")]
    # f2 is decreasing along the sorted front
    widths = np.diff(np.append(y[:, 0], ref[0]))
    heights = ref[1] - y[:, 1]
    return float(np.sum(widths * heights))


def hypervolume_mc(
    points,
    ref: Sequence[float],
    n_samples: int = MC_SAMPLES,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Monte Carlo hypervolume estimate and its standard error.

    Samples uniformly in the box spanned by the ideal point of ``points`` and
    ``ref``.
    """
    ref = np.asarray(ref, dtype=float)
    y = _as_points(points, len(ref))
    if len(y) == 0:
        return 0.0, 0.0
    y = np.minimum(y, ref)
    y = y[non_dominated_mask(y)]
    ideal = y.min(axis=0)
    box = float(np.prod(ref - ideal))
    if box == 0.0:
        return 0.0, 0.0
    rng = np.random.default_rng(0) if rng is None else rng
    hits = 0
    chunk = 20_000
    done = 0
    while done < n_samples:
        k = min(chunk, n_samples - done)
        s = ideal + rng.random((k, len(ref))) * (ref - ideal)
        covered = np.zeros(k, dtype=bool)
        for p in y:
            covered |= np.all(s >= p, axis=1)
        hits += int(covered.sum())
        done += k
    frac = hits / n_samples
    return box * frac, box * np.sqrt(frac * (1 - frac) / n_samples)


def hypervolume(points, ref: Sequence[float], rng: np.random.Generator | None = None) -> float:
    """Lebesgue measure of the region dominated by ``points`` and bounded by ``ref``.

    Points outside the reference box are clipped to it.  Exact for one and two
    objectives; a Monte Carlo estimate (see :func:`hypervolume_mc`) otherwise.
    """
    ref = np.asarray(ref, dtype=float)
    if ref.ndim != 1 or len(ref) == 0:
        raise DomainError("reference point must be a non-empty vector")
    y = _as_points(points, len(ref))
    if len(y) == 0:
        return 0.0
    if len(ref) == 1:
        return float(max(0.0, ref[0] - y[:, 0].min()))
    if len(ref) == 2:
        return _hv2d(y, ref)
    return hypervolume_mc(y, ref, rng=rng)[0]


def hvi(pareto, ref: Sequence[float], new_points) -> float:
    """Hypervolume gained by adding ``new_points`` to ``pareto``."""
    ref = np.asarray(ref, dtype=float)
    p = _as_points(pareto, len(ref))
    g = _as_points(new_points, len(ref))
    rng_a, rng_b = np.random.default_rng(0), np.random.default_rng(0)
    gain = hypervolume(np.vstack([p, g]), ref, rng=rng_a) - hypervolume(p, ref, rng=rng_b)
    return max(0.0, gain)


def normalized_hv_regret(hv_trace: Sequence[float], hv_best: float) -> np.ndarray:
    if hv_best <= 0:
        raise DomainError("best known hypervolume must be positive")
    trace = np.asarray(hv_trace, dtype=float)
    return np.clip((hv_best - trace) / hv_best, 0.0, 1.0)
