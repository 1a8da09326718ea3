"""Asynchronous successive halving with multi-objective promotions.

Records at each rung are ranked by non-dominated sorting; inside a front the
order comes from a greedy farthest-point ("epsilon-net") selection in
rung-normalized objective space.  With one objective the ranking reduces to a
stable ascending sort, which gives plain ASHA.

The scheduler is single-writer: callers alternate :meth:`Scheduler.suggest` and
:meth:`Scheduler.observe` (or :meth:`Scheduler.observe_failure`) and may run the
evaluation itself anywhere in between.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, ProtocolError
from .pareto import non_dominated_mask
from .search_space import Configuration

DEFAULT_ETA = 3


def rung_levels(z_min: int, z_max: int, eta: int = DEFAULT_ETA) -> list[int]:
    """Geometric fidelities ``z_min * eta**k`` below ``z_max``, then ``z_max``."""
    if not (1 <= z_min < z_max) or eta < 2:
        raise DomainError("need 1 <= z_min < z_max and eta >= 2")
    levels = []
    k = 0
    while True:
        z = int(round(z_min * eta**k))
        if z >= z_max:
            break
        if not levels or z > levels[-1]:
            levels.append(z)
        k += 1
    levels.append(z_max)
    return levels


def _farthest_point_order(y: np.ndarray, idx: np.ndarray) -> list[int]:
    """Greedy max-min ordering of ``y[idx]``; returns positions into ``idx``."""
    pts = y[idx]
    # lexicographic minimum first, earliest index on ties
    first = int(np.lexsort(pts.T[::-1])[0])
    order = [first]
    dmin = np.linalg.norm(pts - pts[first], axis=1)
    dmin[first] = -np.inf
    for _ in range(len(idx) - 1):
        nxt = int(np.argmax(dmin))  # argmax returns the first maximum
        order.append(nxt)
        dmin = np.minimum(dmin, np.linalg.norm(pts - pts[nxt], axis=1))
        dmin[order] = -np.inf
    return order


def mo_rank(records) -> list[int]:
    """Permutation of ``records`` from best to worst.

    Fronts of non-dominated sorting come first-to-last; inside a front the
    points are ordered by greedy farthest-point selection after scaling every
    objective to ``[0, 1]`` over all records.
    """
    y = np.asarray(records, dtype=float)
    if y.size == 0:
        return []
    if y.ndim == 1:
        y = y[:, None]
    if y.shape[1] == 1:
        # tied fronts keep insertion order, so this is exactly the general path
        return np.argsort(y[:, 0], kind="stable").tolist()
    lo, hi = y.min(axis=0), y.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    scaled = (y - lo) / span
    remaining = np.arange(len(y))
    ranking: list[int] = []
    while len(remaining):
        mask = non_dominated_mask(y[remaining])
        front = remaining[mask]
        ranking.extend(int(front[p]) for p in _farthest_point_order(scaled, front))
        remaining = remaining[~mask]
    return ranking


@dataclass
class Rung:
    level_index: int
    fidelity: int
    records: list[tuple[int, np.ndarray]] = field(default_factory=list)
    promoted: set[int] = field(default_factory=set)

    def ids(self) -> list[int]:
        return [cid for cid, _ in self.records]


class Suggestion(NamedTuple):
    config_id: int
    config: Configuration
    fidelity: int
    is_continuation: bool
    previous_fidelity: int  # 0 for a fresh configuration


class Scheduler:
    """State of one (MO)ASHA run."""

    def __init__(self, z_min: int, z_max: int, eta: int = DEFAULT_ETA):
        self.eta = eta
        self.rungs = [
            Rung(level_index=k, fidelity=z)
            for k, z in enumerate(rung_levels(z_min, z_max, eta))
        ]
        self.configs: dict[int, Configuration] = {}
        self.pending: dict[int, int] = {}  # config id -> rung index
        self.highest: dict[int, int] = {}  # config id -> highest rung reached
        self._next_id = 0

    @property
    def z_min(self) -> int:
        return self.rungs[0].fidelity

    @property
    def z_max(self) -> int:
        return self.rungs[-1].fidelity

    def _rung_of(self, fidelity: int) -> int:
        for r in self.rungs:
            if r.fidelity == fidelity:
                return r.level_index
        raise ProtocolError(f"fidelity {fidelity} is not a rung level")

    def promotable(self, level: int) -> list[int]:
        """Config ids eligible for promotion out of rung ``level``, best first."""
        if level >= len(self.rungs) - 1:
            return []
        rung = self.rungs[level]
        m = len(rung.records)
        slots = m // self.eta
        if slots == 0:
            return []
        ranking = mo_rank([y for _, y in rung.records])
        out = []
        for pos in ranking[:slots]:
            cid = rung.records[pos][0]
            if cid in rung.promoted or self.pending.get(cid) == level + 1:
                continue
            out.append(cid)
        return out

    def suggest(
        self,
        rng: np.random.Generator,
        new_config_sampler: Callable[[np.random.Generator], Configuration],
    ) -> Suggestion:
        for level in range(len(self.rungs) - 2, -1, -1):
            candidates = self.promotable(level)
            if candidates:
                cid = candidates[0]
                self.rungs[level].promoted.add(cid)
                self.pending[cid] = level + 1
                return Suggestion(
                    cid,
                    self.configs[cid],
                    self.rungs[level + 1].fidelity,
                    True,
                    self.rungs[level].fidelity,
                )
        config = new_config_sampler(rng)
        cid = self._next_id
        self._next_id += 1
        self.configs[cid] = config
        self.pending[cid] = 0
        return Suggestion(cid, config, self.rungs[0].fidelity, False, 0)

    def observe(self, config_id: int, fidelity: int, y) -> None:
        level = self._rung_of(fidelity)
        if self.pending.get(config_id) != level:
            raise ProtocolError(f"config {config_id} was not pending at fidelity {fidelity}")
        rung = self.rungs[level]
        if config_id in rung.ids():
            raise ProtocolError(f"config {config_id} already recorded at fidelity {fidelity}")
        rung.records.append((config_id, np.asarray(y, dtype=float).ravel()))
        del self.pending[config_id]
        self.highest[config_id] = level

    def observe_failure(self, config_id: int, fidelity: int) -> None:
        """Clear a pending evaluation that produced no result."""
        level = self._rung_of(fidelity)
        if self.pending.get(config_id) != level:
            raise ProtocolError(f"config {config_id} was not pending at fidelity {fidelity}")
        del self.pending[config_id]
