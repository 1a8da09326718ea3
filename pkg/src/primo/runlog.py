"""Trial records, run logs and hypervolume traces.

A run log is a line-delimited JSON file (format ``runlog/1``): one header
record, one record per trial, and a footer record once the run finished::

    {"type": "header", "format": "runlog/1", "optimizer": ..., ...}
    {"type": "trial", "index": 0, "config": {...}, "fidelity": 1, ...}
    ...
    {"type": "footer", "n_trials": 87, "total": 20.148148148148145}

Keys are sorted and floats written with ``repr`` so reruns of a cell are
byte-identical.  ``wall_time`` is ``null`` unless wall-clock recording was
requested explicitly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError
from .pareto import hypervolume

FORMAT = "runlog/1"
TOL = 1e-9


@dataclass(frozen=True)
class Trial:
    index: int
    config: dict
    fidelity: int
    is_continuation: bool
    objectives: list | None  # minimization convention; None when failed
    scalarized: float | None
    delta: float
    cumulative: float
    status: str = "ok"
    phase: str = ""
    wall_time: float | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_record(self) -> dict:
        d = asdict(self)
        d["type"] = "trial"
        return d

    @classmethod
    def from_record(cls, d: dict) -> "Trial":
        d = {k: v for k, v in d.items() if k != "type"}
        return cls(**d)


@dataclass
class RunLog:
    header: dict
    trials: list[Trial] = field(default_factory=list)
    complete: bool = False

    def append(self, trial: Trial) -> None:
        if self.complete:
            raise ParseError("run log is closed")
        self.trials.append(trial)

    def close(self) -> None:
        self.complete = True

    @property
    def total(self) -> float:
        return self.trials[-1].cumulative if self.trials else 0.0

    @property
    def reference_point(self) -> np.ndarray:
        return np.asarray(self.header["reference_point"], dtype=float)

    def dumps(self) -> str:
        lines = [_dump({"type": "header", "format": FORMAT, **self.header})]
        lines += [_dump(t.to_record()) for t in self.trials]
        if self.complete:
            lines.append(
                _dump({"type": "footer", "n_trials": len(self.trials), "total": self.total})
            )
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(self.dumps())
        tmp.replace(path)

    @classmethod
    def loads(cls, text: str, source: str = "<runlog>") -> "RunLog":
        log = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{source}: line {lineno}: {exc}") from None
            kind = rec.get("type")
            if lineno == 1:
                if kind != "header" or rec.get("format") != FORMAT:
                    raise ParseError(f"{source}: line 1: expected a {FORMAT} header")
                header = {k: v for k, v in rec.items() if k not in ("type", "format")}
                log = cls(header)
            elif kind == "trial":
                try:
                    log.trials.append(Trial.from_record(rec))
                except TypeError as exc:
                    raise ParseError(f"{source}: line {lineno}: {exc}") from None
            elif kind == "footer":
                if rec.get("n_trials") != len(log.trials):
                    raise ParseError(f"{source}: line {lineno}: footer trial count mismatch")
                log.complete = True
            else:
                raise ParseError(f"{source}: line {lineno}: unknown record type {kind!r}")
        if log is None:
            raise ParseError(f"{source}: empty run log")
        return log

    @classmethod
    def load(cls, path) -> "RunLog":
        path = Path(path)
        return cls.loads(path.read_text(), source=str(path))


def _dump(d: dict) -> str:
    return json.dumps(_plain(d), sort_keys=True, allow_nan=False)


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def check_accounting(trials: Sequence[Trial]) -> list[str]:
    """Problems with the budget bookkeeping of ``trials`` (empty when sound)."""
    problems = []
    running = 0.0
    for t in trials:
        running += t.delta
        if t.delta > 1.0 + TOL or t.delta < -TOL:
            problems.append(f"trial {t.index}: delta {t.delta} outside [0, 1]")
        if abs(running - t.cumulative) > TOL:
            problems.append(
                f"trial {t.index}: cumulative {t.cumulative} != running sum {running}"
            )
    return problems


def hv_trace(
    trials: Iterable[Trial] | RunLog,
    reference_point,
    z_max: int | None = None,
    budget: int | None = None,
) -> list[tuple[int, float]]:
    """Hypervolume after each whole equivalent evaluation ``k = 1..floor(total)``.

    Only successful trials at the maximum fidelity count; a trial belongs to
    step ``k`` once its cumulative budget is at most ``k``.  Steps without a new
    full-fidelity result carry the previous value forward.
    """
    if isinstance(trials, RunLog):
        z_max = z_max if z_max is not None else trials.header.get("z_max")
        trials = trials.trials
    trials = list(trials)
    ref = np.asarray(reference_point, dtype=float)
    total = trials[-1].cumulative if trials else 0.0
    n_steps = int(math.floor(total + TOL)) if budget is None else budget
    if z_max is None:
        z_max = max((t.fidelity for t in trials), default=0)
    full = [(t.cumulative, t.objectives) for t in trials if t.ok and t.fidelity == z_max]
    out = []
    points: list = []
    j = 0
    hv = 0.0
    for k in range(1, n_steps + 1):
        added = False
        while j < len(full) and full[j][0] <= k + TOL:
            points.append(full[j][1])
            j += 1
            added = True
        if added:
            hv = hypervolume(np.array(points), ref)
        out.append((k, hv))
    return out


def best_value_trace(trials: Iterable[Trial], z_max: int, n_steps: int | None = None):
    """Best full-fidelity value of a single-objective run after each whole evaluation."""
    trials = list(trials)
    total = trials[-1].cumulative if trials else 0.0
    n_steps = int(math.floor(total + TOL)) if n_steps is None else n_steps
    out = []
    best = math.inf
    j = 0
    full = [(t.cumulative, t.objectives[0]) for t in trials if t.ok and t.fidelity == z_max]
    for k in range(1, n_steps + 1):
        while j < len(full) and full[j][0] <= k + TOL:
            best = min(best, full[j][1])
            j += 1
        out.append((k, best))
    return out
