"""Synthetic multi-fidelity test problems and a tabular benchmark loader.

The bi-sphere family has two squared-distance objectives in normalized space,

    f_i(u, z) = ||u - c_i||^2 + bias * (1 - z / z_max) * g_i(u),

with ``g_i(u) = 0.5 * prod_k sin(pi * (2 u_k + phase_i))`` and phases ``0.25`` and
``0.75``.  At ``z = z_max`` the bias vanishes, so the Pareto set is the segment
between the two centres.  The single-objective ``sphere`` uses the first term
only.

Tabular benchmarks (format ``table/1``) are CSV files preceded by two comment
lines::

    #table/1
    #header {"name": ..., "space": {...}, "objectives": [...], "senses": [...],
             "reference_point": [...], "best_known_hv": ...}
    <param names...>,<fidelity name>,<objective names...>
    0.001,0.5,1,0.42,12.0
    ...

Objective values and the reference point are stored in their natural sense;
objectives with sense ``max`` are negated when loaded.  Queries use the nearest
row (in normalized space) at the requested fidelity.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError, ParseError
from .pareto import hypervolume, pareto_set
from .search_space import Configuration, FidelitySpec, ParamSpec, SearchSpace

logger = logging.getLogger(__name__)

TABLE_FORMAT = "table/1"
DEFAULT_BIAS = 0.5
PHASES = (0.25, 0.75)


class Benchmark:
    """A multi-fidelity problem in minimization convention."""

    name: str
    space: SearchSpace
    objective_names: tuple[str, ...]
    senses: tuple[str, ...]
    reference_point: np.ndarray
    best_known_hv: float | None = None

    @property
    def n_objectives(self) -> int:
        return len(self.objective_names)

    @property
    def z_min(self) -> int:
        return self.space.fidelity.z_min

    @property
    def z_max(self) -> int:
        return self.space.fidelity.z_max

    def _check_z(self, z):
        if not self.z_min <= z <= self.z_max:
            raise DomainError(f"fidelity {z} outside [{self.z_min}, {self.z_max}]")

    def evaluate_unit(self, U, z) -> np.ndarray:
        """Objective vectors for a batch of normalized configurations."""
        raise NotImplementedError

    def evaluate(self, config: Configuration, z) -> np.ndarray:
        return self.evaluate_unit(np.asarray(config.normalized)[None, :], z)[0]

    def describe(self) -> dict:
        return {
            "name": self.name,
            "n_d": self.space.n_d,
            "objectives": list(self.objective_names),
            "senses": list(self.senses),
            "reference_point": [float(r) for r in self.reference_point],
            "best_known_hv": self.best_known_hv,
            "fidelity": [self.z_min, self.z_max],
        }


def _bias_term(U, phase):
    return 0.5 * np.prod(np.sin(np.pi * (2.0 * U + phase)), axis=1)


@dataclass(frozen=True)
class SyntheticSpec:
    centers: tuple[tuple[float, ...], ...]
    bias: float = DEFAULT_BIAS
    offsets: tuple[float, ...] = ()

    def __post_init__(self):
        c = [tuple(float(v) for v in ci) for ci in self.centers]
        if len({len(ci) for ci in c}) != 1:
            raise DomainError("all centres need the same dimension")
        if len(set(c)) != len(c):
            raise DomainError("centres must be distinct")
        if self.bias < 0:
            raise DomainError("bias amplitude must be non-negative")
        object.__setattr__(self, "centers", tuple(c))
        offsets = tuple(self.offsets) or (0.0,) * len(c)
        if len(offsets) != len(c):
            raise DomainError("one offset per objective")
        object.__setattr__(self, "offsets", offsets)


class SphereFamily(Benchmark):
    """Squared distances to fixed centres, one objective per centre."""

    def __init__(
        self,
        name: str,
        space: SearchSpace,
        spec: SyntheticSpec,
        best_known_hv: float | None = None,
    ):
        if len(spec.centers[0]) != space.n_d:
            raise DomainError("centre dimension does not match the search space")
        self.name = name
        self.space = space
        self.spec = spec
        n = len(spec.centers)
        self.objective_names = tuple(f"f{i + 1}" for i in range(n))
        self.senses = ("min",) * n
        self.centers = np.array(spec.centers)
        far = np.maximum(self.centers, 1.0 - self.centers)
        self.reference_point = np.sum(far**2, axis=1) + np.array(spec.offsets)
        self.best_known_hv = best_known_hv

    def evaluate_unit(self, U, z) -> np.ndarray:
        self._check_z(z)
        U = np.atleast_2d(np.asarray(U, dtype=float))
        scale = self.spec.bias * (1.0 - z / self.z_max)
        out = np.empty((len(U), len(self.centers)))
        for i, c in enumerate(self.centers):
            out[:, i] = np.sum((U - c) ** 2, axis=1) + self.spec.offsets[i]
            if scale:
                out[:, i] += scale * _bias_term(U, PHASES[i % len(PHASES)])
        return out

    def optimum_unit(self, objective_index: int) -> np.ndarray:
        return self.centers[objective_index].copy()


def bi_sphere_evaluate(spec: SyntheticSpec, space: SearchSpace, config, z) -> np.ndarray:
    return SphereFamily("bi-sphere", space, spec).evaluate(config, z)


# -- default suite -------------------------------------------------------------

_PARAMS_4D = (
    ParamSpec("learning_rate", "continuous", 1e-4, 1e-1, log_scaled=True),
    ParamSpec("momentum", "continuous", 0.1, 0.99),
    ParamSpec("weight_decay", "continuous", 1e-5, 1e-1, log_scaled=True),
    ParamSpec("max_dropout", "continuous", 0.0, 1.0),
)
_EPOCHS = FidelitySpec("epoch", 1, 27)

_CENTERS = {
    2: ((0.2, 0.2), (0.8, 0.8)),
    4: ((0.2, 0.3, 0.7, 0.25), (0.75, 0.8, 0.3, 0.65)),
}

# dense-grid values from grid_best_hv (1000^2 and 32^4 points); see tests
BEST_KNOWN_HV = {
    "bisphere-d2": 1.5518552852803595,
    "bisphere-d4": 4.485322228731129,
}


def _space(n_d: int) -> SearchSpace:
    return SearchSpace(_PARAMS_4D[:n_d], _EPOCHS)


def make_bisphere(n_d: int, bias: float, name: str | None = None) -> SphereFamily:
    name = name or f"bisphere-d{n_d}-b{str(bias).replace('.', '')}"
    return SphereFamily(
        name,
        _space(n_d),
        SyntheticSpec(_CENTERS[n_d], bias=bias),
        best_known_hv=BEST_KNOWN_HV.get(f"bisphere-d{n_d}"),
    )


def make_sphere(n_d: int, bias: float = DEFAULT_BIAS, name: str | None = None) -> SphereFamily:
    center = _CENTERS[n_d][0]
    bench = SphereFamily(
        name or f"sphere-d{n_d}", _space(n_d), SyntheticSpec((center,), bias=bias)
    )
    # 1-D hypervolume of the optimum (f = 0) against the reference
    bench.best_known_hv = float(bench.reference_point[0])
    return bench


BENCHMARKS: dict[str, Callable[[], Benchmark]] = {
    "bisphere-d2-b0": lambda: make_bisphere(2, 0.0, "bisphere-d2-b0"),
    "bisphere-d2-b05": lambda: make_bisphere(2, 0.5, "bisphere-d2-b05"),
    "bisphere-d4-b0": lambda: make_bisphere(4, 0.0, "bisphere-d4-b0"),
    "bisphere-d4-b05": lambda: make_bisphere(4, 0.5, "bisphere-d4-b05"),
    "sphere-d2": lambda: make_sphere(2),
    "sphere-d4": lambda: make_sphere(4),
}

DEFAULT_SUITE = ("bisphere-d2-b0", "bisphere-d2-b05", "bisphere-d4-b0", "bisphere-d4-b05")


def get_benchmark(name_or_path: str) -> Benchmark:
    """Look up a built-in benchmark or load a ``table/1`` file."""
    if name_or_path in BENCHMARKS:
        return _builtin(name_or_path)
    path = Path(name_or_path)
    if path.exists():
        return tabular_load(path)
    raise DomainError(
        f"unknown benchmark {name_or_path!r}; built-ins: {', '.join(sorted(BENCHMARKS))}"
    )


@lru_cache(maxsize=None)
def _builtin(name: str) -> Benchmark:
    return BENCHMARKS[name]()


def grid_best_hv(bench: Benchmark, points_per_dim: int) -> float:
    """Hypervolume of the Pareto set of a full grid evaluated at ``z_max``."""
    axes = [np.linspace(0.0, 1.0, points_per_dim)] * bench.space.n_d
    U = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, bench.space.n_d)
    Y = bench.evaluate_unit(U, bench.z_max)
    return hypervolume(pareto_set(Y), bench.reference_point)


# -- tabular benchmarks --------------------------------------------------------


@dataclass
class TabularBenchmark(Benchmark):
    name: str
    space: SearchSpace
    objective_names: tuple[str, ...]
    senses: tuple[str, ...]
    reference_point: np.ndarray
    tables: dict[int, tuple[np.ndarray, np.ndarray]] = field(repr=False)
    best_known_hv: float | None = None

    def __post_init__(self):
        self._trees = {z: cKDTree(U) for z, (U, _) in self.tables.items()}
        self._levels = sorted(self.tables)

    def _level_for(self, z) -> int:
        if z in self.tables:
            return z
        lower = [lvl for lvl in self._levels if lvl <= z]
        chosen = lower[-1] if lower else self._levels[0]
        logger.info("%s: fidelity %s not tabulated, using %s", self.name, z, chosen)
        return chosen

    def evaluate_unit(self, U, z) -> np.ndarray:
        self._check_z(z)
        level = self._level_for(z)
        U = np.atleast_2d(np.asarray(U, dtype=float))
        _, idx = self._trees[level].query(U)
        return self.tables[level][1][idx].copy()


def _sign(senses: Sequence[str]) -> np.ndarray:
    return np.array([-1.0 if s == "max" else 1.0 for s in senses])


def tabular_dumps(bench: Benchmark, U: np.ndarray, fidelities: Sequence[int]) -> str:
    """Serialize ``bench`` evaluated at normalized points ``U`` and ``fidelities``."""
    sign = _sign(bench.senses)
    header = {
        "name": bench.name,
        "space": bench.space.to_dict(),
        "objectives": list(bench.objective_names),
        "senses": list(bench.senses),
        "reference_point": [float(r) for r in bench.reference_point * sign],
        "best_known_hv": bench.best_known_hv,
    }
    out = io.StringIO()
    out.write(f"#{TABLE_FORMAT}\n#header {json.dumps(header, sort_keys=True)}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(bench.space.names + [bench.space.fidelity.name] + list(bench.objective_names))
    configs = [bench.space.denormalize(u) for u in U]
    for z in fidelities:
        Y = bench.evaluate_unit(np.array([c.normalized for c in configs]), z) * sign
        for c, y in zip(configs, Y):
            w.writerow([repr(float(c[n])) for n in bench.space.names] + [z] + [repr(float(v)) for v in y])
    return out.getvalue()


def tabular_export(bench: Benchmark, path, points_per_dim: int = 5, fidelities=None) -> None:
    axes = [np.linspace(0.0, 1.0, points_per_dim)] * bench.space.n_d
    U = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, bench.space.n_d)
    if fidelities is None:
        from .moasha import rung_levels

        fidelities = rung_levels(bench.z_min, bench.z_max)
    Path(path).write_text(tabular_dumps(bench, U, fidelities))


def tabular_loads(text: str, source: str = "<table>") -> TabularBenchmark:
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"#{TABLE_FORMAT}":
        raise ParseError(f"{source}: line 1: expected '#{TABLE_FORMAT}'")
    if len(lines) < 3 or not lines[1].startswith("#header "):
        raise ParseError(f"{source}: line 2: expected '#header {{...}}'")
    try:
        header = json.loads(lines[1][len("#header ") :])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line 2: bad header JSON ({exc})") from None
    for key in ("space", "objectives", "reference_point"):
        if key not in header:
            raise ParseError(f"{source}: line 2: header lacks {key!r}")
    space = SearchSpace.from_dict(header["space"])
    objectives = tuple(header["objectives"])
    senses = tuple(header.get("senses") or ("min",) * len(objectives))
    if len(senses) != len(objectives) or any(s not in ("min", "max") for s in senses):
        raise ParseError(f"{source}: line 2: senses must be min/max, one per objective")
    ref = np.asarray(header["reference_point"], dtype=float)
    if ref.shape != (len(objectives),):
        raise ParseError(f"{source}: line 2: reference point needs {len(objectives)} values")

    reader = csv.reader(lines[2:])
    columns = next(reader)
    expected = space.names + [space.fidelity.name] + list(objectives)
    for col in expected:
        if col not in columns:
            raise ParseError(f"{source}: line 3: missing column {col!r}")
    pos = [columns.index(c) for c in expected]
    n_d = space.n_d
    rows: dict[int, tuple[list, list]] = {}
    for lineno, row in enumerate(reader, start=4):
        if not row:
            continue
        if len(row) != len(columns):
            raise ParseError(f"{source}: line {lineno}: expected {len(columns)} columns, got {len(row)}")
        values = []
        for col, p in zip(expected, pos):
            try:
                values.append(float(row[p]))
            except ValueError:
                raise ParseError(
                    f"{source}: line {lineno}, column {col!r}: not a number: {row[p]!r}"
                ) from None
        raw = dict(zip(space.names, values[:n_d]))
        try:
            u = space.normalize(raw)
        except DomainError as exc:
            raise ParseError(f"{source}: line {lineno}: {exc}") from None
        z = values[n_d]
        if not float(z).is_integer():
            raise ParseError(f"{source}: line {lineno}, column {space.fidelity.name!r}: fidelity must be integral")
        bucket = rows.setdefault(int(z), ([], []))
        bucket[0].append(u)
        bucket[1].append(values[n_d + 1 :])
    if not rows:
        raise ParseError(f"{source}: no data rows")
    sign = _sign(senses)
    tables = {z: (np.array(u), np.array(y) * sign) for z, (u, y) in rows.items()}
    return TabularBenchmark(
        name=str(header.get("name", Path(source).stem)),
        space=space,
        objective_names=objectives,
        senses=senses,
        reference_point=ref * sign,
        best_known_hv=header.get("best_known_hv"),
        tables=tables,
    )


def tabular_load(path) -> TabularBenchmark:
    path = Path(path)
    return tabular_loads(path.read_text(), source=str(path))
