"""Hyperparameter domains and the bijection to the unit cube.

Every model in this package (priors, the GP surrogate, the samplers) works on
normalized vectors ``u in [0, 1]^n_d``.  A :class:`SearchSpace` converts between
those vectors and raw :class:`Configuration` values:

* continuous dims are mapped linearly, or linearly in ``log10`` when
  ``log_scaled`` is set;
* integer dims are mapped on the continuous relaxation
  ``[lower - 0.5, upper + 0.5]`` and rounded on the way back.

Search spaces can be stored in a small INI-style text file, see
:func:`load_space` for the grammar.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, ParseError

CONTINUOUS = "continuous"
INTEGER = "integer"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str
    lower: float
    upper: float
    log_scaled: bool = False

    def __post_init__(self):
        if self.kind not in (CONTINUOUS, INTEGER):
            raise DomainError(f"{self.name}: unknown kind {self.kind!r}")
        if not self.lower < self.upper:
            raise DomainError(f"{self.name}: lower must be < upper")
        if self.log_scaled and self.lower <= 0:
            raise DomainError(f"{self.name}: log-scaled bounds must be positive")
        if self.kind == INTEGER and not (
            float(self.lower).is_integer() and float(self.upper).is_integer()
        ):
            raise DomainError(f"{self.name}: integer parameter needs integer bounds")

    def _transform(self, v):
        return np.log10(v) if self.log_scaled else v

    def _relaxed_bounds(self) -> tuple[float, float]:
        lo, hi = float(self.lower), float(self.upper)
        if self.kind == INTEGER:
            lo, hi = lo - 0.5, hi + 0.5
            if self.log_scaled:
                # keep the relaxation inside the positive reals
                lo = max(lo, float(self.lower) / 2.0)
        return float(self._transform(lo)), float(self._transform(hi))

    def to_unit(self, v):
        lo, hi = self._relaxed_bounds()
        return (self._transform(np.asarray(v, dtype=float)) - lo) / (hi - lo)

    def from_unit(self, u, round_integers: bool = True):
        lo, hi = self._relaxed_bounds()
        t = lo + np.asarray(u, dtype=float) * (hi - lo)
        v = np.power(10.0, t) if self.log_scaled else t
        if self.kind == INTEGER and round_integers:
            v = np.clip(np.rint(v), self.lower, self.upper)
        else:
            v = np.clip(v, self._relaxed_raw_lower(), self._relaxed_raw_upper())
        return v

    def _relaxed_raw_lower(self):
        return self.lower if self.kind == CONTINUOUS else -np.inf

    def _relaxed_raw_upper(self):
        return self.upper if self.kind == CONTINUOUS else np.inf

    def contains(self, v: float) -> bool:
        return self.lower <= v <= self.upper


@dataclass(frozen=True)
class FidelitySpec:
    name: str
    z_min: int
    z_max: int

    def __post_init__(self):
        if not (1 <= self.z_min < self.z_max):
            raise DomainError(f"fidelity {self.name}: need 1 <= z_min < z_max")


@dataclass(frozen=True)
class Configuration:
    """A raw configuration together with its normalized image."""

    values: Mapping[str, float]
    normalized: np.ndarray = field(repr=False, compare=False)

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def __eq__(self, other):
        return isinstance(other, Configuration) and dict(self.values) == dict(other.values)

    def __hash__(self):
        return hash(tuple(sorted(self.values.items())))


@dataclass(frozen=True)
class SearchSpace:
    params: tuple[ParamSpec, ...]
    fidelity: FidelitySpec

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise DomainError("parameter names must be unique")
        if not names:
            raise DomainError("search space needs at least one parameter")

    @property
    def n_d(self) -> int:
        return len(self.params)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def normalize(self, config: Configuration | Mapping[str, float]) -> np.ndarray:
        values = config.values if isinstance(config, Configuration) else config
        u = np.empty(self.n_d)
        for i, p in enumerate(self.params):
            try:
                v = float(values[p.name])
            except KeyError:
                raise DomainError(f"missing value for parameter {p.name!r}") from None
            if not p.contains(v):
                raise DomainError(
                    f"value {v!r} for parameter {p.name!r} outside [{p.lower}, {p.upper}]"
                )
            u[i] = p.to_unit(v)
        return u

    def denormalize(self, u) -> Configuration:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n_d,):
            raise DomainError(f"expected a vector of length {self.n_d}, got shape {u.shape}")
        u = np.clip(u, 0.0, 1.0)
        values = {}
        for i, p in enumerate(self.params):
            v = float(p.from_unit(u[i]))
            values[p.name] = int(v) if p.kind == INTEGER else v
        normalized = np.array([p.to_unit(values[p.name]) for p in self.params])
        normalized.setflags(write=False)
        return Configuration(values=values, normalized=normalized)

    def snap(self, u) -> np.ndarray:
        """Project normalized vectors onto the representable set (rounds integer dims)."""
        u = np.atleast_2d(np.asarray(u, dtype=float)).copy()
        for i, p in enumerate(self.params):
            if p.kind == INTEGER:
                u[:, i] = p.to_unit(p.from_unit(np.clip(u[:, i], 0.0, 1.0)))
        return u

    def unit_to_raw_relaxed(self, u) -> dict[str, float]:
        """Raw-scale values for ``u`` without rounding integer dims."""
        return {p.name: float(p.from_unit(x, round_integers=False)) for p, x in zip(self.params, u)}

    def raw_relaxed_to_unit(self, values: Mapping[str, float]) -> np.ndarray:
        return np.array([float(p.to_unit(float(values[p.name]))) for p in self.params])

    def sample_uniform(self, rng: np.random.Generator) -> Configuration:
        return self.denormalize(rng.random(self.n_d))

    def to_dict(self) -> dict:
        return {
            "params": [
                {
                    "name": p.name,
                    "kind": p.kind,
                    "lower": p.lower,
                    "upper": p.upper,
                    "log_scaled": p.log_scaled,
                }
                for p in self.params
            ],
            "fidelity": {
                "name": self.fidelity.name,
                "z_min": self.fidelity.z_min,
                "z_max": self.fidelity.z_max,
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SearchSpace":
        try:
            params = tuple(
                ParamSpec(
                    name=str(p["name"]),
                    kind=str(p["kind"]),
                    lower=_num(p["lower"], p["kind"]),
                    upper=_num(p["upper"], p["kind"]),
                    log_scaled=bool(p.get("log_scaled", False)),
                )
                for p in d["params"]
            )
            f = d["fidelity"]
            fid = FidelitySpec(str(f["name"]), int(f["z_min"]), int(f["z_max"]))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed search space: missing {exc}") from None
        return cls(params, fid)


def _num(v, kind):
    return int(v) if kind == INTEGER and float(v).is_integer() else float(v)


def normalize(space: SearchSpace, config) -> np.ndarray:
    return space.normalize(config)


def denormalize(space: SearchSpace, u) -> Configuration:
    return space.denormalize(u)


def sample_uniform(space: SearchSpace, rng: np.random.Generator) -> Configuration:
    return space.sample_uniform(rng)


# -- text format -------------------------------------------------------------
#
#   [param learning_rate]
#   kind = continuous
#   lower = 1e-4
#   upper = 0.1
#   log = true
#
#   [fidelity epoch]
#   min = 1
#   max = 52
#
# Parameter order is section order.  Exactly one fidelity section.

_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


def loads_space(text: str) -> SearchSpace:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"search space file: {exc}") from None
    params: list[ParamSpec] = []
    fidelities: list[FidelitySpec] = []
    for section in cp.sections():
        head, _, name = section.partition(" ")
        name = name.strip()
        body = cp[section]
        if not name:
            raise ParseError(f"section [{section}] needs a name")
        try:
            if head == "param":
                kind = body.get("kind", CONTINUOUS).strip()
                log = body.get("log", "false").strip().lower()
                if log not in _TRUE | _FALSE:
                    raise ParseError(f"[{section}] log: expected true/false, got {log!r}")
                params.append(
                    ParamSpec(
                        name=name,
                        kind=kind,
                        lower=_num(float(body["lower"]), kind),
                        upper=_num(float(body["upper"]), kind),
                        log_scaled=log in _TRUE,
                    )
                )
            elif head == "fidelity":
                fidelities.append(FidelitySpec(name, int(body["min"]), int(body["max"])))
            else:
                raise ParseError(f"unknown section type [{section}]")
        except KeyError as exc:
            raise ParseError(f"[{section}] missing key {exc}") from None
        except ValueError as exc:
            raise ParseError(f"[{section}] {exc}") from None
    if len(fidelities) != 1:
        raise ParseError(f"expected exactly one [fidelity ...] section, got {len(fidelities)}")
    return SearchSpace(tuple(params), fidelities[0])


def dumps_space(space: SearchSpace) -> str:
    out = io.StringIO()
    for p in space.params:
        out.write(f"[param {p.name}]\n")
        out.write(f"kind = {p.kind}\n")
        out.write(f"lower = {p.lower!r}\n")
        out.write(f"upper = {p.upper!r}\n")
        out.write(f"log = {'true' if p.log_scaled else 'false'}\n\n")
    f = space.fidelity
    out.write(f"[fidelity {f.name}]\nmin = {f.z_min}\nmax = {f.z_max}\n")
    return out.getvalue()


def load_space(path: str | Path) -> SearchSpace:
    """Read a search-space definition file (see module comment for the grammar)."""
    return loads_space(Path(path).read_text())


def dump_space(space: SearchSpace, path: str | Path) -> None:
    Path(path).write_text(dumps_space(space))


def space_from_params(params: Sequence[ParamSpec], z_min: int, z_max: int, name="epoch"):
    return SearchSpace(tuple(params), FidelitySpec(name, z_min, z_max))
