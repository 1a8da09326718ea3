"""Expert priors over the location of each objective's optimum.

A :class:`Prior` is a product of truncated normals on the unit cube, one factor
per search-space dimension.  Priors are built from benchmark evaluations by
:func:`construct_prior` and stored as small JSON documents (``prior/1`` format,
see :func:`prior_to_dict`).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DomainError, ParseError
from .search_space import Configuration, SearchSpace

logger = logging.getLogger(__name__)

DEFAULT_SIGMA = 0.25
GOOD_PERTURBATION = 0.01
N_PRIOR_SAMPLES = 100_000
PRIOR_GLOBAL_SEED = 2025
QUALITIES = ("good", "bad", "custom")
FORMAT = "prior/1"

_LOG_SQRT_2PI = 0.5 * np.log(2 * np.pi)
# below this acceptance rate rejection sampling switches to inverse-CDF draws
_MIN_ACCEPTANCE = 0.25


@dataclass(frozen=True)
class Prior:
    mean: np.ndarray
    sigma: np.ndarray
    objective_index: int = 0
    quality: str = "custom"

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).ravel()
        sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), mean.shape).copy()
        if np.any(mean < 0) or np.any(mean > 1):
            raise DomainError("prior mean must lie in the unit cube")
        if np.any(sigma <= 0):
            raise DomainError("prior sigma must be positive")
        if self.quality not in QUALITIES:
            raise DomainError(f"unknown prior quality {self.quality!r}")
        mean.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_d(self) -> int:
        return len(self.mean)

    def _mass(self):
        a = (0.0 - self.mean) / self.sigma
        b = (1.0 - self.mean) / self.sigma
        return a, b, ndtr(b) - ndtr(a)

    def logpdf(self, u) -> np.ndarray:
        """Log density at one point ``(n_d,)`` or a batch ``(m, n_d)``."""
        u = np.asarray(u, dtype=float)
        single = u.ndim == 1
        u = np.atleast_2d(u)
        if u.shape[1] != self.n_d:
            raise DomainError(f"expected {self.n_d} dims, got {u.shape[1]}")
        if np.any(u < 0) or np.any(u > 1):
            raise DomainError("prior density is only defined on the unit cube")
        a, b, mass = self._mass()
        z = (u - self.mean) / self.sigma
        per_dim = -0.5 * z**2 - _LOG_SQRT_2PI - np.log(self.sigma) - np.log(mass)
        out = per_dim.sum(axis=1)
        return out[0] if single else out

    def pdf(self, u):
        return np.exp(self.logpdf(u))

    def truncated_mean(self) -> np.ndarray:
        a, b, mass = self._mass()
        phi_a = np.exp(-0.5 * a**2 - _LOG_SQRT_2PI)
        phi_b = np.exp(-0.5 * b**2 - _LOG_SQRT_2PI)
        return self.mean + self.sigma * (phi_a - phi_b) / mass

    def sample_unit(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Draw from the truncated normal in normalized space.

        Dimensions with reasonable in-cube mass use rejection from the
        untruncated normal; nearly-flat or far-off priors use the inverse CDF.
        """
        m = 1 if size is None else size
        a, b, mass = self._mass()
        out = np.empty((m, self.n_d))
        for k in range(self.n_d):
            if mass[k] >= _MIN_ACCEPTANCE:
                col = np.empty(0)
                while len(col) < m:
                    draw = rng.normal(self.mean[k], self.sigma[k], size=2 * (m - len(col)) + 4)
                    col = np.concatenate([col, draw[(draw >= 0.0) & (draw <= 1.0)]])
                out[:, k] = col[:m]
            else:
                lo, hi = ndtr(a[k]), ndtr(b[k])
                q = lo + rng.random(m) * (hi - lo)
                out[:, k] = np.clip(self.mean[k] + self.sigma[k] * ndtri(q), 0.0, 1.0)
        return out[0] if size is None else out

    def sample(self, space: SearchSpace, rng: np.random.Generator) -> Configuration:
        return space.denormalize(self.sample_unit(rng))


@dataclass(frozen=True)
class PriorSet:
    priors: tuple[Prior, ...] = field(default_factory=tuple)

    def __post_init__(self):
        priors = tuple(sorted(self.priors, key=lambda p: p.objective_index))
        if [p.objective_index for p in priors] != list(range(len(priors))):
            raise DomainError("a prior set needs exactly one prior per objective 0..n-1")
        object.__setattr__(self, "priors", priors)

    def __len__(self):
        return len(self.priors)

    def __iter__(self):
        return iter(self.priors)

    def __getitem__(self, i) -> Prior:
        return self.priors[i]

    @property
    def label(self) -> str:
        return ":".join(p.quality for p in self.priors) if self.priors else "none"


def pdf(prior: Prior, u) -> float:
    return prior.pdf(u)


def sample(prior: Prior, space: SearchSpace, rng: np.random.Generator) -> Configuration:
    return prior.sample(space, rng)


def construct_prior(
    benchmark,
    objective_index: int,
    quality: str,
    seed: int = PRIOR_GLOBAL_SEED,
    n_samples: int = N_PRIOR_SAMPLES,
    sigma: float = DEFAULT_SIGMA,
) -> Prior:
    """Build a good or bad prior for one objective from uniform samples.

    All ``n_samples`` configurations are drawn with the fixed ``seed`` and
    evaluated at the maximum fidelity.  A good prior is centred on the best
    configuration after a small Gaussian perturbation; a bad prior sits exactly
    on the worst one.  These evaluations are offline and not charged to any
    optimizer budget.
    """
    if quality not in ("good", "bad"):
        raise DomainError("quality must be 'good' or 'bad'")
    if not 0 <= objective_index < benchmark.n_objectives:
        raise DomainError(f"objective index {objective_index} out of range")
    rng = np.random.default_rng(seed)
    space = benchmark.space
    u = space.snap(rng.random((n_samples, space.n_d)))
    y = benchmark.evaluate_unit(u, space.fidelity.z_max)[:, objective_index]
    order = np.argsort(y, kind="stable")
    if quality == "good":
        noise = rng.normal(0.0, GOOD_PERTURBATION, size=space.n_d)
        mean = np.clip(u[order[0]] + noise, 0.0, 1.0)
    else:
        mean = u[order[-1]]
    return Prior(mean=mean, sigma=sigma, objective_index=objective_index, quality=quality)


def construct_prior_set(benchmark, qualities: Sequence[str], seed: int = PRIOR_GLOBAL_SEED):
    if len(qualities) != benchmark.n_objectives:
        raise DomainError("need one quality label per objective")
    return PriorSet(
        tuple(construct_prior(benchmark, i, q, seed=seed) for i, q in enumerate(qualities))
    )


def parse_condition(label: str, n_objectives: int) -> tuple[str, ...] | None:
    """``"good:bad"`` -> ``("good", "bad")``; ``"none"`` -> ``None``."""
    if label == "none":
        return None
    parts = tuple(label.split(":"))
    if len(parts) == 1 and n_objectives > 1:
        parts = parts * n_objectives
    if len(parts) != n_objectives or any(p not in ("good", "bad") for p in parts):
        raise DomainError(f"prior condition {label!r} does not fit {n_objectives} objectives")
    return parts


# -- file format ---------------------------------------------------------------


def prior_to_dict(prior: Prior, space: SearchSpace, benchmark: str | None = None) -> dict:
    raw = space.unit_to_raw_relaxed(prior.mean)
    return {
        "format": FORMAT,
        "benchmark": benchmark,
        "objective_index": prior.objective_index,
        "quality": prior.quality,
        "dimensions": [
            {
                "name": p.name,
                "mean": raw[p.name],
                "unit_mean": float(m),
                "sigma": float(s),
            }
            for p, m, s in zip(space.params, prior.mean, prior.sigma)
        ],
    }


def prior_from_dict(d: dict, space: SearchSpace) -> Prior:
    if d.get("format") != FORMAT:
        raise ParseError(f"not a {FORMAT} document")
    try:
        dims = {e["name"]: e for e in d["dimensions"]}
        missing = [n for n in space.names if n not in dims]
        if missing:
            raise ParseError(f"prior file lacks dimensions {missing}")
        mean = []
        for p in space.params:
            e = dims[p.name]
            if "unit_mean" in e:
                mean.append(float(e["unit_mean"]))
            else:
                mean.append(float(p.to_unit(float(e["mean"]))))
        sigma = [float(dims[n]["sigma"]) for n in space.names]
        return Prior(
            mean=np.clip(mean, 0.0, 1.0),
            sigma=sigma,
            objective_index=int(d["objective_index"]),
            quality=str(d.get("quality", "custom")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed prior file: {exc}") from None


def save_prior(prior: Prior, space: SearchSpace, path, benchmark: str | None = None) -> None:
    text = json.dumps(prior_to_dict(prior, space, benchmark), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n")


def load_prior(path, space: SearchSpace) -> Prior:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return prior_from_dict(d, space)
