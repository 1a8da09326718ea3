"""Gaussian-process surrogate and the epsilon-greedy, prior-weighted acquisition.

The GP uses a Matern-5/2 ARD kernel on unit-cube inputs and standardized
targets.  Kernel hyperparameters maximize the log marginal likelihood from a
fixed set of multi-start points, so a fit is a pure function of its data.

:func:`acquire` implements one BO proposal step: with probability ``epsilon``
it maximizes plain expected improvement, otherwise EI multiplied by the density
of one uniformly chosen prior raised to a decaying exponent (see
:func:`gamma`).  Scores are handled in log space; the argmax is unchanged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import linalg, optimize
from scipy.special import erfcx, ndtr

from .errors import DomainError, NumericError

logger = logging.getLogger(__name__)

SQRT5 = np.sqrt(5.0)
LOG_2PI = np.log(2 * np.pi)
LENGTHSCALE_BOUNDS = (1e-3, 1e3)
SIGNAL_BOUNDS = (1e-2, 1e2)
NOISE_BOUNDS = (1e-8, 1.0)
MAX_JITTER = 1e-4
N_RESTARTS = 8
FIT_SEED = 0
VAR_FLOOR = 1e-12

DEFAULT_EPSILON = 0.25
DEFAULT_CANDIDATES = 512
LOCAL_SIGMA = 0.05
REFINE_STEPS = 20


def _matern52(r):
    return (1.0 + SQRT5 * r + 5.0 / 3.0 * r**2) * np.exp(-SQRT5 * r)


def _cholesky(K: np.ndarray) -> np.ndarray:
    """Cholesky factor with jitter escalation up to ``MAX_JITTER``."""
    jitter = 0.0
    eye = np.eye(len(K))
    while True:
        try:
            return linalg.cholesky(K + jitter * eye, lower=True)
        except linalg.LinAlgError:
            jitter = 1e-10 if jitter == 0.0 else jitter * 10
            if jitter > MAX_JITTER:
                raise NumericError("kernel matrix not positive definite after max jitter")


@dataclass(frozen=True)
class GPModel:
    X: np.ndarray
    y_mean: float
    y_std: float
    lengthscales: np.ndarray
    signal_var: float
    noise_var: float
    L: np.ndarray
    alpha: np.ndarray

    @classmethod
    def build(cls, X, y, lengthscales, signal_var, noise_var) -> "GPModel":
        """GP with fixed hyperparameters (targets are standardized internally)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        y_mean, y_std = _standardization(y)
        ys = (y - y_mean) / y_std
        ls = np.broadcast_to(np.asarray(lengthscales, dtype=float), (X.shape[1],)).copy()
        K = signal_var * _matern52(_scaled_dist(X, X, ls)) + noise_var * np.eye(len(X))
        L = _cholesky(K)
        alpha = linalg.cho_solve((L, True), ys)
        return cls(X, y_mean, y_std, ls, float(signal_var), float(noise_var), L, alpha)

    def predict(self, U) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and latent variance on the original target scale."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        Ks = self.signal_var * _matern52(_scaled_dist(U, self.X, self.lengthscales))
        mean = Ks @ self.alpha
        v = linalg.solve_triangular(self.L, Ks.T, lower=True)
        var = self.signal_var - np.sum(v**2, axis=0)
        var = np.maximum(var, VAR_FLOOR)
        return mean * self.y_std + self.y_mean, var * self.y_std**2


def _standardization(y: np.ndarray) -> tuple[float, float]:
    mu = float(np.mean(y))
    sd = float(np.std(y))
    return mu, (sd if sd > 0 else 1.0)


def _scaled_dist(A, B, ls):
    d = (A[:, None, :] - B[None, :, :]) / ls
    return np.sqrt(np.sum(d**2, axis=-1))


def _neg_log_marginal_likelihood(theta, diffs2, ys):
    """NLL and its gradient in ``theta = [log ls..., log signal, log noise]``."""
    d = diffs2.shape[0]
    ls2 = np.exp(2 * theta[:d])
    sf2 = np.exp(theta[d])
    sn2 = np.exp(theta[d + 1])
    m = len(ys)
    scaled = diffs2 / ls2[:, None, None]
    r = np.sqrt(np.maximum(scaled.sum(axis=0), 0.0))
    e = np.exp(-SQRT5 * r)
    Kf = sf2 * (1.0 + SQRT5 * r + 5.0 / 3.0 * r**2) * e
    K = Kf + sn2 * np.eye(m)
    try:
        L = linalg.cholesky(K, lower=True)
    except linalg.LinAlgError:
        return 1e10, np.zeros_like(theta)
    alpha = linalg.cho_solve((L, True), ys)
    nll = 0.5 * ys @ alpha + np.sum(np.log(np.diag(L))) + 0.5 * m * LOG_2PI
    Kinv = linalg.cho_solve((L, True), np.eye(m))
    W = np.outer(alpha, alpha) - Kinv
    grad = np.empty_like(theta)
    base = sf2 * 5.0 / 3.0 * (1.0 + SQRT5 * r) * e
    for k in range(d):
        dK = base * scaled[k]
        grad[k] = -0.5 * np.sum(W * dK)
    grad[d] = -0.5 * np.sum(W * Kf)
    grad[d + 1] = -0.5 * sn2 * np.trace(W)
    return nll, grad


def fit_gp(X, y) -> GPModel:
    """Fit a GP to ``(X, y)``; deterministic for a given dataset."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if len(X) < 2 or len(X) != len(y):
        raise DomainError("a GP needs at least two (input, target) pairs")
    m, d = X.shape
    y_mean, y_std = _standardization(y)
    ys = (y - y_mean) / y_std
    diffs2 = np.transpose((X[:, None, :] - X[None, :, :]) ** 2, (2, 0, 1))
    bounds = (
        [tuple(np.log(LENGTHSCALE_BOUNDS))] * d
        + [tuple(np.log(SIGNAL_BOUNDS))]
        + [tuple(np.log(NOISE_BOUNDS))]
    )
    rng = np.random.default_rng(FIT_SEED)
    starts = np.column_stack(
        [
            rng.uniform(np.log(0.05), np.log(5.0), size=(N_RESTARTS, d)),
            np.zeros(N_RESTARTS),
            np.full(N_RESTARTS, np.log(1e-4)),
        ]
    )
    best = None
    for theta0 in starts:
        res = optimize.minimize(
            _neg_log_marginal_likelihood,
            theta0,
            args=(diffs2, ys),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": 200},
        )
        if best is None or res.fun < best.fun:
            best = res
    theta = best.x
    return GPModel.build(X, y, np.exp(theta[:d]), np.exp(theta[d]), np.exp(theta[d + 1]))


def posterior(model: GPModel, u) -> tuple[float, float]:
    mean, var = model.predict(np.atleast_2d(u))
    return float(mean[0]), float(var[0])


# -- expected improvement ------------------------------------------------------


def _log_h(z: np.ndarray) -> np.ndarray:
    """``log(phi(z) + z * Phi(z))`` without underflow for very negative ``z``."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    hi = z > -1.0
    big = z > 40.0  # phi(z) is negligible and Phi(z) == 1
    mid = hi & ~big
    zh = z[mid]
    out[mid] = np.log(np.exp(-0.5 * zh**2) / np.sqrt(2 * np.pi) + zh * ndtr(zh))
    out[big] = np.log(z[big])
    t = -z[~hi]
    log_phi = -0.5 * t**2 - 0.5 * LOG_2PI
    mills = np.sqrt(np.pi / 2) * erfcx(t / np.sqrt(2))  # Phi(-t) / phi(t)
    tail = np.where(t < 1e6, np.log1p(-np.minimum(t * mills, 1 - 1e-300)), -2 * np.log(t))
    out[~hi] = log_phi + tail
    return out


def expected_improvement(mean, std, incumbent):
    """Closed-form EI for minimization; exact at ``std == 0``."""
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    gain = incumbent - mean
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        z = gain / std
        val = std * np.exp(_log_h(np.where(std > 0, np.minimum(z, 1e300), 0.0)))
    val = np.where(np.asarray(z) > 40.0, gain, val)
    return np.where(std > 0, val, np.maximum(gain, 0.0))


def log_ei(model: GPModel, U, incumbent: float) -> np.ndarray:
    mean, var = model.predict(U)
    std = np.sqrt(var)
    return np.log(std) + _log_h((incumbent - mean) / std)


def ei(model: GPModel, u, incumbent: float) -> float:
    mean, var = posterior(model, u)
    return float(expected_improvement(mean, np.sqrt(var), incumbent))


# -- prior decay ---------------------------------------------------------------


def gamma(n_bo: int, n_d: int) -> float:
    """Prior exponent ``exp(-n_bo**2 / n_d)``."""
    return float(np.exp(-(n_bo**2) / n_d))


def gamma_pibo(n_bo: int, n_d: int) -> float:
    """Slower prior exponent ``exp(-n_bo / n_d)`` used by the piBO+RW baseline."""
    return float(np.exp(-n_bo / n_d))


def gamma_pibo_original(n_bo: int, n_d: int, beta: float = 10.0) -> float:
    raise NotImplementedError("the beta/n prior decay is not implemented; use gamma_pibo")


DECAYS: dict[str, Callable[[int, int], float]] = {
    "primo": gamma,
    "pibo": gamma_pibo,
    "pibo-original": gamma_pibo_original,
}


# -- acquisition ---------------------------------------------------------------


@dataclass
class AcquisitionContext:
    X: np.ndarray  # unit-cube inputs
    y: np.ndarray  # raw scalarized targets
    n_bo: int = 0
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=float).ravel()
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError("epsilon must lie in [0, 1]")
        if self.n_bo < 0:
            raise DomainError("n_bo must be non-negative")

    @property
    def incumbent(self) -> float:
        return float(self.y.min())

    @property
    def incumbent_x(self) -> np.ndarray:
        return self.X[int(np.argmin(self.y))]


class Proposal(NamedTuple):
    x: np.ndarray
    prior_index: int | None  # None when the plain-EI branch was taken
    exponent: float


def acquisition_scores(model, U, incumbent, prior=None, exponent=1.0) -> np.ndarray:
    """Log of ``EI(u) * prior(u)**exponent`` (or of plain EI when ``prior`` is None)."""
    score = log_ei(model, U, incumbent)
    if prior is not None and exponent != 0.0:
        score = score + exponent * prior.logpdf(U)
    return score


def _candidates(rng, n_d, budget, prior, incumbent_x):
    n_uniform = budget // 2
    n_prior = budget // 4
    n_local = budget - n_uniform - n_prior
    parts = [rng.random((n_uniform, n_d))]
    if prior is not None:
        parts.append(prior.sample_unit(rng, size=n_prior))
    else:
        parts.append(rng.random((n_prior, n_d)))
    local = incumbent_x + rng.normal(0.0, LOCAL_SIGMA, size=(n_local, n_d))
    parts.append(np.clip(local, 0.0, 1.0))
    return np.vstack(parts)


def maximize(score_fn, candidates: np.ndarray, steps: int = REFINE_STEPS) -> np.ndarray:
    """Best candidate, then coordinate hill-climbing with a shrinking step."""
    scores = score_fn(candidates)
    i = int(np.argmax(scores))
    x, fx = candidates[i].copy(), scores[i]
    n_d = len(x)
    step = 0.1
    for _ in range(steps):
        moves = np.repeat(x[None, :], 2 * n_d, axis=0)
        idx = np.arange(n_d)
        moves[idx, idx] += step
        moves[n_d + idx, idx] -= step
        moves = np.clip(moves, 0.0, 1.0)
        s = score_fn(moves)
        j = int(np.argmax(s))
        if s[j] > fx:
            x, fx = moves[j], s[j]
        else:
            step *= 0.5
    return x


def acquire(
    context: AcquisitionContext,
    model: GPModel,
    prior_set,
    rng: np.random.Generator,
    candidate_budget: int = DEFAULT_CANDIDATES,
    decay: Callable[[int, int], float] = gamma,
) -> Proposal:
    """One epsilon-greedy, prior-weighted EI maximization step."""
    n_d = context.X.shape[1]
    exponent = decay(context.n_bo, n_d)
    prior = None
    prior_index = None
    if rng.random() >= context.epsilon:
        if prior_set is not None and len(prior_set) > 0:
            prior_index = int(rng.integers(len(prior_set)))
            prior = prior_set[prior_index]
        else:
            logger.info("no priors available; using plain EI")
    incumbent = context.incumbent
    cands = _candidates(rng, n_d, candidate_budget, prior, context.incumbent_x)
    x = maximize(lambda U: acquisition_scores(model, U, incumbent, prior, exponent), cands)
    return Proposal(x, prior_index, exponent if prior is not None else 0.0)
