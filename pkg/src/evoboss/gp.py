"""Gaussian-process surrogate over embedding vectors.

Single scale hyperparameter theta applied inside the distance,
d(e, e') = theta * ||e - e'||, with a Matern 3/2 kernel
k = exp(-sqrt(3) d)(1 + sqrt(3) d) (or squared exponential for the
ablation). Zero prior mean, zero observation noise stabilized by jitter,
half-normal prior on theta, multi-start derivative-free MAP/MLE fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.spatial.distance import cdist
from scipy.special import ndtri

KernelFamily = Literal["matern32", "se"]

SQRT3 = math.sqrt(3.0)

JITTER_CAP = 1e-2


class GPNumericsError(RuntimeError):
    """Raised when the kernel matrix stays indefinite after jitter escalation."""


@dataclass(frozen=True)
class KernelSpec:
    family: KernelFamily = "matern32"
    theta: float = 1.0

    def __post_init__(self) -> None:
        if self.theta < 0:
            raise ValueError(f"theta must be non-negative, got {self.theta}")
        if self.family not in ("matern32", "se"):
            raise ValueError(f"unknown kernel family {self.family!r}")


def distance(e: np.ndarray, e2: np.ndarray, theta: float) -> float:
    """Scaled Euclidean distance theta * ||e - e'||."""
    e, e2 = np.asarray(e, float), np.asarray(e2, float)
    if e.shape != e2.shape:
        raise ValueError(f"dimension mismatch: {e.shape} vs {e2.shape}")
    if theta < 0:
        raise ValueError("theta must be non-negative")
    return float(theta * np.linalg.norm(e - e2))


def _kernel_of_distance(d: np.ndarray | float, family: KernelFamily):
    if family == "matern32":
        return np.exp(-SQRT3 * np.asarray(d)) * (1.0 + SQRT3 * np.asarray(d))
    return np.exp(-0.5 * np.square(np.asarray(d)))


def kernel(e: np.ndarray, e2: np.ndarray, spec: KernelSpec) -> float:
    """Covariance between two embeddings; 1 at zero distance."""
    return float(_kernel_of_distance(distance(e, e2, spec.theta), spec.family))


def kernel_matrix(E1: np.ndarray, E2: np.ndarray, spec: KernelSpec) -> np.ndarray:
    D = spec.theta * cdist(np.atleast_2d(E1), np.atleast_2d(E2))
    return _kernel_of_distance(D, spec.family)


@dataclass(frozen=True)
class LengthScalePrior:
    """Normal(0, sigma) truncated to [0, inf) and renormalized (half-normal)."""

    sigma: float

    @classmethod
    def for_dim(cls, m: int) -> "LengthScalePrior":
        # sigma such that 3*sigma spans the diagonal of an m-cube of side ~1
        return cls(math.sqrt(m) / 3.0)

    def log_density(self, theta: float) -> float:
        if theta < 0:
            return -math.inf
        # half-normal: 2/(sigma*sqrt(2*pi)) * exp(-theta^2 / (2*sigma^2))
        return (
            math.log(2.0)
            - math.log(self.sigma)
            - 0.5 * math.log(2.0 * math.pi)
            - 0.5 * (theta / self.sigma) ** 2
        )

    def quantile(self, q: float) -> float:
        if not 0.0 <= q < 1.0:
            raise ValueError(f"quantile level must be in [0, 1), got {q}")
        return self.sigma * float(ndtri(0.5 * (1.0 + q)))


def default_jitter(K_diag_max: float = 1.0) -> float:
    return 1e-8 * (1.0 + K_diag_max)


def _chol_with_escalation(K: np.ndarray, jitter: float) -> tuple[np.ndarray, float]:
    """Cholesky of K + jitter*I, escalating jitter x10 up to the cap."""
    t = K.shape[0]
    j = jitter
    while True:
        try:
            L = cholesky(K + j * np.eye(t), lower=True, check_finite=False)
            return L, j
        except np.linalg.LinAlgError:
            pass
        if j >= JITTER_CAP:
            raise GPNumericsError(
                f"kernel matrix not positive definite even at jitter {j:g}"
            )
        j *= 10.0


def log_marginal_likelihood(
    embeddings: np.ndarray,
    y: np.ndarray,
    spec: KernelSpec,
    jitter: float | None = None,
) -> float:
    """Gaussian log marginal likelihood of y under the zero-mean GP prior."""
    E = np.atleast_2d(np.asarray(embeddings, float))
    y = np.asarray(y, float).ravel()
    if E.shape[0] != y.size:
        raise ValueError("embeddings and y disagree in length")
    K = kernel_matrix(E, E, spec)
    j = default_jitter(float(np.max(np.diag(K)))) if jitter is None else jitter
    L = cholesky(K + j * np.eye(K.shape[0]), lower=True, check_finite=False)
    return _lml_from_chol(L, y)


def _lml_from_chol(L: np.ndarray, y: np.ndarray) -> float:
    z = solve_triangular(L, y, lower=True, check_finite=False)
    t = y.size
    return float(
        -0.5 * z @ z - np.sum(np.log(np.diag(L))) - 0.5 * t * math.log(2 * math.pi)
    )


@dataclass
class FittedGP:
    """Fitted surrogate: observations, kernel, cached Cholesky factor."""

    embeddings: np.ndarray
    y: np.ndarray
    spec: KernelSpec
    jitter: float
    chol: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    objective_value: float = math.nan

    @property
    def theta(self) -> float:
        return self.spec.theta

    def posterior(self, e: np.ndarray) -> tuple[float, float]:
        mu, var = self.posterior_many(np.atleast_2d(np.asarray(e, float)))
        return float(mu[0]), float(var[0])

    def posterior_many(self, E_star: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance at each row of E_star."""
        E_star = np.atleast_2d(np.asarray(E_star, float))
        if E_star.shape[1] != self.embeddings.shape[1]:
            raise ValueError(
                f"dimension mismatch: model has m={self.embeddings.shape[1]}, "
                f"query has m={E_star.shape[1]}"
            )
        k_star = kernel_matrix(self.embeddings, E_star, self.spec)  # (t, N)
        mu = k_star.T @ self.alpha
        v = solve_triangular(self.chol, k_star, lower=True, check_finite=False)
        var = 1.0 - np.sum(v * v, axis=0)  # prior variance k(e,e) = 1
        return mu, np.clip(var, 0.0, None)


def make_fitted(
    embeddings: np.ndarray,
    y: np.ndarray,
    spec: KernelSpec,
    jitter: float | None = None,
) -> FittedGP:
    """Build a FittedGP at a fixed kernel spec (no hyperparameter search)."""
    E = np.atleast_2d(np.asarray(embeddings, float))
    y = np.asarray(y, float).ravel()
    K = kernel_matrix(E, E, spec)
    base = default_jitter(float(np.max(np.diag(K)))) if jitter is None else jitter
    L, j = _chol_with_escalation(K, base)
    alpha = cho_solve((L, True), y, check_finite=False)
    return FittedGP(E, y, spec, j, L, alpha, _lml_from_chol(L, y))


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_section_max(f, a: float, b: float, xtol: float) -> tuple[float, float]:
    """Golden-section maximization on [a, b] to absolute resolution xtol."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > xtol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def _local_maximize(f, x0: float, lo: float, hi: float,
                    xtol: float) -> tuple[float, float]:
    """Derivative-free local maximization of f from x0, bounded to [lo, hi].

    Expands an uphill bracket from the start point, then refines it by
    golden-section search down to resolution xtol. Returns the best
    (argmax, value) seen over all evaluations.
    """
    x0 = min(max(x0, lo), hi)
    step = max(xtol, (hi - lo) * 1e-3)
    evaluated: list[tuple[float, float]] = []

    def fe(x: float) -> float:
        v = f(x)
        evaluated.append((x, v))
        return v

    f0 = fe(x0)
    xr, fr = min(x0 + step, hi), None
    xl, fl = max(x0 - step, lo), None
    fr = fe(xr) if xr > x0 else f0
    fl = fe(xl) if xl < x0 else f0
    if fr <= f0 >= fl:
        a, b = xl, xr  # x0 already a local cap at this resolution
    else:
        direction = 1.0 if fr >= fl else -1.0
        x_prev, x_cur = x0, (xr if direction > 0 else xl)
        f_cur = fr if direction > 0 else fl
        while True:
            step *= 2.0
            x_next = min(max(x_cur + direction * step, lo), hi)
            if x_next == x_cur:  # pinned at a bound
                a, b = min(x_prev, x_cur), max(x_prev, x_cur)
                break
            f_next = fe(x_next)
            if f_next < f_cur:
                a, b = min(x_prev, x_next), max(x_prev, x_next)
                break
            x_prev, x_cur, f_cur = x_cur, x_next, f_next

    x_best, f_best = _golden_section_max(fe, a, b, xtol)
    for x, v in evaluated:
        if v > f_best or (v == f_best and x < x_best):
            x_best, f_best = x, v
    return x_best, f_best


def fit(
    embeddings: np.ndarray,
    y: np.ndarray,
    prior: LengthScalePrior | None = None,
    family: KernelFamily = "matern32",
    starts: int = 20,
    rho_end: float = 1e-4,
    jitter: float | None = None,
    objective: Literal["map", "mle"] = "map",
    extra_starts: Sequence[float] = (),
) -> FittedGP:
    """Fit theta by multi-start derivative-free maximization.

    Start points are the quantiles {1..starts}/(starts+1) of the prior
    (deterministic), plus any extra_starts (e.g. a warm start from the
    previous iteration). Each start runs a bounded trust-region style local
    search down to resolution rho_end; the best objective wins, ties broken
    toward smaller theta.
    """
    E = np.atleast_2d(np.asarray(embeddings, float))
    y = np.asarray(y, float).ravel()
    if E.shape[0] != y.size:
        raise ValueError("embeddings and y disagree in length")
    if prior is None:
        prior = LengthScalePrior.for_dim(E.shape[1])

    D0 = cdist(E, E)  # theta-independent pairwise distances, computed once
    t = E.shape[0]
    eye = np.eye(t)
    base_jitter = default_jitter(1.0) if jitter is None else jitter

    cache: dict[float, float] = {}

    def objective_at(theta: float) -> float:
        if theta < 0:
            return -math.inf
        hit = cache.get(theta)
        if hit is not None:
            return hit
        K = _kernel_of_distance(theta * D0, family)
        j = base_jitter
        value = -math.inf
        while True:
            try:
                L = cholesky(K + j * eye, lower=True, check_finite=False)
                value = _lml_from_chol(L, y)
                break
            except np.linalg.LinAlgError:
                if j >= JITTER_CAP:
                    break
                j *= 10.0
        if math.isfinite(value) and objective == "map":
            value += prior.log_density(theta)
        cache[theta] = value
        return value

    upper = max(10.0 * prior.sigma, *[2.0 * s for s in extra_starts], 1.0)
    start_points = [prior.quantile(i / (starts + 1)) for i in range(1, starts + 1)]
    start_points += [float(s) for s in extra_starts]

    best_theta: float | None = None
    best_value = -math.inf
    for x0 in start_points:
        theta_hat, value = _local_maximize(objective_at, x0, 0.0, upper, rho_end)
        if value > best_value or (value == best_value and
                                  (best_theta is None or theta_hat < best_theta)):
            best_value = value
            best_theta = theta_hat

    if best_theta is None or not math.isfinite(best_value):
        raise GPNumericsError("all fit starts failed Cholesky factorization")

    spec = KernelSpec(family, best_theta)
    fitted = make_fitted(E, y, spec, jitter=base_jitter)
    fitted.objective_value = best_value
    return fitted
