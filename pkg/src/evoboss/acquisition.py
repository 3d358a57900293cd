"""Expected-improvement acquisition over a discrete candidate set.

Already screened candidates are masked to zero EI before selection, so a
screened variant can only be chosen again if every candidate has zero EI,
in which case the lowest-index unscreened candidate is taken instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import erf

from .embeddings import EmbeddingStore
from .gp import FittedGP


class SpaceExhausted(RuntimeError):
    """Raised when every candidate has already been screened."""


def _norm_cdf(z):
    return 0.5 * (1.0 + erf(np.asarray(z) / math.sqrt(2.0)))


def _norm_pdf(z):
    return np.exp(-0.5 * np.square(np.asarray(z))) / math.sqrt(2.0 * math.pi)


def expected_improvement(mu: float, var: float, f_best: float) -> float:
    """Closed-form EI of a Gaussian posterior over the incumbent f_best."""
    if var < 0:
        raise ValueError(f"variance must be non-negative, got {var}")
    s = math.sqrt(var)
    if s == 0.0:
        return max(mu - f_best, 0.0)
    z = (mu - f_best) / s
    return float((mu - f_best) * _norm_cdf(z) + s * _norm_pdf(z))


def expected_improvement_vector(
    mu: np.ndarray, var: np.ndarray, f_best: float
) -> np.ndarray:
    mu = np.asarray(mu, float)
    s = np.sqrt(np.clip(np.asarray(var, float), 0.0, None))
    improve = mu - f_best
    ei = np.maximum(improve, 0.0)  # s == 0 case
    pos = s > 0.0
    if np.any(pos):
        z = improve[pos] / s[pos]
        ei[pos] = improve[pos] * _norm_cdf(z) + s[pos] * _norm_pdf(z)
    return np.clip(ei, 0.0, None)


@dataclass
class AcquisitionResult:
    values: np.ndarray  # EI per candidate (aligned with the candidates sequence)
    chosen: int  # store index of the selected candidate


def _masked_ei(
    gp: FittedGP,
    store: EmbeddingStore,
    candidates: Sequence[int],
    screened: set[int],
    f_best: float,
) -> np.ndarray:
    cand = np.asarray(candidates, dtype=int)
    if cand.size == 0:
        raise ValueError("candidates must be non-empty")
    mu, var = gp.posterior_many(store.matrix[cand])
    values = expected_improvement_vector(mu, var, f_best)
    for i, c in enumerate(cand):
        if int(c) in screened:
            values[i] = 0.0
    return values


def select_next(
    gp: FittedGP,
    store: EmbeddingStore,
    candidates: Sequence[int],
    screened: set[int],
    f_best: float,
) -> AcquisitionResult:
    """Argmax of masked EI; ties and the all-zero fallback go to lowest index."""
    cand = list(candidates)
    unscreened = [c for c in cand if c not in screened]
    if not unscreened:
        raise SpaceExhausted("every candidate has been screened")
    values = _masked_ei(gp, store, cand, screened, f_best)
    best = values.max()
    if best <= 0.0:
        return AcquisitionResult(values, min(unscreened))
    chosen = min(c for c, v in zip(cand, values) if v == best)
    return AcquisitionResult(values, chosen)


def select_batch(
    gp: FittedGP,
    store: EmbeddingStore,
    candidates: Sequence[int],
    screened: set[int],
    f_best: float,
    q: int,
) -> list[int]:
    """Top-q unscreened candidates by EI, ties by lowest index, EI-descending."""
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    cand = list(candidates)
    unscreened = [c for c in cand if c not in screened]
    if len(unscreened) < q:
        raise SpaceExhausted(
            f"requested batch of {q} but only {len(unscreened)} unscreened candidates"
        )
    values = _masked_ei(gp, store, cand, screened, f_best)
    ranked = sorted(
        ((c, v) for c, v in zip(cand, values) if c not in screened),
        key=lambda cv: (-cv[1], cv[0]),
    )
    return [c for c, _ in ranked[:q]]
