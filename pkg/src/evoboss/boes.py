"""The Bayesian-optimization-in-embedding-space loop and its ablations.

Canonical run: screen the start variant, then repeat {refit the GP on all
observations, pick the unscreened variant with maximal expected improvement,
screen it} until the budget is spent. The one-hot ablation uses the same
loop with a squared-exponential kernel, 20 random initial screens and
batches of 19.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .acquisition import select_batch
from .embeddings import EmbeddingStore
from .gp import KernelFamily, LengthScalePrior, fit
from .landscape import Landscape, ScreeningSession
from .trace import RunTrace


@dataclass(frozen=True)
class RunConfig:
    budget: int
    start: str  # variant word
    kernel_family: KernelFamily = "matern32"
    batch: int = 1
    init_random_k: int = 0  # extra random initial screens besides the start
    fit_objective: str = "map"  # "map" or "mle"
    seed: int = 0
    warm_start: bool = True  # reuse previous theta* as an extra fit start
    starts: int = 20
    rho_end: float = 1e-4
    store_kind: str = "embedding"
    stop_at_fitness: float | None = None  # end the run early once reached

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.fit_objective not in ("map", "mle"):
            raise ValueError(f"unknown fit objective {self.fit_objective!r}")


def run_boes(config: RunConfig, landscape: Landscape,
             store: EmbeddingStore) -> RunTrace:
    """Execute one BOES run and return its complete trace."""
    if config.start not in store.variant_index:
        raise KeyError(f"start variant {config.start!r} missing from store")

    header = {"method": "boes", **asdict(config)}
    session = ScreeningSession(landscape, config.budget, config=header,
                               seed=config.seed)
    words = store.words()
    candidates = list(range(store.count))
    prior = LengthScalePrior.for_dim(store.dim)

    screened_rows: list[int] = []
    observed_y: list[float] = []

    def screen_row(row: int, theta: float | None) -> None:
        y = session.screen(words[row], theta=theta)
        screened_rows.append(row)
        observed_y.append(y)

    screen_row(store.variant_index[config.start], None)

    if config.init_random_k > 0:
        rng = np.random.default_rng(config.seed)
        pool = [r for r in candidates if r not in set(screened_rows)]
        k = min(config.init_random_k, len(pool), config.budget - 1)
        for row in rng.choice(pool, size=k, replace=False):
            if session.exhausted:
                break
            screen_row(int(row), None)

    def target_reached() -> bool:
        return (config.stop_at_fitness is not None
                and max(observed_y) >= config.stop_at_fitness)

    prev_theta: float | None = None
    while not session.exhausted and not target_reached():
        gp = fit(
            store.matrix[screened_rows],
            np.asarray(observed_y),
            prior=prior,
            family=config.kernel_family,
            starts=config.starts,
            rho_end=config.rho_end,
            objective=config.fit_objective,
            extra_starts=(prev_theta,) if (config.warm_start
                                           and prev_theta is not None) else (),
        )
        prev_theta = gp.theta
        f_best = max(observed_y)
        remaining = config.budget - session.screened_count
        unscreened = store.count - len(screened_rows)
        q = min(config.batch, remaining, unscreened)
        if q == 0:
            break
        batch = select_batch(gp, store, candidates, set(screened_rows), f_best, q)
        for row in batch:
            screen_row(row, gp.theta)

    return session.trace
