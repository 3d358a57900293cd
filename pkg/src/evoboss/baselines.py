"""Classical directed-evolution baselines: single-mutation walk,
recombination, and uniform random search."""

from __future__ import annotations

import itertools

import numpy as np

from .landscape import (
    BudgetExhausted,
    Landscape,
    ScreeningSession,
    Variant,
    single_mutants,
    variant_word,
)
from .trace import RunTrace


def run_smw(landscape: Landscape, start: Variant, budget: int,
            seed: int = 0) -> RunTrace:
    """Greedy single-mutation walk.

    Visits the n positions in a seed-shuffled order; at each position screens
    all 19 substitutions of the current champion (skipping duplicates), then
    promotes the best-so-far variant to champion. Sweeps repeat with fresh
    position shuffles until the budget is spent.
    """
    header = {"method": "smw", "budget": budget, "start": start.residues,
              "seed": seed}
    session = ScreeningSession(landscape, budget, config=header, seed=seed)
    rng = np.random.default_rng(seed)
    n = landscape.n

    best_word = start.residues
    best_fit = session.screen(start)

    def champion() -> Variant:
        return Variant.from_residues(best_word)

    try:
        while True:
            progressed = False
            for pos in rng.permutation(n):
                for mut in single_mutants(champion(), int(pos)):
                    if session.is_screened(mut):
                        continue
                    y = session.screen(mut)
                    progressed = True
                    if y > best_fit:
                        best_fit, best_word = y, mut.residues
            if not progressed:
                break  # neighborhood of the champion fully screened
    except BudgetExhausted:
        pass
    return session.trace


def run_recombination(landscape: Landscape, start: Variant, budget: int,
                      top_k: int = 3, seed: int = 0) -> RunTrace:
    """Recombination of the best single-position substitutions.

    Screens the start and all 19n single mutants, keeps the top_k residues
    per position by observed single-mutant fitness (the start residue scored
    by the start's own fitness), then screens the top_k^n recombinants in
    descending order of their summed per-position scores.
    """
    n = landscape.n
    stage_one = 1 + 19 * n
    if budget < stage_one:
        raise ValueError(
            f"budget {budget} below the single-mutant stage ({stage_one} screens)"
        )
    header = {"method": "recombination", "budget": budget,
              "start": start.residues, "top_k": top_k, "seed": seed}
    session = ScreeningSession(landscape, budget, config=header, seed=seed)

    start_fit = session.screen(start)
    scores: list[dict[str, float]] = [
        {start.residues[p]: start_fit} for p in range(n)
    ]
    for pos in range(n):
        for mut in single_mutants(start, pos):
            scores[pos][mut.residues[pos]] = session.screen(mut)

    top: list[list[str]] = []
    for pos in range(n):
        ranked = sorted(scores[pos], key=lambda a: (-scores[pos][a], a))
        top.append(ranked[:top_k])

    recombinants = [
        "".join(combo) for combo in itertools.product(*top)
    ]
    recombinants.sort(
        key=lambda w: (-sum(scores[p][w[p]] for p in range(n)), w)
    )
    try:
        for word in recombinants:
            if session.is_screened(word):
                continue
            session.screen(word)
    except BudgetExhausted:
        pass
    return session.trace


def run_random(landscape: Landscape, budget: int, seed: int = 0) -> RunTrace:
    """Uniform random search without replacement over the whole space."""
    space = landscape.space_size
    if budget > space:
        raise ValueError(f"budget {budget} exceeds space size {space}")
    header = {"method": "random", "budget": budget, "seed": seed}
    session = ScreeningSession(landscape, budget, config=header, seed=seed)
    rng = np.random.default_rng(seed)
    if space <= 10**7:
        picks = rng.choice(space, size=budget, replace=False)
    else:
        seen: set[int] = set()
        picks = []
        while len(picks) < budget:
            i = int(rng.integers(space))
            if i not in seen:
                seen.add(i)
                picks.append(i)
    for idx in picks:
        session.screen(variant_word(int(idx), landscape.n))
    return session.trace
