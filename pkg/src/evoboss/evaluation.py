"""Robustness sweeps over starting variants and summary statistics.

Implements the evaluation protocol: run a method repeatedly from many
starting variants, then reduce the traces to quartile curves of best-so-far
fitness, distribution snapshots at fixed screen counts, and NDCG of the
model's fitness ranking.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from .baselines import run_random, run_recombination, run_smw
from .boes import RunConfig, run_boes
from .embeddings import EmbeddingStore
from .landscape import Landscape, Variant, variant_word
from .trace import RunTrace

Method = Literal["boes", "smw", "recombination", "random", "external_trace_dir"]


@dataclass(frozen=True)
class SweepSpec:
    method: Method
    runs: int
    budget: int
    start_sampling: Literal["all_variants", "uniform"] = "uniform"
    seed: int = 0
    # method knobs; boes fields are taken from run_config when provided
    run_config: RunConfig | None = None
    top_k: int = 3
    trace_dir: str | None = None  # for method="external_trace_dir"

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


def _sample_starts(spec: SweepSpec, landscape: Landscape,
                   store: EmbeddingStore | None) -> list[str]:
    if store is not None:
        words = store.words()
    else:
        words = [variant_word(i, landscape.n) for i in range(landscape.space_size)]
    if spec.start_sampling == "all_variants":
        return words
    rng = np.random.default_rng(spec.seed)
    picks = rng.choice(len(words), size=min(spec.runs, len(words)), replace=False)
    return [words[int(i)] for i in picks]


def _run_one(spec: SweepSpec, landscape: Landscape, store: EmbeddingStore | None,
             start: str, run_seed: int) -> RunTrace:
    if spec.method == "boes":
        if store is None:
            raise ValueError("boes sweep requires an embedding store")
        base = spec.run_config or RunConfig(budget=spec.budget, start=start)
        config = replace(base, budget=spec.budget, start=start, seed=run_seed)
        return run_boes(config, landscape, store)
    if spec.method == "smw":
        return run_smw(landscape, Variant.from_residues(start), spec.budget,
                       seed=run_seed)
    if spec.method == "recombination":
        return run_recombination(landscape, Variant.from_residues(start),
                                 spec.budget, top_k=spec.top_k, seed=run_seed)
    if spec.method == "random":
        return run_random(landscape, spec.budget, seed=run_seed)
    raise ValueError(f"unknown method {spec.method!r}")


def sweep(spec: SweepSpec, landscape: Landscape,
          store: EmbeddingStore | None = None,
          jobs: int = 1) -> list[RunTrace]:
    """One trace per starting variant; deterministic given spec.seed.

    The result is identical for any jobs count: run seeds and starts are
    assigned up front and runs are fully independent.
    """
    if spec.method == "external_trace_dir":
        if not spec.trace_dir:
            raise ValueError("external_trace_dir method needs trace_dir")
        paths = sorted(Path(spec.trace_dir).glob("*.jsonl"))
        if not paths:
            raise ValueError(f"no .jsonl traces in {spec.trace_dir}")
        return [RunTrace.load(p) for p in paths]

    starts = _sample_starts(spec, landscape, store)[: spec.runs]
    tasks = [(start, spec.seed + i) for i, start in enumerate(starts)]
    if jobs <= 1:
        return [_run_one(spec, landscape, store, s, rs) for s, rs in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_one, spec, landscape, store, s, rs)
                   for s, rs in tasks]
        return [f.result() for f in futures]


def quartile_curves(
    traces: Sequence[RunTrace], grid: Iterable[int]
) -> list[tuple[int, float, float, float]]:
    """(count, q1, median, q3) of best-so-far fitness at each screen count."""
    traces = list(traces)
    if not traces:
        raise ValueError("no traces given")
    rows = []
    for count in grid:
        vals = np.array([t.best_at(count) for t in traces])
        q1, med, q3 = np.quantile(vals, [0.25, 0.5, 0.75], method="linear")
        rows.append((count, float(q1), float(med), float(q3)))
    return rows


def snapshots(
    traces: Sequence[RunTrace], at: Iterable[int] = (50, 100, 150, 190)
) -> dict[int, np.ndarray]:
    """Sorted best-so-far samples per screen count, for external violin plots.

    Traces shorter than a count contribute their final best (right-constant
    extension), keeping budget-exhausted runs comparable.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("no traces given")
    return {
        count: np.sort(np.array([t.best_at(count) for t in traces]))
        for count in at
    }


def ndcg(predicted: Sequence[float], truth: Sequence[float],
         gain: Literal["identity", "exp"] = "identity") -> float:
    """Normalized discounted cumulative gain of ranking `truth` by `predicted`.

    Discount is log2(i+1) for 1-based rank i; gain is the raw fitness by
    default ("exp" selects 2^rel - 1). Ties in predicted are broken by index.
    Returns 1.0 by convention when truth is all zeros.
    """
    pred = np.asarray(predicted, float)
    rel = np.asarray(truth, float)
    if pred.shape != rel.shape or pred.ndim != 1:
        raise ValueError("predicted and truth must be equal-length vectors")
    if np.any(rel < 0):
        raise ValueError("truth values must be non-negative")
    if gain == "exp":
        rel = np.exp2(rel) - 1.0
    discounts = 1.0 / np.log2(np.arange(2, rel.size + 2))
    order = np.argsort(-pred, kind="stable")  # stable: ties keep index order
    dcg = float(rel[order] @ discounts)
    ideal = float(np.sort(rel)[::-1] @ discounts)
    if ideal == 0.0:
        return 1.0
    return dcg / ideal


def curves_to_csv(rows: Sequence[tuple[int, float, float, float]]) -> str:
    lines = ["count,q1,median,q3"]
    lines += [f"{c},{q1!r},{med!r},{q3!r}" for c, q1, med, q3 in rows]
    return "\n".join(lines) + "\n"


def snapshots_to_csv(snaps: dict[int, np.ndarray]) -> str:
    lines = ["count,value"]
    for count in sorted(snaps):
        lines += [f"{count},{float(v)!r}" for v in snaps[count]]
    return "\n".join(lines) + "\n"
