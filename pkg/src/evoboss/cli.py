"""Command-line entry point.

Subcommands: validate-data, synth-embed, onehot-embed, run, sweep, report,
ndcg, pca. Exit codes: 0 success, 1 usage error, 2 data/format error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import baselines, evaluation
from .boes import RunConfig, run_boes
from .embeddings import (
    EmbeddingStore,
    StoreFormatError,
    load_store,
    onehot_store,
    pca,
    synth_store,
    write_store,
)
from .landscape import (
    LandscapeFormatError,
    Variant,
    enumerate_variants,
    load_landscape,
)
from .trace import RunTrace

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

# expected (fitness_max, wild-type fitness) for the published datasets
KNOWN_DATASETS = {
    "gb1": (8.76, 1.0),
    "phoq": (133.59, 3.29),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; usage errors are 1 here
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _store_paths(prefix: str) -> tuple[Path, Path]:
    return Path(prefix + ".index"), Path(prefix + ".matrix")


def _load_store_prefix(prefix: str) -> EmbeddingStore:
    index_path, matrix_path = _store_paths(prefix)
    return load_store(index_path, matrix_path)


def _default_jobs() -> int:
    env = os.environ.get("EVOBOSS_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _build_parser() -> _Parser:
    parser = _Parser(prog="evoboss", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-data", help="check a landscape CSV + metadata")
    p.add_argument("csv")
    p.add_argument("meta")
    p.add_argument("--n", type=int, default=4)

    p = sub.add_parser("synth-embed", help="write a synthetic embedding store")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="path prefix (.index/.matrix)")

    p = sub.add_parser("onehot-embed", help="write a one-hot embedding store")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True, help="path prefix (.index/.matrix)")

    p = sub.add_parser("run", help="one directed-evolution run")
    p.add_argument("--method", required=True,
                   choices=["boes", "smw", "recombination", "random"])
    p.add_argument("--landscape", required=True)
    p.add_argument("--meta")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--store", help="embedding store prefix (boes only)")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", default="wild_type",
                   help="'wild_type' or an explicit variant word")
    p.add_argument("--batch", type=int, default=1)
    p.add_argument("--init", default="start_only",
                   help="'start_only' or 'random:<k>'")
    p.add_argument("--kernel", choices=["matern32", "se"], default="matern32")
    p.add_argument("--fit-objective", choices=["map", "mle"], default="map")
    p.add_argument("--no-warm-start", action="store_true")
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("sweep", help="repeated runs from many starting variants")
    p.add_argument("--method", required=True,
                   choices=["boes", "smw", "recombination", "random"])
    p.add_argument("--landscape", required=True)
    p.add_argument("--meta")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--store")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--start-sampling", default="uniform",
                   choices=["uniform", "all"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kernel", choices=["matern32", "se"], default="matern32")
    p.add_argument("--fit-objective", choices=["map", "mle"], default="map")
    p.add_argument("--batch", type=int, default=1)
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("report", help="quartile curves + snapshots from traces")
    p.add_argument("--traces-dir", required=True)
    p.add_argument("--grid", default="10,20,50,100,150,190",
                   help="comma-separated screen counts for quartile curves")
    p.add_argument("--snapshots", default="50,100,150,190",
                   help="comma-separated screen counts for distributions")
    p.add_argument("--out", required=True, help="output prefix")

    p = sub.add_parser("ndcg", help="NDCG of predicted vs true fitness")
    p.add_argument("--pred", required=True, help="file, one value per line")
    p.add_argument("--truth", required=True, help="file, one value per line")
    p.add_argument("--gain", choices=["identity", "exp"], default="identity")
    p.add_argument("--out", help="optional CSV output path")

    p = sub.add_parser("pca", help="project an embedding store to k components")
    p.add_argument("--store", required=True, help="store prefix")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", required=True, help="output CSV path")

    return parser


def _cmd_validate_data(args) -> int:
    landscape = load_landscape(args.csv, args.n, meta_path=args.meta)
    wt_fit = landscape.fitness(landscape.wild_type)
    print(f"name={landscape.name} n={landscape.n} "
          f"measured={len(landscape.measured)} "
          f"fitness_max={landscape.fitness_max} wild_type_fitness={wt_fit}")
    expected = KNOWN_DATASETS.get(landscape.name.lower())
    if expected is not None:
        exp_max, exp_wt = expected
        if abs(landscape.fitness_max - exp_max) > 1e-9:
            print(f"error: fitness_max {landscape.fitness_max} != expected "
                  f"{exp_max} for {landscape.name}", file=sys.stderr)
            return EXIT_DATA
        if abs(wt_fit - exp_wt) > 1e-9:
            print(f"error: wild-type fitness {wt_fit} != expected {exp_wt} "
                  f"for {landscape.name}", file=sys.stderr)
            return EXIT_DATA
        print(f"ok: matches published ranges for {landscape.name}")
    return EXIT_OK


def _cmd_synth_embed(args) -> int:
    variants = enumerate_variants(args.n)
    store = synth_store(variants, args.dim, args.seed)
    index_path, matrix_path = _store_paths(args.out)
    write_store(store, index_path, matrix_path)
    print(f"wrote {store.count}x{store.dim} store to {index_path} / {matrix_path}")
    return EXIT_OK


def _cmd_onehot_embed(args) -> int:
    variants = enumerate_variants(args.n)
    store = onehot_store(variants)
    index_path, matrix_path = _store_paths(args.out)
    write_store(store, index_path, matrix_path)
    print(f"wrote {store.count}x{store.dim} store to {index_path} / {matrix_path}")
    return EXIT_OK


def _resolve_start(args, landscape) -> str:
    if args.start == "wild_type":
        return landscape.wild_type.residues
    return args.start


def _parse_init(text: str) -> int:
    if text == "start_only":
        return 0
    if text.startswith("random:"):
        return int(text.split(":", 1)[1])
    raise ValueError(f"bad --init value {text!r}")


def _run_method(args, landscape, store, start: str, seed: int) -> RunTrace:
    if args.method == "boes":
        if store is None:
            raise ValueError("--store is required for method boes")
        config = RunConfig(
            budget=args.budget,
            start=start,
            kernel_family=args.kernel,
            batch=args.batch,
            init_random_k=_parse_init(getattr(args, "init", "start_only")),
            fit_objective=args.fit_objective,
            seed=seed,
            warm_start=not getattr(args, "no_warm_start", False),
        )
        return run_boes(config, landscape, store)
    if args.method == "smw":
        return baselines.run_smw(landscape, Variant.from_residues(start),
                                 args.budget, seed=seed)
    if args.method == "recombination":
        return baselines.run_recombination(
            landscape, Variant.from_residues(start), args.budget,
            top_k=args.top_k, seed=seed)
    return baselines.run_random(landscape, args.budget, seed=seed)


def _cmd_run(args) -> int:
    out = Path(args.out)
    if out.exists() and not args.force:
        print(f"error: {out} exists (use --force to overwrite)", file=sys.stderr)
        return EXIT_RUNTIME
    landscape = load_landscape(args.landscape, args.n, meta_path=args.meta)
    store = _load_store_prefix(args.store) if args.store else None
    start = _resolve_start(args, landscape)
    trace = _run_method(args, landscape, store, start, args.seed)
    trace.save(out)
    print(f"wrote {len(trace)} records to {out}; best={trace.best}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    landscape = load_landscape(args.landscape, args.n, meta_path=args.meta)
    store = _load_store_prefix(args.store) if args.store else None
    run_config = None
    if args.method == "boes":
        run_config = RunConfig(
            budget=args.budget, start="placeholder" if store is None
            else store.words()[0],
            kernel_family=args.kernel, batch=args.batch,
            fit_objective=args.fit_objective, seed=args.seed,
        )
    spec = evaluation.SweepSpec(
        method=args.method,
        runs=args.runs,
        budget=args.budget,
        start_sampling="all_variants" if args.start_sampling == "all" else "uniform",
        seed=args.seed,
        run_config=run_config,
        top_k=args.top_k,
    )
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    traces = evaluation.sweep(spec, landscape, store, jobs=jobs)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    width = len(str(len(traces) - 1))
    for i, trace in enumerate(traces):
        trace.save(out_dir / f"run_{i:0{width}d}.jsonl")
    print(f"wrote {len(traces)} traces to {out_dir}")
    return EXIT_OK


def _parse_counts(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _cmd_report(args) -> int:
    paths = sorted(Path(args.traces_dir).glob("*.jsonl"))
    if not paths:
        print(f"error: no .jsonl traces in {args.traces_dir}", file=sys.stderr)
        return EXIT_DATA
    traces = [RunTrace.load(p) for p in paths]
    curves = evaluation.quartile_curves(traces, _parse_counts(args.grid))
    snaps = evaluation.snapshots(traces, _parse_counts(args.snapshots))
    curves_path = Path(args.out + "_curves.csv")
    snaps_path = Path(args.out + "_snapshots.csv")
    curves_path.write_text(evaluation.curves_to_csv(curves))
    snaps_path.write_text(evaluation.snapshots_to_csv(snaps))
    print(f"wrote {curves_path} and {snaps_path} from {len(traces)} traces")
    return EXIT_OK


def _read_values(path: str) -> np.ndarray:
    vals = [float(line) for line in Path(path).read_text().splitlines()
            if line.strip()]
    return np.array(vals)


def _cmd_ndcg(args) -> int:
    pred = _read_values(args.pred)
    truth = _read_values(args.truth)
    value = evaluation.ndcg(pred, truth, gain=args.gain)
    print(f"ndcg={value!r}")
    if args.out:
        Path(args.out).write_text(f"ndcg,value\nndcg,{value!r}\n")
    return EXIT_OK


def _cmd_pca(args) -> int:
    store = _load_store_prefix(args.store)
    projection, ratios = pca(store, args.k)
    words = store.words()
    lines = ["variant," + ",".join(f"pc{j + 1}" for j in range(args.k))]
    for i, word in enumerate(words):
        lines.append(word + "," + ",".join(repr(float(x)) for x in projection[i]))
    Path(args.out).write_text("\n".join(lines) + "\n")
    print("explained_variance_ratio=" + ",".join(repr(float(r)) for r in ratios))
    return EXIT_OK


_COMMANDS = {
    "validate-data": _cmd_validate_data,
    "synth-embed": _cmd_synth_embed,
    "onehot-embed": _cmd_onehot_embed,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
    "ndcg": _cmd_ndcg,
    "pca": _cmd_pca,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (LandscapeFormatError, StoreFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
