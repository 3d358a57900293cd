"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 input data error, 3 runtime error
(model load/inference failure).
"""

import argparse
import sys

from .extract import POOLS, extract, read_fasta, read_variants_csv
from .models import ModelLoadError, load_model


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="embex",
        description="Embed protein variants with a language model and write "
        "the optimizer's store file pair.",
    )
    p.add_argument("command", choices=["extract"])
    p.add_argument("--wild-type-fasta", required=True,
                   help="FASTA file with the full-length wild-type sequence")
    p.add_argument("--positions", required=True,
                   help="comma-separated 1-based residue positions of the "
                        "mutated sites, e.g. 39,40,41,54")
    p.add_argument("--variants-csv", required=True,
                   help="CSV whose first column 'variant' lists the words")
    p.add_argument("--model", default="esm1b",
                   help="model id: esm1b, stub, or stub:<dim>[:<seed>]")
    p.add_argument("--pool", choices=POOLS, default="mean")
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--out-index", required=True)
    p.add_argument("--out-matrix", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        positions = [int(x) - 1 for x in args.positions.split(",")]
    except ValueError:
        print(f"embex: bad --positions {args.positions!r}", file=sys.stderr)
        return 1
    if args.batch_size < 1:
        print("embex: --batch-size must be >= 1", file=sys.stderr)
        return 1

    try:
        wild_type = read_fasta(args.wild_type_fasta)
        words = read_variants_csv(args.variants_csv)
    except FileNotFoundError as exc:
        print(f"embex: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"embex: {exc}", file=sys.stderr)
        return 2

    try:
        model = load_model(args.model)
    except ModelLoadError as exc:
        print(f"embex: {exc}", file=sys.stderr)
        return 3

    try:
        extract(
            model, wild_type, positions, words,
            out_index=args.out_index, out_matrix=args.out_matrix,
            pool=args.pool, batch_size=args.batch_size,
        )
    except ValueError as exc:
        print(f"embex: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"embex: {exc}", file=sys.stderr)
        return 3
    print(
        f"wrote {len(words)}x{model.dim} store to "
        f"{args.out_index} / {args.out_matrix}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
