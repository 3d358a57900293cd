"""Per-variant embedding extraction.

Each variant word names the residues at a fixed set of mutated positions of
a full-length wild-type sequence. The word is substituted into the wild
type, the full sequence is run through the model, and the final-layer
per-residue representations are pooled into one m-vector per variant.
"""

from pathlib import Path

import numpy as np

from .store import write_store

ALPHABET = "ACDEFGHIKLMNPQRSTVWY"

POOLS = ("mean", "mutated_positions", "cls")


def read_fasta(path) -> str:
    """First sequence of a FASTA file, uppercased."""
    lines = Path(path).read_text().splitlines()
    seq = []
    seen_header = False
    for line in lines:
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if seen_header and seq:
                break
            seen_header = True
            continue
        seq.append(line)
    sequence = "".join(seq).upper()
    if not sequence:
        raise ValueError(f"no sequence found in {path}")
    return sequence


def read_variants_csv(path) -> list[str]:
    """Variant words from a CSV whose first column is `variant`.

    Accepts both a bare variant list and the optimizer's landscape CSV
    (`variant,fitness`); extra columns are ignored.
    """
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path} is empty")
    header = [c.strip() for c in lines[0].split(",")]
    if header[0] != "variant":
        raise ValueError(f"first column must be 'variant', got {header[0]!r}")
    words = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        word = line.split(",")[0].strip()
        if not word:
            raise ValueError(f"{path}:{i}: empty variant")
        words.append(word)
    if not words:
        raise ValueError(f"{path} has no variant rows")
    return words


def substitute(wild_type: str, positions: list[int], word: str) -> str:
    """Place the word's residues at the given 0-based positions."""
    seq = list(wild_type)
    for ch, pos in zip(word, positions):
        seq[pos] = ch
    return "".join(seq)


def _validate(wild_type: str, positions: list[int], words: list[str]) -> None:
    n = len(positions)
    if n == 0:
        raise ValueError("at least one position is required")
    if len(set(positions)) != n:
        raise ValueError("positions must be distinct")
    for pos in positions:
        if not 0 <= pos < len(wild_type):
            raise ValueError(
                f"position {pos} out of range for sequence of length "
                f"{len(wild_type)}"
            )
    for word in words:
        if len(word) != n:
            raise ValueError(
                f"variant {word!r} has {len(word)} residues, expected {n}"
            )
        for ch in word:
            if ch not in ALPHABET:
                raise ValueError(f"variant {word!r}: illegal residue {ch!r}")


def _pool(reps: np.ndarray, pool: str, positions: list[int]) -> np.ndarray:
    """Reduce (B, L+1, m) token representations to (B, m)."""
    if pool == "mean":
        return reps[:, 1:, :].mean(axis=1)
    if pool == "mutated_positions":
        rows = [p + 1 for p in positions]  # shift past the CLS slot
        return reps[:, rows, :].mean(axis=1)
    if pool == "cls":
        return reps[:, 0, :]
    raise ValueError(f"unknown pool {pool!r}, expected one of {POOLS}")


def embed_variants(
    model,
    wild_type: str,
    positions: list[int],
    words: list[str],
    pool: str = "mean",
    batch_size: int = 8,
) -> np.ndarray:
    """Embedding matrix (len(words), model.dim), row order matching words."""
    _validate(wild_type, positions, words)
    if pool not in POOLS:
        raise ValueError(f"unknown pool {pool!r}, expected one of {POOLS}")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if len(wild_type) > model.max_length:
        raise ValueError(
            f"sequence length {len(wild_type)} exceeds the model's limit "
            f"of {model.max_length}"
        )
    matrix = np.empty((len(words), model.dim))
    for lo in range(0, len(words), batch_size):
        batch = words[lo : lo + batch_size]
        seqs = [substitute(wild_type, positions, w) for w in batch]
        reps = model.encode(seqs)
        matrix[lo : lo + len(batch)] = _pool(reps, pool, positions)
    return matrix


def extract(
    model,
    wild_type: str,
    positions: list[int],
    words: list[str],
    out_index,
    out_matrix,
    pool: str = "mean",
    batch_size: int = 8,
) -> None:
    """Embed every variant and write the store file pair."""
    matrix = embed_variants(
        model, wild_type, positions, words, pool=pool, batch_size=batch_size
    )
    write_store(words, matrix, out_index, out_matrix)
