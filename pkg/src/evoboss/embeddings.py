"""Per-variant embedding vectors: persistence, synthetic and one-hot stores, PCA.

The binary matrix format is magic `EMBSTOR1`, uint32-LE count N, uint32-LE
dim m, then N*m float32-LE values row-major. The companion index file is
plain text with one variant word per line, line i <-> row i.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .landscape import ALPHABET_INDEX, Variant

MAGIC = b"EMBSTOR1"


class StoreFormatError(ValueError):
    """Raised on malformed embedding store files."""


@dataclass
class EmbeddingStore:
    """Immutable N x m embedding matrix with a variant -> row lookup."""

    matrix: np.ndarray  # (N, m) float64
    variant_index: dict[str, int]

    def __post_init__(self) -> None:
        if self.matrix.ndim != 2:
            raise StoreFormatError("matrix must be 2-D")
        if not np.all(np.isfinite(self.matrix)):
            raise StoreFormatError("matrix contains non-finite entries")
        if len(self.variant_index) != self.matrix.shape[0]:
            raise StoreFormatError(
                f"index covers {len(self.variant_index)} variants, "
                f"matrix has {self.matrix.shape[0]} rows"
            )

    @property
    def count(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def row(self, v: Variant | str) -> np.ndarray:
        word = v if isinstance(v, str) else v.residues
        try:
            return self.matrix[self.variant_index[word]]
        except KeyError:
            raise KeyError(f"variant {word!r} not in embedding store") from None

    def words(self) -> list[str]:
        ordered = sorted(self.variant_index, key=self.variant_index.get)
        return ordered


def load_store(index_path: str | Path, matrix_path: str | Path) -> EmbeddingStore:
    """Read an embedding store from its index + binary matrix files."""
    words = Path(index_path).read_text().splitlines()
    words = [w.strip() for w in words if w.strip()]
    variant_index: dict[str, int] = {}
    for i, w in enumerate(words):
        if w in variant_index:
            raise StoreFormatError(f"duplicate variant {w!r} in index file")
        variant_index[w] = i

    data = Path(matrix_path).read_bytes()
    if len(data) < 16 or data[:8] != MAGIC:
        raise StoreFormatError(f"{matrix_path}: bad magic, not an embedding store")
    n, m = struct.unpack("<II", data[8:16])
    if n != len(words):
        raise StoreFormatError(
            f"index has {len(words)} variants but matrix header says {n}"
        )
    expected = 16 + 4 * n * m
    if len(data) != expected:
        raise StoreFormatError(
            f"{matrix_path}: expected {expected} bytes for {n}x{m}, got {len(data)}"
        )
    matrix = np.frombuffer(data, dtype="<f4", offset=16).reshape(n, m)
    return EmbeddingStore(matrix.astype(np.float64), variant_index)


def write_store(store: EmbeddingStore, index_path: str | Path,
                matrix_path: str | Path) -> None:
    """Write the store in the binary + index format read by load_store."""
    words = store.words()
    Path(index_path).write_text("\n".join(words) + "\n")
    header = MAGIC + struct.pack("<II", store.count, store.dim)
    body = np.ascontiguousarray(store.matrix, dtype="<f4").tobytes()
    Path(matrix_path).write_bytes(header + body)


def _residue_basis(n: int, dim: int, seed: int) -> np.ndarray:
    # one unit-variance Gaussian vector per (position, residue), counter-keyed
    basis = np.empty((n, 20, dim))
    for p in range(n):
        for a in range(20):
            rng = np.random.default_rng([seed, p, a])
            basis[p, a] = rng.standard_normal(dim)
    return basis


def synth_store(variants: Sequence[Variant], dim: int, seed: int) -> EmbeddingStore:
    """Deterministic synthetic embeddings with Hamming-monotone distances.

    The embedding of a variant is the mean-normalized sum of per-(position,
    residue) latent Gaussian vectors, so expected Euclidean distance grows
    with Hamming distance.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    if not variants:
        raise ValueError("variants must be non-empty")
    n = len(variants[0].residues)
    basis = _residue_basis(n, dim, seed)
    matrix = np.zeros((len(variants), dim))
    for i, v in enumerate(variants):
        for p, ch in enumerate(v.residues):
            matrix[i] += basis[p, ALPHABET_INDEX[ch]]
    matrix /= np.sqrt(n)
    return EmbeddingStore(matrix, {v.residues: i for i, v in enumerate(variants)})


def onehot_store(variants: Sequence[Variant]) -> EmbeddingStore:
    """One-hot encoding at the mutated positions: m = 20n, n ones per row."""
    if not variants:
        raise ValueError("variants must be non-empty")
    n = len(variants[0].residues)
    matrix = np.zeros((len(variants), 20 * n))
    for i, v in enumerate(variants):
        for p, ch in enumerate(v.residues):
            matrix[i, 20 * p + ALPHABET_INDEX[ch]] = 1.0
    return EmbeddingStore(matrix, {v.residues: i for i, v in enumerate(variants)})


def pca(store: EmbeddingStore | np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-k principal components of the embedding rows.

    Returns (projection N x k, explained_variance_ratio length k), components
    ordered by descending eigenvalue of the sample covariance. The sign of
    each component is fixed so its largest-magnitude loading is positive.
    Degenerate input (zero covariance) yields zero projections and ratios.
    """
    X = store.matrix if isinstance(store, EmbeddingStore) else np.asarray(store, float)
    n_rows, m = X.shape
    if n_rows < 2:
        raise ValueError("PCA needs at least 2 rows")
    if not 1 <= k <= min(n_rows, m):
        raise ValueError(f"k must be in [1, {min(n_rows, m)}], got {k}")

    Xc = X - X.mean(axis=0)
    total_var = float(np.sum(Xc * Xc)) / (n_rows - 1)
    if total_var <= 0.0:
        return np.zeros((n_rows, k)), np.zeros(k)

    if m <= n_rows:
        cov = (Xc.T @ Xc) / (n_rows - 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1][:k]
        components = eigvecs[:, order]  # (m, k)
        variances = np.clip(eigvals[order], 0.0, None)
    else:
        # Gram trick: eigenvectors of the N x N Gram matrix map back to
        # feature space without forming the m x m covariance.
        gram = (Xc @ Xc.T) / (n_rows - 1)
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1][:k]
        variances = np.clip(eigvals[order], 0.0, None)
        components = np.zeros((m, k))
        for j, idx in enumerate(order):
            vec = Xc.T @ eigvecs[:, idx]
            norm = np.linalg.norm(vec)
            if norm > 0:
                components[:, j] = vec / norm

    for j in range(k):
        lead = np.argmax(np.abs(components[:, j]))
        if components[lead, j] < 0:
            components[:, j] = -components[:, j]

    projection = Xc @ components
    ratios = variances / total_var
    return projection, ratios
