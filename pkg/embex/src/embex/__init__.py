"""Protein variant embedding extractor.

Substitutes each variant word into a full-length wild-type sequence, runs a
pretrained protein language model, pools the final-layer per-residue
representations, and writes the embedding store file pair consumed by the
evoboss optimizer.
"""

from .extract import (
    ALPHABET,
    POOLS,
    embed_variants,
    extract,
    read_fasta,
    read_variants_csv,
    substitute,
)
from .models import Esm1bModel, ModelLoadError, StubModel, load_model
from .store import MAGIC, write_store

__version__ = "0.1.0"

__all__ = [
    "ALPHABET",
    "POOLS",
    "MAGIC",
    "Esm1bModel",
    "ModelLoadError",
    "StubModel",
    "embed_variants",
    "extract",
    "load_model",
    "read_fasta",
    "read_variants_csv",
    "substitute",
    "write_store",
]
