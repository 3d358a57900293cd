"""Embedding model interface and loaders.

A model is any object with:

- ``dim``: int, embedding dimension m
- ``max_length``: int, longest residue sequence it accepts
- ``encode(sequences: list[str]) -> np.ndarray`` of shape (B, L+1, dim),
  where row 0 is the sequence-level CLS representation and rows 1..L are the
  final-layer per-residue representations. All sequences in one call must
  share the same length L.
"""

import numpy as np


class ModelLoadError(RuntimeError):
    pass


class StubModel:
    """Deterministic stand-in model for tests and offline runs.

    Each (position, residue) token gets a fixed unit-variance Gaussian
    vector keyed by the seed, so identical sequences always embed
    identically regardless of batching.
    """

    def __init__(self, dim: int = 1280, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self.max_length = 100_000
        self._cache: dict[tuple[int, str], np.ndarray] = {}

    def _token(self, pos: int, ch: str) -> np.ndarray:
        key = (pos, ch)
        vec = self._cache.get(key)
        if vec is None:
            # pos is -1 for the CLS slot; seed entries must be non-negative
            rng = np.random.default_rng([self.seed, pos + 1, ord(ch)])
            vec = rng.standard_normal(self.dim)
            self._cache[key] = vec
        return vec

    def encode(self, sequences: list[str]) -> np.ndarray:
        lengths = {len(s) for s in sequences}
        if len(lengths) != 1:
            raise ValueError("sequences in one batch must share a length")
        L = lengths.pop()
        out = np.empty((len(sequences), L + 1, self.dim))
        for b, seq in enumerate(sequences):
            out[b, 0] = self._token(-1, "<")  # CLS slot
            for p, ch in enumerate(seq):
                out[b, p + 1] = self._token(p, ch)
        return out


class Esm1bModel:
    """ESM-1b via fair-esm. Requires torch and downloaded weights."""

    def __init__(self):
        try:
            import esm
            import torch
        except ImportError as exc:
            raise ModelLoadError(
                "fair-esm and torch are required for --model esm1b "
                "(pip install embex[esm])"
            ) from exc
        self._torch = torch
        try:
            model, alphabet = esm.pretrained.esm1b_t33_650M_UR50S()
        except Exception as exc:
            raise ModelLoadError(f"failed to load ESM-1b weights: {exc}") from exc
        model.eval()
        self._model = model
        self._batch_converter = alphabet.get_batch_converter()
        self.dim = 1280
        self.max_length = 1022

    def encode(self, sequences: list[str]) -> np.ndarray:
        torch = self._torch
        data = [(str(i), s) for i, s in enumerate(sequences)]
        _, _, tokens = self._batch_converter(data)
        with torch.no_grad():
            result = self._model(tokens, repr_layers=[33])
        reps = result["representations"][33]
        L = len(sequences[0])
        # token 0 is BOS/CLS, tokens 1..L are residues; drop EOS
        return reps[:, : L + 1, :].numpy().astype(float)


def load_model(model_id: str):
    """Resolve a model identifier.

    ``esm1b`` loads the real 1280-dim model; ``stub`` or
    ``stub:<dim>[:<seed>]`` builds the deterministic test model.
    """
    if model_id == "esm1b":
        return Esm1bModel()
    if model_id == "stub" or model_id.startswith("stub:"):
        parts = model_id.split(":")
        dim = int(parts[1]) if len(parts) > 1 else 1280
        seed = int(parts[2]) if len(parts) > 2 else 0
        return StubModel(dim=dim, seed=seed)
    raise ModelLoadError(f"unknown model id: {model_id!r}")
