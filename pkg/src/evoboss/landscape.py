"""Combinatorial protein fitness landscapes and the screening oracle.

A landscape is a table of measured variant -> fitness values over the space
of all 20^n words at n mutated positions. Unmeasured variants have fitness
zero by convention. Screening is rationed through a ScreeningSession which
enforces the budget and rejects duplicate screens.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

from .trace import RunTrace

ALPHABET = "ACDEFGHIKLMNPQRSTVWY"
ALPHABET_INDEX = {a: i for i, a in enumerate(ALPHABET)}

MAX_POSITIONS = 7  # 20^7 ~ 1.28e9: enumeration beyond this is rejected


class LandscapeFormatError(ValueError):
    """Raised on malformed landscape CSV or metadata input."""


class BudgetExhausted(RuntimeError):
    """Raised when a screen is requested after the budget is spent."""


class DuplicateScreen(RuntimeError):
    """Raised when the same variant is screened twice in one session."""


def _check_word(word: str, n: int) -> None:
    if len(word) != n:
        raise LandscapeFormatError(
            f"variant {word!r} has length {len(word)}, expected {n}"
        )
    for ch in word:
        if ch not in ALPHABET_INDEX:
            raise LandscapeFormatError(f"illegal residue {ch!r} in variant {word!r}")


def variant_index(word: str) -> int:
    """Rank of `word` in the lexicographic enumeration of all 20^n words."""
    idx = 0
    for ch in word:
        idx = idx * 20 + ALPHABET_INDEX[ch]
    return idx


def variant_word(index: int, n: int) -> str:
    """Inverse of variant_index for words of length n."""
    if not 0 <= index < 20**n:
        raise ValueError(f"index {index} out of range for n={n}")
    letters = []
    for _ in range(n):
        index, rem = divmod(index, 20)
        letters.append(ALPHABET[rem])
    return "".join(reversed(letters))


@dataclass(frozen=True)
class Variant:
    """A point in the combinatorial sequence space: n residues + its rank."""

    residues: str
    index: int

    @classmethod
    def from_residues(cls, word: str) -> "Variant":
        _check_word(word, len(word))
        return cls(word, variant_index(word))

    @classmethod
    def from_index(cls, index: int, n: int) -> "Variant":
        return cls(variant_word(index, n), index)

    def __len__(self) -> int:
        return len(self.residues)


def enumerate_variants(n: int) -> list[Variant]:
    """All 20^n variants in lexicographic order; index equals position."""
    if not 1 <= n <= MAX_POSITIONS:
        raise ValueError(f"n must be in [1, {MAX_POSITIONS}], got {n}")
    return [
        Variant("".join(letters), i)
        for i, letters in enumerate(itertools.product(ALPHABET, repeat=n))
    ]


def single_mutants(v: Variant, position: int) -> list[Variant]:
    """The 19 variants differing from v only at `position`."""
    n = len(v.residues)
    if not 0 <= position < n:
        raise ValueError(f"position {position} out of range for n={n}")
    out = []
    for a in ALPHABET:
        if a == v.residues[position]:
            continue
        word = v.residues[:position] + a + v.residues[position + 1 :]
        out.append(Variant.from_residues(word))
    return out


@dataclass
class Landscape:
    """Measured fitness table with zero default for unmeasured variants."""

    name: str
    n: int
    position_labels: list[str]
    wild_type: Variant
    measured: dict[str, float]
    fitness_max: float = field(init=False)

    def __post_init__(self) -> None:
        _check_word(self.wild_type.residues, self.n)
        for word, y in self.measured.items():
            _check_word(word, self.n)
            if not y >= 0.0:
                raise LandscapeFormatError(
                    f"fitness of {word!r} is {y}, must be non-negative"
                )
        if not self.measured:
            raise LandscapeFormatError("landscape has no measured variants")
        self.fitness_max = max(self.measured.values())

    def fitness(self, v: Variant | str) -> float:
        word = v if isinstance(v, str) else v.residues
        _check_word(word, self.n)
        return self.measured.get(word, 0.0)

    @property
    def space_size(self) -> int:
        return 20**self.n


def fitness(landscape: Landscape, v: Variant | str) -> float:
    """Screening oracle value: measured fitness, or 0.0 if unmeasured."""
    return landscape.fitness(v)


def _parse_metadata(path: Path) -> dict[str, str]:
    meta: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise LandscapeFormatError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        meta[key.strip()] = value.strip()
    return meta


def load_landscape(
    path: str | Path, n: int, meta_path: str | Path | None = None
) -> Landscape:
    """Load a landscape from CSV (header `variant,fitness`) + optional sidecar.

    Without a metadata file the landscape is named after the CSV stem, the
    wild type defaults to the first data row, and positions are labeled
    P0..P{n-1}.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise LandscapeFormatError(f"{path}: empty file")
    header = lines[0].strip()
    if header != "variant,fitness":
        raise LandscapeFormatError(
            f"{path}: expected header 'variant,fitness', got {header!r}"
        )
    measured: dict[str, float] = {}
    first_word: str | None = None
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise LandscapeFormatError(f"{path}:{lineno}: expected 2 fields")
        word, fit_str = parts[0].strip(), parts[1].strip()
        _check_word(word, n)
        try:
            y = float(fit_str)
        except ValueError:
            raise LandscapeFormatError(
                f"{path}:{lineno}: non-numeric fitness {fit_str!r}"
            ) from None
        if word in measured:
            raise LandscapeFormatError(f"{path}:{lineno}: duplicate variant {word!r}")
        measured[word] = y
        if first_word is None:
            first_word = word
    if not measured:
        raise LandscapeFormatError(f"{path}: no data rows")

    name = path.stem
    labels = [f"P{i}" for i in range(n)]
    wild_type_word = first_word
    if meta_path is not None:
        meta = _parse_metadata(Path(meta_path))
        name = meta.get("name", name)
        if "n" in meta and int(meta["n"]) != n:
            raise LandscapeFormatError(
                f"metadata n={meta['n']} disagrees with requested n={n}"
            )
        if "positions" in meta:
            labels = [p.strip() for p in meta["positions"].split(",")]
            if len(labels) != n:
                raise LandscapeFormatError(
                    f"metadata lists {len(labels)} positions, expected {n}"
                )
        wild_type_word = meta.get("wild_type", wild_type_word)

    assert wild_type_word is not None
    return Landscape(
        name=name,
        n=n,
        position_labels=labels,
        wild_type=Variant.from_residues(wild_type_word),
        measured=measured,
    )


def save_landscape(landscape: Landscape, path: str | Path) -> None:
    """Serialize the measured table back to the CSV format of load_landscape."""
    lines = ["variant,fitness"]
    lines += [f"{w},{y!r}" for w, y in landscape.measured.items()]
    Path(path).write_text("\n".join(lines) + "\n")


class ScreeningSession:
    """Budget-enforcing screening oracle for one optimization run."""

    def __init__(self, landscape: Landscape, budget: int, config: dict | None = None,
                 seed: int = 0):
        if budget < 1:
            raise ValueError(f"budget must be positive, got {budget}")
        self.landscape = landscape
        self.budget = budget
        self._screened: set[str] = set()
        self._order: list[str] = []
        self.trace = RunTrace(config=dict(config or {}), seed=seed)

    @property
    def screened_count(self) -> int:
        return len(self._order)

    @property
    def screened_words(self) -> list[str]:
        return list(self._order)

    def is_screened(self, v: Variant | str) -> bool:
        word = v if isinstance(v, str) else v.residues
        return word in self._screened

    @property
    def exhausted(self) -> bool:
        return len(self._order) >= self.budget

    def screen(self, v: Variant | str, theta: float | None = None) -> float:
        word = v if isinstance(v, str) else v.residues
        if word in self._screened:
            raise DuplicateScreen(f"variant {word!r} already screened")
        if self.exhausted:
            raise BudgetExhausted(f"budget of {self.budget} screens spent")
        y = self.landscape.fitness(word)
        self._screened.add(word)
        self._order.append(word)
        self.trace.record(word, y, theta=theta)
        return y
