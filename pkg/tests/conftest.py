import numpy as np
import pytest

from evoboss import Landscape, Variant, enumerate_variants, synth_store


def make_landscape(measured: dict[str, float], wild_type: str,
                   name: str = "toy") -> Landscape:
    n = len(wild_type)
    return Landscape(
        name=name,
        n=n,
        position_labels=[f"P{i}" for i in range(n)],
        wild_type=Variant.from_residues(wild_type),
        measured=measured,
    )


def planted_landscape(seed: int = 7, dim: int = 32, lam: float = 5.0,
                      n_local: int = 7, amp: tuple[float, float] = (5.0, 2.5)):
    """400-variant landscape whose fitness is a smooth function of the
    synthetic embedding: one planted global optimum plus several local bumps.

    Returns (landscape, store, variants, fitness_vector, global_row).
    """
    variants = enumerate_variants(2)
    store = synth_store(variants, dim, seed)
    X = store.matrix
    rng = np.random.default_rng(seed + 1)
    centers = rng.choice(len(variants), size=1 + n_local, replace=False)
    global_row = int(centers[0])
    f = amp[0] * np.exp(-np.sum((X - X[global_row]) ** 2, axis=1) / (2 * lam**2))
    for c in centers[1:]:
        f = f + amp[1] * np.exp(-np.sum((X - X[int(c)]) ** 2, axis=1) / (2 * lam**2))
    measured = {v.residues: float(f[i]) for i, v in enumerate(variants)}
    landscape = Landscape(
        name="planted",
        n=2,
        position_labels=["P0", "P1"],
        wild_type=variants[global_row],
        measured=measured,
    )
    return landscape, store, variants, f, global_row


@pytest.fixture(scope="session")
def planted():
    return planted_landscape()
