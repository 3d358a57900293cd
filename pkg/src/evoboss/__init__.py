"""Bayesian optimization in protein-embedding space, with classical
directed-evolution baselines and an evaluation harness."""

from .acquisition import (
    AcquisitionResult,
    SpaceExhausted,
    expected_improvement,
    select_batch,
    select_next,
)
from .baselines import run_random, run_recombination, run_smw
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
from .evaluation import SweepSpec, ndcg, quartile_curves, snapshots, sweep
from .gp import (
    FittedGP,
    GPNumericsError,
    KernelSpec,
    LengthScalePrior,
    distance,
    fit,
    kernel,
    log_marginal_likelihood,
)
from .landscape import (
    ALPHABET,
    BudgetExhausted,
    DuplicateScreen,
    Landscape,
    LandscapeFormatError,
    ScreeningSession,
    Variant,
    enumerate_variants,
    fitness,
    load_landscape,
    save_landscape,
    single_mutants,
)
from .trace import RunTrace, TraceRecord

__version__ = "0.1.0"
