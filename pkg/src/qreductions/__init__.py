"""Quantum state classification by learning reductions.

Simulates the Helstrom and pretty good measurements, the costing,
one-against-all, binary-tree and identification reductions, copy accounting
for finite-copy training, and audits of the PGM error bounds.
"""

from . import errors
from .bounds import audit_bounds, helstrom_bound, pgm_exact_error
from .errors import BudgetExhausted, QReductionsError
from .evaluate import Evaluation, evaluate
from .ledger import CopyLedger, CostReport, error_rate, regret
from .measurement import (
    HelstromOracle,
    Povm,
    helstrom_binary,
    helstrom_weighted,
    majority_repeat,
    measure,
    pgm,
    pgm_for_dataset,
)
from .numerics import make_rng
from .reductions import (
    AggregatedClassifier,
    OneVsAllClassifier,
    TreeClassifier,
    costing_classify,
    costing_train,
    identify_state,
    one_vs_all_classify,
    one_vs_all_train,
    rejection_sampling,
    tree_classify,
    tree_train,
)
from .states import (
    QuantumDataset,
    entangled_vs_separable,
    fidelity,
    load_dataset,
    orthogonal_dataset,
    random_dataset,
    save_dataset,
)
from .swap_test import EXACT, IdentificationClassifier, SimilarityMatrix, similarity_matrix

__version__ = "0.1.0"

__all__ = [
    "errors",
    "audit_bounds",
    "helstrom_bound",
    "pgm_exact_error",
    "Evaluation",
    "evaluate",
    "BudgetExhausted",
    "QReductionsError",
    "CopyLedger",
    "CostReport",
    "error_rate",
    "regret",
    "HelstromOracle",
    "Povm",
    "helstrom_binary",
    "helstrom_weighted",
    "majority_repeat",
    "measure",
    "pgm",
    "pgm_for_dataset",
    "make_rng",
    "AggregatedClassifier",
    "OneVsAllClassifier",
    "TreeClassifier",
    "costing_classify",
    "costing_train",
    "identify_state",
    "one_vs_all_classify",
    "one_vs_all_train",
    "rejection_sampling",
    "tree_classify",
    "tree_train",
    "QuantumDataset",
    "entangled_vs_separable",
    "fidelity",
    "load_dataset",
    "orthogonal_dataset",
    "random_dataset",
    "save_dataset",
    "EXACT",
    "IdentificationClassifier",
    "SimilarityMatrix",
    "similarity_matrix",
]
