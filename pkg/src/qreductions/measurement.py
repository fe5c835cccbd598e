"""POVMs, their simulation, and the Helstrom and pretty-good measurements."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidPrior,
    LabelMismatch,
    NotHermitian,
    NotPsd,
    NumericalBreakdown,
)
from .numerics import DEFAULT_RANK_TOL, hermitian_eigen, pinv_sqrt
from .states import BINARY_LABELS, QuantumDataset, class_mixture, class_mixtures

POVM_TOL = 1e-9
PROB_RENORM_TOL = 1e-9
PROB_BREAKDOWN_TOL = 1e-6
ZERO_EIGEN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Povm:
    """Finite POVM with one classifier label per element.

    ``elements`` is stacked into an array of shape (outcomes, dim, dim).
    """

    elements: np.ndarray
    labels: tuple[int, ...]

    def __post_init__(self):
        e = np.array(self.elements, dtype=complex)
        if e.ndim != 3 or e.shape[1] != e.shape[2]:
            raise DimensionMismatch(f"POVM elements must be square matrices, got {e.shape}")
        labels = tuple(int(c) for c in self.labels)
        if len(labels) != e.shape[0]:
            raise ValueError("one label per POVM element is required")
        if np.max(np.abs(e - e.conj().transpose(0, 2, 1))) > POVM_TOL:
            raise NotHermitian("POVM element is not Hermitian")
        e = (e + e.conj().transpose(0, 2, 1)) / 2
        if min(np.linalg.eigvalsh(m)[0] for m in e) < -POVM_TOL:
            raise NotPsd("POVM element has a negative eigenvalue")
        dev = np.max(np.abs(e.sum(axis=0) - np.eye(e.shape[1])))
        if dev > POVM_TOL:
            raise NumericalBreakdown(f"POVM elements sum to identity only within {dev:.3g}")
        e.setflags(write=False)
        object.__setattr__(self, "elements", e)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.elements.shape[0]

    def element(self, label: int) -> np.ndarray:
        """Sum of the elements carrying ``label``."""
        mask = np.array(self.labels) == label
        return self.elements[mask].sum(axis=0)

    def probabilities(self, state) -> np.ndarray:
        """Outcome probabilities ``Tr(E_o rho)`` for one pure state or density matrix."""
        s = np.asarray(state, dtype=complex)
        if s.shape[0] != self.dim:
            raise DimensionMismatch(f"state dimension {s.shape[0]} does not match POVM {self.dim}")
        if s.ndim == 1:
            p = np.einsum("i,oij,j->o", s.conj(), self.elements, s).real
        elif s.ndim == 2:
            p = np.einsum("oij,ji->o", self.elements, s).real
        else:
            raise DimensionMismatch("state must be a vector or a matrix")
        return p

    def probabilities_pure(self, states) -> np.ndarray:
        """Outcome probabilities for a batch of pure states, shape (m, outcomes)."""
        s = np.asarray(states, dtype=complex)
        if s.ndim != 2 or s.shape[1] != self.dim:
            raise DimensionMismatch("expected a (m, dim) batch of pure states")
        return np.einsum("mi,oij,mj->mo", s.conj(), self.elements, s).real

    def prediction_probabilities(self, states, label_set: Sequence[int] | None = None) -> np.ndarray:
        label_set = tuple(dict.fromkeys(self.labels)) if label_set is None else tuple(label_set)
        p = np.clip(self.probabilities_pure(states), 0.0, 1.0)
        out = np.zeros((p.shape[0], len(label_set)))
        col = {c: j for j, c in enumerate(label_set)}
        for o, c in enumerate(self.labels):
            if c not in col:
                raise LabelMismatch(f"POVM outcome {c} is not in {label_set}")
            out[:, col[c]] += p[:, o]
        return out

    def sample_predictions(self, states, rng: np.random.Generator):
        """One single-copy measurement per state: (labels, copies used)."""
        p = _checked_probabilities(self.probabilities_pure(states))
        outcomes = _sample_rows(p, rng.random(p.shape[0]))
        return np.array(self.labels)[outcomes], np.ones(len(outcomes), dtype=int)

    def classify(self, state, rng: np.random.Generator, ledger=None) -> int:
        return measure(self, state, rng, ledger)

    def relabeled(self, mapping: dict[int, int]) -> "Povm":
        return Povm(self.elements, tuple(mapping.get(c, c) for c in self.labels))

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "elements": [[[[float(z.real), float(z.imag)] for z in row] for row in m]
                         for m in self.elements],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Povm":
        e = np.array(doc["elements"], dtype=float)
        return cls(e[..., 0] + 1j * e[..., 1], tuple(doc["labels"]))


def save_povm(povm: Povm, path) -> None:
    Path(path).write_text(json.dumps(povm.to_dict()) + "\n")


def load_povm(path) -> Povm:
    return Povm.from_dict(json.loads(Path(path).read_text()))


def _checked_probabilities(p: np.ndarray) -> np.ndarray:
    p = np.clip(np.atleast_2d(p), 0.0, 1.0)
    total = p.sum(axis=1)
    bad = np.abs(total - 1.0) > PROB_BREAKDOWN_TOL
    if np.any(bad):
        raise NumericalBreakdown(f"outcome probabilities sum to {total[bad][0]:.9g}")
    return p / total[:, None]


def _sample_rows(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(p, axis=1)
    idx = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(idx, p.shape[1] - 1)


def measure(povm: Povm, state, rng: np.random.Generator, ledger=None) -> int:
    """Measure one fresh copy of ``state`` and return the outcome label."""
    p = _checked_probabilities(povm.probabilities(state))
    o = int(_sample_rows(p, np.array([rng.random()]))[0])
    if ledger is not None:
        ledger.consume_unknown(1)
    return povm.labels[o]


def majority_repeat(povm: Povm, state, copies: int, rng: np.random.Generator, ledger=None) -> int:
    """Measure ``copies`` fresh copies and return the majority label."""
    if copies < 1 or copies % 2 == 0:
        raise ValueError("copies must be a positive odd integer")
    if set(povm.labels) != set(BINARY_LABELS):
        raise LabelMismatch("majority_repeat needs a binary (-1/+1) POVM")
    votes = sum(measure(povm, state, rng, ledger) for _ in range(copies))
    return 1 if votes > 0 else -1


def _check_priors(priors, count: int) -> np.ndarray:
    p = np.asarray(priors, dtype=float)
    if p.size != count:
        raise InvalidPrior(f"expected {count} priors, got {p.size}")
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidPrior(f"priors must be non-negative and sum to 1, got {p}")
    return np.clip(p, 0.0, None)


def helstrom_binary(rho_minus, rho_plus, p_minus: float, p_plus: float) -> Povm:
    """Optimal two-outcome measurement discriminating two weighted states.

    The +1 element projects onto the strictly positive eigenspace of
    ``p_plus*rho_plus - p_minus*rho_minus``; zero eigenvalues go to -1.
    """
    rm, rp = np.asarray(rho_minus, dtype=complex), np.asarray(rho_plus, dtype=complex)
    if rm.shape != rp.shape or rm.ndim != 2:
        raise DimensionMismatch(f"mixtures have shapes {rm.shape} and {rp.shape}")
    pm, pp = _check_priors([p_minus, p_plus], 2)
    dec = hermitian_eigen(pp * rp - pm * rm)
    v = dec.eigenvectors[:, dec.eigenvalues > ZERO_EIGEN_TOL]
    pi_plus = v @ v.conj().T
    pi_minus = np.eye(rm.shape[0]) - pi_plus
    return Povm(np.array([pi_minus, pi_plus]), BINARY_LABELS)


def helstrom_weighted(ds: QuantumDataset) -> Povm:
    """Helstrom measurement between the weight-incorporating class mixtures.

    Minimizes the weighted error ``sum_i w_i Prob(f(psi_i) != y_i)``.
    """
    if not ds.is_binary:
        raise LabelMismatch(f"expected labels -1/+1, got {ds.label_set}")
    ds.normalized_weights  # raises AllZeroWeights
    rho_m, p_m = class_mixture(ds, -1)
    rho_p, p_p = class_mixture(ds, 1)
    return helstrom_binary(rho_m, rho_p, p_m, 1.0 - p_m)


def ensemble_error(povm: Povm, rhos: Sequence, priors, labels: Sequence[int] | None = None) -> float:
    """Exact error ``1 - sum_i p_i Tr(E_{label_i} rho_i)`` of a discrimination task."""
    labels = tuple(dict.fromkeys(povm.labels)) if labels is None else tuple(labels)
    priors = _check_priors(priors, len(rhos))
    success = 0.0
    for rho, p, c in zip(rhos, priors, labels):
        success += p * np.trace(povm.element(c) @ np.asarray(rho)).real
    return float(min(1.0, max(0.0, 1.0 - success)))


def pgm(states: Sequence, priors, labels: Sequence[int] | None = None,
        rank_tolerance: float = DEFAULT_RANK_TOL) -> Povm:
    """Pretty good (square-root) measurement for weighted density matrices.

    ``E_i = rho^{-1/2} p_i rho_i rho^{-1/2}`` with ``rho = sum_i p_i rho_i``,
    the inverse taken on the support of ``rho``. The complement of the
    support is added to the element of the most probable class (lowest label
    on ties) so that the elements sum to the identity.
    """
    rhos = [np.asarray(r, dtype=complex) for r in states]
    if not rhos:
        raise ValueError("need at least one state")
    dim = rhos[0].shape[0]
    if any(r.shape != (dim, dim) for r in rhos):
        raise DimensionMismatch("all density matrices must share one dimension")
    labels = tuple(range(len(rhos))) if labels is None else tuple(int(c) for c in labels)
    p = _check_priors(priors, len(rhos))
    weighted = [pi * r for pi, r in zip(p, rhos)]
    root = pinv_sqrt(sum(weighted), rank_tolerance)
    elems = np.array([root @ w @ root for w in weighted])
    elems = (elems + elems.conj().transpose(0, 2, 1)) / 2
    residual = np.eye(dim) - elems.sum(axis=0)
    best = min(range(len(labels)), key=lambda i: (-p[i], labels[i]))
    elems[best] += (residual + residual.conj().T) / 2
    return Povm(elems, labels)


def pgm_for_dataset(ds: QuantumDataset) -> Povm:
    rhos, priors = class_mixtures(ds)
    return pgm(rhos, priors, ds.label_set)


@dataclass(frozen=True)
class HelstromOracle:
    """Binary learner used by every reduction.

    Version ``"v1"`` works from classical descriptions at no copy cost.
    Version ``"v2"`` returns the same measurement but debits ``t_bin``
    copies of every state it is handed; ``learner`` can be swapped for an
    approximate copy-based learner.
    """

    version: str = "v1"
    t_bin: int = 1
    learner: Callable[[QuantumDataset], Povm] = field(default=helstrom_weighted, compare=False)

    def __post_init__(self):
        if self.version not in ("v1", "v2"):
            raise ValueError(f"unknown oracle version {self.version!r}")
        if self.t_bin < 1:
            raise ValueError("t_bin must be positive")

    def __call__(self, ds: QuantumDataset, ledger=None) -> Povm:
        return oracle_call(self, ds, ledger)


def oracle_call(oracle: HelstromOracle, ds: QuantumDataset, ledger=None) -> Povm:
    if oracle.version == "v2" and ledger is not None:
        ledger.consume_training_many(ds.indices, oracle.t_bin)
    return oracle.learner(ds)
