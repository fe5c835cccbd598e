"""Pure states, labelled quantum datasets and class mixtures.

Pure states are 1-d complex arrays of length ``2**qubits``; density matrices
are 2-d complex arrays. A :class:`QuantumDataset` holds the classical
description of every training state together with its label, weight and the
number of copies the learner is allowed to consume.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    AllZeroWeights,
    DimensionMismatch,
    EmptyClass,
    InvalidState,
    LabelMismatch,
)
from .numerics import HERMITIAN_TOL, random_unitary

NORM_TOL = 1e-9
LOAD_NORM_TOL = 1e-6
BINARY_LABELS = (-1, 1)


# --------------------------------------------------------------------------
# single states
# --------------------------------------------------------------------------

def as_state(amplitudes, tol: float = NORM_TOL) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    if psi.ndim != 1 or psi.size == 0:
        raise InvalidState(f"a pure state must be a non-empty vector, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise InvalidState(f"state norm {norm:.12g} differs from 1 by more than {tol}")
    return psi


def normalize(amplitudes) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise InvalidState("cannot normalize the zero vector")
    return psi / norm


def basis_state(index: int, dim: int) -> np.ndarray:
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi


def plus_state() -> np.ndarray:
    return np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)


def trine_states() -> list[np.ndarray]:
    """Three real qubit states at 120 degrees on the Bloch great circle."""
    return [np.array([np.cos(t), np.sin(t)], dtype=complex) for t in (0.0, np.pi / 3, 2 * np.pi / 3)]


def qubit_count(dim: int) -> int:
    q = int(round(np.log2(dim)))
    if 2**q != dim:
        raise DimensionMismatch(f"dimension {dim} is not a power of two")
    return q


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def _same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"state dimensions differ: {a.shape} vs {b.shape}")


def overlap(a, b) -> float:
    """Amplitude overlap ``|<a|b>|``."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    _same_dim(a, b)
    return float(abs(np.vdot(a, b)))


def fidelity(a, b) -> float:
    """Squared overlap ``|<a|b>|**2`` of two pure states."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    _same_dim(a, b)
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def euclidean_distance(a, b) -> float:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    _same_dim(a, b)
    return float(np.linalg.norm(a - b))


def fidelity_matrix(states: np.ndarray) -> np.ndarray:
    """Gram matrix of squared overlaps, with an exact unit diagonal."""
    g = np.abs(states.conj() @ states.T) ** 2
    g = np.minimum(g, 1.0)
    np.fill_diagonal(g, 1.0)
    return (g + g.T) / 2


def check_density_matrix(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"density matrix must be square, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvalidState("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise InvalidState(f"density matrix trace {np.trace(rho).real:.12g} is not 1")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0] < -tol:
        raise InvalidState("density matrix has a negative eigenvalue")
    return rho


def haar_random_state(qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Unitarily invariant random pure state on ``qubits`` qubits."""
    if not 1 <= qubits <= 10:
        raise ValueError("qubits must lie in [1, 10]")
    dim = 2**qubits
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def entanglement_entropy(psi, split: int | None = None) -> float:
    """Von Neumann entropy (bits) of the first ``split`` qubits of a pure state."""
    psi = np.asarray(psi, dtype=complex)
    q = qubit_count(psi.size)
    split = q // 2 if split is None else split
    schmidt = np.linalg.svd(psi.reshape(2**split, -1), compute_uv=False) ** 2
    schmidt = schmidt[schmidt > 1e-15]
    return float(-np.sum(schmidt * np.log2(schmidt)))


# --------------------------------------------------------------------------
# datasets
# --------------------------------------------------------------------------

class LabeledState(NamedTuple):
    state: np.ndarray
    label: int
    weight: float


@dataclass(frozen=True, eq=False)
class QuantumDataset:
    """Immutable labelled, weighted set of pure states.

    ``declared_copies`` is the number of copies of each training state the
    learner may consume, or ``None`` when the full classical description is
    available. ``indices`` maps every item back to its position in the root
    dataset, so sub-datasets built by the reductions debit the right copy
    counters.
    """

    states: np.ndarray
    labels: tuple[int, ...]
    weights: np.ndarray
    label_set: tuple[int, ...]
    declared_copies: int | None = None
    indices: tuple[int, ...] = field(default=())

    def __post_init__(self):
        states = np.atleast_2d(np.array(self.states, dtype=complex))
        n = states.shape[0]
        if n < 1:
            raise ValueError("a dataset needs at least one state")
        norms = np.linalg.norm(states, axis=1)
        if np.max(np.abs(norms - 1.0)) > NORM_TOL:
            raise InvalidState("dataset contains a state that is not normalized")
        labels = tuple(int(y) for y in self.labels)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if len(labels) != n or weights.size != n:
            raise ValueError("states, labels and weights must have the same length")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and non-negative")
        label_set = tuple(int(y) for y in self.label_set)
        if len(set(label_set)) != len(label_set):
            raise ValueError("label_set has duplicates")
        missing = set(labels) - set(label_set)
        if missing:
            raise LabelMismatch(f"labels {sorted(missing)} are not in the label set")
        if self.declared_copies is not None and int(self.declared_copies) < 1:
            raise ValueError("declared_copies must be positive or None")
        indices = tuple(self.indices) if self.indices else tuple(range(n))
        if len(indices) != n:
            raise ValueError("indices must have one entry per state")
        states.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "label_set", label_set)
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_items(cls, items: Iterable, label_set: Sequence[int] | None = None,
                   declared_copies: int | None = None) -> "QuantumDataset":
        """Build from ``(state, label)`` or ``(state, label, weight)`` tuples.

        Missing weights default to ``1/n``.
        """
        items = list(items)
        n = len(items)
        states = [normalize(it[0]) for it in items]
        labels = [int(it[1]) for it in items]
        weights = [float(it[2]) if len(it) > 2 else 1.0 / n for it in items]
        if label_set is None:
            label_set = sorted(set(labels))
        return cls(np.array(states), tuple(labels), np.array(weights), tuple(label_set),
                   declared_copies)

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def qubits(self) -> int:
        return qubit_count(self.dim)

    @property
    def k(self) -> int:
        return len(self.label_set)

    @property
    def is_classical(self) -> bool:
        return self.declared_copies is None

    @property
    def is_binary(self) -> bool:
        return set(self.label_set) == set(BINARY_LABELS)

    @property
    def is_standard(self) -> bool:
        """True when every item carries the same weight."""
        w = self.weights
        return bool(np.all(np.abs(w - w.mean()) <= 1e-12 * max(1.0, abs(w.mean())))) and w[0] > 0

    @property
    def normalized_weights(self) -> np.ndarray:
        total = self.weights.sum()
        if total <= 0:
            raise AllZeroWeights("all item weights are zero")
        return self.weights / total

    def label_array(self) -> np.ndarray:
        return np.array(self.labels, dtype=int)

    def items(self) -> list[LabeledState]:
        return [LabeledState(s, y, float(w)) for s, y, w in zip(self.states, self.labels, self.weights)]

    def class_indices(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.label_array() == label)

    def class_priors(self) -> np.ndarray:
        """Normalized weight mass of each class, ordered as ``label_set``."""
        w = self.normalized_weights
        y = self.label_array()
        return np.array([w[y == c].sum() for c in self.label_set])

    def subset(self, positions, label_set: Sequence[int] | None = None) -> "QuantumDataset":
        pos = np.asarray(positions, dtype=int).reshape(-1)
        labels = tuple(self.labels[i] for i in pos)
        if label_set is None:
            label_set = tuple(c for c in self.label_set if c in set(labels))
        return QuantumDataset(self.states[pos], labels, self.weights[pos], tuple(label_set),
                              self.declared_copies, tuple(self.indices[i] for i in pos))

    def relabel(self, labels: Sequence[int], label_set: Sequence[int]) -> "QuantumDataset":
        return QuantumDataset(self.states, tuple(labels), self.weights, tuple(label_set),
                              self.declared_copies, self.indices)

    def with_weights(self, weights) -> "QuantumDataset":
        return QuantumDataset(self.states, self.labels, np.asarray(weights, dtype=float),
                              self.label_set, self.declared_copies, self.indices)

    def uniform(self) -> "QuantumDataset":
        return self.with_weights(np.full(self.n, 1.0 / self.n))

    def to_binary(self, negative: Iterable[int]) -> "QuantumDataset":
        """Relabel: classes in ``negative`` become -1, everything else +1."""
        neg = set(int(c) for c in negative)
        return self.relabel([-1 if y in neg else 1 for y in self.labels], BINARY_LABELS)


def class_mixture(ds: QuantumDataset, label: int) -> tuple[np.ndarray, float]:
    """Weight-proportional mixture of the states of one class and its prior.

    A class whose total weight is zero has prior 0; its mixture is then the
    unweighted average of its states, which keeps the matrix a valid state.
    """
    idx = ds.class_indices(label)
    if idx.size == 0:
        raise EmptyClass(f"no item carries label {label}")
    w = ds.normalized_weights[idx]
    prior = float(w.sum())
    coef = w / prior if prior > 0 else np.full(idx.size, 1.0 / idx.size)
    psi = ds.states[idx]
    rho = (psi.T * coef) @ psi.conj()
    return (rho + rho.conj().T) / 2, prior


def class_mixtures(ds: QuantumDataset) -> tuple[list[np.ndarray], np.ndarray]:
    rhos, priors = [], []
    for c in ds.label_set:
        rho, p = class_mixture(ds, c)
        rhos.append(rho)
        priors.append(p)
    return rhos, np.array(priors)


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------

def _labels_for(classes: int) -> tuple[int, ...]:
    return BINARY_LABELS if classes == 2 else tuple(range(1, classes + 1))


def _weights_for(scheme: str, n: int, rng: np.random.Generator) -> np.ndarray:
    if scheme == "uniform":
        return np.full(n, 1.0 / n)
    if scheme == "random":
        w = rng.uniform(0.05, 1.0, size=n)
        return w / w.sum()
    raise ValueError(f"unknown weight scheme {scheme!r}")


def random_dataset(qubits: int, classes: int, n: int, rng: np.random.Generator,
                   weights: str = "uniform", declared_copies: int | None = None) -> QuantumDataset:
    """Haar-random states assigned round-robin to ``classes`` labels.

    Two classes use the labels -1/+1, more classes use 1..k.
    """
    if classes < 1 or n < classes:
        raise ValueError("need at least one state per class")
    label_set = _labels_for(classes) if classes > 1 else (1,)
    states = np.array([haar_random_state(qubits, rng) for _ in range(n)])
    labels = tuple(label_set[i % classes] for i in range(n))
    return QuantumDataset(states, labels, _weights_for(weights, n, rng), label_set, declared_copies)


def orthogonal_dataset(qubits: int, classes: int, n: int | None = None,
                       rng: np.random.Generator | None = None,
                       declared_copies: int | None = None) -> QuantumDataset:
    """Mutually orthogonal states (a possibly rotated computational basis)."""
    dim = 2**qubits
    n = classes if n is None else n
    if n > dim or n < classes:
        raise ValueError("need classes <= n <= 2**qubits")
    basis = np.eye(dim, dtype=complex)
    if rng is not None:
        basis = random_unitary(dim, rng)
    states = basis[:, :n].T.copy()
    label_set = _labels_for(classes) if classes > 1 else (1,)
    labels = tuple(label_set[i % classes] for i in range(n))
    return QuantumDataset(states, labels, np.full(n, 1.0 / n), label_set, declared_copies)


def entangled_vs_separable(n: int, rng: np.random.Generator, min_entropy: float = 0.1,
                           declared_copies: int | None = None) -> QuantumDataset:
    """Two-qubit preset: product states (-1) against entangled states (+1)."""
    if n < 2:
        raise ValueError("need at least two states")
    n_sep = n // 2
    states, labels = [], []
    for _ in range(n_sep):
        states.append(np.kron(haar_random_state(1, rng), haar_random_state(1, rng)))
        labels.append(-1)
    while len(states) < n:
        psi = haar_random_state(2, rng)
        if entanglement_entropy(psi) > min_entropy:
            states.append(psi)
            labels.append(1)
    return QuantumDataset(np.array(states), tuple(labels), np.full(n, 1.0 / n), BINARY_LABELS,
                          declared_copies)


# --------------------------------------------------------------------------
# file format
# --------------------------------------------------------------------------

def _amp_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def dataset_to_dict(ds: QuantumDataset) -> dict:
    return {
        "qubits": ds.qubits,
        "labels": list(ds.label_set),
        "declared_copies": "classical" if ds.declared_copies is None else int(ds.declared_copies),
        "items": [
            {"label": int(y), "weight": float(w), "amplitudes": [_amp_pair(a) for a in psi]}
            for psi, y, w in zip(ds.states, ds.labels, ds.weights)
        ],
    }


def dataset_from_dict(doc: dict) -> QuantumDataset:
    qubits = int(doc["qubits"])
    dim = 2**qubits
    copies = doc.get("declared_copies", "classical")
    copies = None if copies in ("classical", None) else int(copies)
    states, labels, weights = [], [], []
    for i, item in enumerate(doc["items"]):
        amps = np.array([complex(float(re), float(im)) for re, im in item["amplitudes"]])
        if amps.size != dim:
            raise DimensionMismatch(f"item {i} has {amps.size} amplitudes, expected {dim}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > LOAD_NORM_TOL:
            raise InvalidState(f"item {i} has norm {norm:.9g}, beyond the load tolerance")
        # keep stored amplitudes bit-exact unless they actually need fixing
        states.append(amps if abs(norm - 1.0) <= NORM_TOL else amps / norm)
        labels.append(int(item["label"]))
        weights.append(float(item.get("weight", 1.0)))
    return QuantumDataset(np.array(states), tuple(labels), np.array(weights),
                          tuple(int(c) for c in doc["labels"]), copies)


def save_dataset(ds: QuantumDataset, path) -> None:
    Path(path).write_text(json.dumps(dataset_to_dict(ds), indent=1) + "\n")


def load_dataset(path) -> QuantumDataset:
    return dataset_from_dict(json.loads(Path(path).read_text()))
