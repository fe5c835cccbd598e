"""Copy accounting for the finite-copy and classical learning regimes.

A :class:`CopyLedger` counts how many copies of each training state a
procedure has consumed, and how many copies of the unknown state were used to
classify it. In classical mode the learner holds the full description of the
states, so training consumption is recorded as zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExhausted, InvalidRange, LabelMismatch

CSV_HEADER = (
    "task",
    "training_cost_symbolic",
    "training_cost_measured",
    "classification_cost_symbolic",
    "classification_cost_measured",
)


class CopyLedger:
    """Per-state copy counters with an optional budget of ``copies`` per state.

    ``copies=None`` selects classical mode.
    """

    def __init__(self, n_states: int, copies: int | None = None):
        if n_states < 1:
            raise ValueError("ledger needs at least one training state")
        if copies is not None and copies < 0:
            raise ValueError("copies must be non-negative")
        self.copies = copies
        self.training = np.zeros(n_states, dtype=np.int64)
        self.unknown_copies = 0

    @classmethod
    def for_dataset(cls, ds) -> "CopyLedger":
        return cls(ds.n, ds.declared_copies)

    @property
    def classical(self) -> bool:
        return self.copies is None

    @property
    def mode(self) -> str:
        return "classical" if self.classical else f"finite({self.copies})"

    @property
    def n_states(self) -> int:
        return self.training.size

    def remaining(self, index: int) -> float:
        if self.classical:
            return float("inf")
        return int(self.copies - self.training[index])

    def consume_training(self, index: int, count: int) -> None:
        self.consume_training_many([index], count)

    def consume_training_many(self, indices: Iterable[int], count: int) -> None:
        """Debit ``count`` copies of every listed state, all or nothing."""
        if count < 0:
            raise ValueError("count must be non-negative")
        idx = np.asarray(list(indices), dtype=int)
        if self.classical or count == 0 or idx.size == 0:
            return
        need = np.bincount(idx, minlength=self.n_states) * count
        over = np.flatnonzero(self.training + need > self.copies)
        if over.size:
            i = int(over[0])
            raise BudgetExhausted(i, int(need[i]), int(self.copies - self.training[i]))
        self.training += need

    def require(self, count: int, indices: Iterable[int] | None = None) -> None:
        """Raise unless every listed state still has ``count`` copies left."""
        if self.classical:
            return
        idx = range(self.n_states) if indices is None else indices
        for i in idx:
            if self.copies - self.training[i] < count:
                raise BudgetExhausted(int(i), count, int(self.copies - self.training[i]))

    def consume_unknown(self, count: int) -> None:
        if count < 0:
            raise ValueError("count must be non-negative")
        self.unknown_copies += int(count)

    @property
    def training_cost(self) -> int:
        """Largest number of copies consumed from any single training state."""
        return int(self.training.max())

    @property
    def total_training(self) -> int:
        return int(self.training.sum())

    def merge(self, other: "CopyLedger") -> "CopyLedger":
        """Sum of two ledgers over the same training set."""
        if other.n_states != self.n_states or other.copies != self.copies:
            raise ValueError("ledgers describe different experiments")
        out = CopyLedger(self.n_states, self.copies)
        out.training = self.training + other.training
        out.unknown_copies = self.unknown_copies + other.unknown_copies
        return out

    def __repr__(self):
        return (f"CopyLedger(mode={self.mode}, training_cost={self.training_cost}, "
                f"unknown_copies={self.unknown_copies})")


def error_rate(classifier, ds) -> float:
    """Exact weighted training error of ``classifier`` on ``ds``.

    ``classifier`` must expose ``labels`` (its possible outputs) and
    ``prediction_probabilities(states, label_set)``; every POVM and every
    reduction classifier in this package does. Uniform weights give the
    plain training error.
    """
    outputs = set(getattr(classifier, "labels", ds.label_set))
    if not outputs <= set(ds.label_set) or not set(ds.labels) <= outputs:
        raise LabelMismatch(
            f"classifier outputs {sorted(outputs)} do not match dataset labels {list(ds.label_set)}")
    probs = classifier.prediction_probabilities(ds.states, ds.label_set)
    col = {c: j for j, c in enumerate(ds.label_set)}
    correct = probs[np.arange(ds.n), [col[y] for y in ds.labels]]
    err = float(np.dot(ds.normalized_weights, 1.0 - correct))
    return min(1.0, max(0.0, err))


def regret(error: float, optimal_error: float) -> float:
    if error < optimal_error - 1e-6:
        raise InvalidRange(f"error {error} is below the optimal error {optimal_error}")
    return max(0.0, error - optimal_error)


@dataclass(frozen=True)
class CostReport:
    task: str
    training_symbolic: str
    training_measured: int | None
    classification_symbolic: str
    classification_measured: int | None

    def row(self) -> list[str]:
        def fmt(v):
            return "NA" if v is None else str(int(v))

        return [self.task, self.training_symbolic, fmt(self.training_measured),
                self.classification_symbolic, fmt(self.classification_measured)]

    def scaled(self, factor: int) -> "CostReport":
        """Global view: training cost multiplied by the dataset size."""
        t = None if self.training_measured is None else self.training_measured * factor
        return CostReport(self.task, f"n*{self.training_symbolic}", t,
                          self.classification_symbolic, self.classification_measured)


def write_cost_csv(reports: Sequence[CostReport], path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in reports:
            w.writerow(r.row())


def read_cost_csv(path) -> list[CostReport]:
    def parse(v):
        return None if v == "NA" else int(v)

    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [CostReport(r["task"], r["training_cost_symbolic"], parse(r["training_cost_measured"]),
                       r["classification_cost_symbolic"], parse(r["classification_cost_measured"]))
            for r in rows]
