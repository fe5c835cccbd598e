"""Monte Carlo evaluation of trained classifiers.

Each trial draws a training item with probability equal to its normalized
weight (for uniform weights: a class by its prior, then a state of that
class uniformly) and classifies a fresh copy of it. Trials are simulated in
blocks; block ``b`` draws from its own substream ``make_rng(seed, 1, b)``,
so results do not depend on how blocks are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ledger import error_rate
from .numerics import make_rng
from .states import QuantumDataset

BLOCK = 4096
EVAL_STREAM = 1


@dataclass(frozen=True, eq=False)
class Evaluation:
    items: np.ndarray
    truth: np.ndarray
    predictions: np.ndarray
    copies: np.ndarray
    exact_error: float | None

    @property
    def trials(self) -> int:
        return self.items.size

    @property
    def errors(self) -> np.ndarray:
        return self.predictions != self.truth

    @property
    def error(self) -> float:
        return float(self.errors.mean())

    @property
    def standard_error(self) -> float:
        e = self.error
        return math.sqrt(e * (1 - e) / self.trials)

    def running_error(self) -> np.ndarray:
        return np.cumsum(self.errors) / np.arange(1, self.trials + 1)


def standard_error(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def perturb(states: np.ndarray, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Move each state by Euclidean distance about ``eps`` in a random direction, then renormalize."""
    noise = rng.standard_normal(states.shape) + 1j * rng.standard_normal(states.shape)
    noise /= np.linalg.norm(noise, axis=1, keepdims=True)
    out = states + eps * noise
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def evaluate(classifier, ds: QuantumDataset, trials: int, seed: int, exact: bool = True,
             block: int = BLOCK, perturbation: float = 0.0) -> Evaluation:
    """Simulate ``trials`` independent classifications of items drawn from ``ds``.

    A positive ``perturbation`` presents held-out states near each drawn item
    instead of the item itself; the exact error is then not reported.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if perturbation < 0:
        raise ValueError("perturbation must be non-negative")
    exact = exact and perturbation == 0
    w = ds.normalized_weights
    y = ds.label_array()
    items, preds, copies = [], [], []
    for b, start in enumerate(range(0, trials, block)):
        rng = make_rng(seed, EVAL_STREAM, b)
        m = min(block, trials - start)
        idx = rng.choice(ds.n, size=m, p=w)
        shown = ds.states[idx] if perturbation == 0 else perturb(ds.states[idx], perturbation, rng)
        p, c = classifier.sample_predictions(shown, rng)
        items.append(idx)
        preds.append(p)
        copies.append(c)
    idx = np.concatenate(items)
    exact_err = error_rate(classifier, ds) if exact else None
    return Evaluation(idx, y[idx], np.concatenate(preds).astype(int), np.concatenate(copies),
                      exact_err)


def evaluate_single_trials(classifier, ds: QuantumDataset, trials: int, seed: int, ledger=None):
    """Trial-by-trial loop through ``classify``; slow, used to cross-check the batch path."""
    w = ds.normalized_weights
    y = ds.label_array()
    rng = make_rng(seed, EVAL_STREAM)
    idx = rng.choice(ds.n, size=trials, p=w)
    pred = np.array([classifier.classify(ds.states[i], rng, ledger) for i in idx])
    return idx, y[idx], pred
