"""Learning reductions built on top of a binary Helstrom oracle.

* costing: weighted binary -> standard binary, by rejection sampling and a
  majority vote of ``T`` classifiers;
* one-against-all: ``k`` classes -> ``k`` binary problems;
* binary tree: ``k`` classes -> a balanced tree of binary problems;
* state identification: the tree with one class per training state.

Every trained classifier exposes ``classify`` (one prediction, consuming
fresh copies of the unknown state), ``sample_predictions`` (vectorized
simulation of many independent predictions) and
``prediction_probabilities`` (the exact output distribution).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import (
    DegenerateDataset,
    DuplicateStates,
    EmptyClass,
    InvalidConfig,
    InvalidConstant,
    LabelMismatch,
)
from .measurement import HelstromOracle, Povm, measure
from .numerics import trace_norm
from .states import BINARY_LABELS, QuantumDataset, dataset_from_dict, dataset_to_dict
from .swap_test import IdentificationClassifier

RANDOM_BALANCED = "random"
MAX_TRACE_DISTANCE = "max-trace"
EXHAUSTIVE_SPLIT_LIMIT = 12
MAX_REDRAWS = 100


def _poisson_binomial(p: np.ndarray) -> np.ndarray:
    """Distribution of the number of successes, one row per row of ``p``."""
    m, t = p.shape
    dist = np.zeros((m, t + 1))
    dist[:, 0] = 1.0
    for j in range(t):
        q = p[:, j][:, None]
        dist[:, 1:] = dist[:, 1:] * (1 - q) + dist[:, :-1] * q
        dist[:, 0] *= 1 - q[:, 0]
    return dist


def _minus_probability(povm: Povm, states) -> np.ndarray:
    return np.clip(povm.prediction_probabilities(states, BINARY_LABELS)[:, 0], 0.0, 1.0)


# --------------------------------------------------------------------------
# costing
# --------------------------------------------------------------------------

def _check_constant(ds: QuantumDataset, c: float | None) -> float:
    wmax = float(ds.weights.max())
    c = wmax if c is None else float(c)
    if c <= 0 or c < wmax:
        raise InvalidConstant(f"c={c} must be positive and at least the largest weight {wmax}")
    return c


def _rejection_mask(ds: QuantumDataset, c: float, rng: np.random.Generator) -> np.ndarray:
    return rng.random(ds.n) < ds.weights / c


def rejection_sampling(ds: QuantumDataset, c: float | None, rng: np.random.Generator) -> QuantumDataset:
    """Keep item ``i`` with probability ``w_i / c``; kept items get equal weight.

    Rejected items are only put aside, so no copies are consumed here.
    """
    c = _check_constant(ds, c)
    mask = _rejection_mask(ds, c, rng)
    if not mask.any():
        raise DegenerateDataset("rejection sampling kept no item")
    kept = ds.subset(np.flatnonzero(mask), label_set=ds.label_set)
    return kept.uniform()


@dataclass(frozen=True, eq=False)
class AggregatedClassifier:
    """Majority vote of ``T`` binary POVMs, each applied to its own copy."""

    classifiers: tuple[Povm, ...]
    c: float | None = None

    def __post_init__(self):
        if not self.classifiers:
            raise ValueError("need at least one classifier")
        if len({p.dim for p in self.classifiers}) != 1:
            raise ValueError("classifiers act on different dimensions")
        object.__setattr__(self, "classifiers", tuple(self.classifiers))

    labels = BINARY_LABELS

    @property
    def T(self) -> int:
        return len(self.classifiers)

    def classify(self, unknown, rng: np.random.Generator, ledger=None) -> int:
        return costing_classify(self, unknown, rng, ledger)

    def plus_probabilities(self, states) -> np.ndarray:
        return np.column_stack([1.0 - _minus_probability(p, states) for p in self.classifiers])

    def sample_predictions(self, states, rng: np.random.Generator):
        p = self.plus_probabilities(states)
        plus_votes = (rng.random(p.shape) < p).sum(axis=1)
        pred = np.where(2 * plus_votes > self.T, 1, -1)
        return pred, np.full(len(pred), self.T, dtype=int)

    def prediction_probabilities(self, states, label_set=BINARY_LABELS) -> np.ndarray:
        dist = _poisson_binomial(self.plus_probabilities(states))
        p_plus = dist[:, self.T // 2 + 1:].sum(axis=1)
        return _binary_columns(p_plus, label_set)


def _binary_columns(p_plus: np.ndarray, label_set) -> np.ndarray:
    cols = {-1: 1.0 - p_plus, 1: p_plus}
    if set(label_set) != set(BINARY_LABELS):
        raise LabelMismatch(f"binary classifier cannot report on labels {label_set}")
    return np.column_stack([cols[c] for c in label_set])


def costing_train(ds: QuantumDataset, T: int, oracle: HelstromOracle, rng: np.random.Generator,
                  ledger=None, c: float | None = None, exact: bool = False) -> AggregatedClassifier:
    """Train ``T`` binary classifiers on rejection-sampled copies of ``ds``.

    ``exact=True`` hands the oracle the expected resampled distribution
    (weights ``w_i / c``) instead of a random draw. Draws holding a single
    class are redrawn; after ``MAX_REDRAWS`` consecutive failures the dataset
    is declared degenerate.
    """
    if T < 1:
        raise ValueError("T must be positive")
    if not ds.is_binary:
        raise LabelMismatch(f"costing needs labels -1/+1, got {ds.label_set}")
    c = _check_constant(ds, c)
    y = ds.label_array()
    classifiers = []
    for _ in range(T):
        if exact:
            resampled = ds.with_weights(ds.weights / c)
        else:
            for _attempt in range(MAX_REDRAWS):
                mask = _rejection_mask(ds, c, rng)
                if np.any(mask & (y == -1)) and np.any(mask & (y == 1)):
                    break
            else:
                raise DegenerateDataset(
                    f"{MAX_REDRAWS} consecutive resamples held fewer than two classes")
            resampled = ds.subset(np.flatnonzero(mask), label_set=BINARY_LABELS).uniform()
        classifiers.append(oracle(resampled, ledger))
    return AggregatedClassifier(tuple(classifiers), c)


def costing_classify(agg: AggregatedClassifier, unknown, rng: np.random.Generator, ledger=None) -> int:
    """Majority of ``T`` single-copy predictions; an even split goes to -1."""
    plus = sum(measure(f, unknown, rng, ledger) == 1 for f in agg.classifiers)
    return 1 if 2 * plus > agg.T else -1


# --------------------------------------------------------------------------
# one-against-all
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OneVsAllClassifier:
    """One binary POVM per class; outcome -1 means the class "clicked"."""

    per_class: tuple[tuple[int, Povm], ...]

    def __post_init__(self):
        labels = [c for c, _ in self.per_class]
        if len(set(labels)) != len(labels) or not labels:
            raise ValueError("each class needs exactly one classifier")
        object.__setattr__(self, "per_class", tuple((int(c), p) for c, p in self.per_class))

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.per_class)

    @property
    def k(self) -> int:
        return len(self.per_class)

    def classify(self, unknown, rng: np.random.Generator, ledger=None) -> int:
        return one_vs_all_classify(self, unknown, rng, ledger)

    def click_probabilities(self, states) -> np.ndarray:
        return np.column_stack([_minus_probability(p, states) for _, p in self.per_class])

    def sample_predictions(self, states, rng: np.random.Generator):
        c = self.click_probabilities(states)
        clicks = rng.random(c.shape) < c
        keys = rng.random(c.shape)
        # random pick among clickers, or among all classes when nobody clicked
        any_click = clicks.any(axis=1)
        masked = np.where(clicks | ~any_click[:, None], keys, -1.0)
        pred = np.array(self.labels)[np.argmax(masked, axis=1)]
        return pred, np.full(len(pred), self.k, dtype=int)

    def prediction_probabilities(self, states, label_set=None) -> np.ndarray:
        label_set = self.labels if label_set is None else tuple(label_set)
        col = {c: j for j, c in enumerate(label_set)}
        c = self.click_probabilities(states)
        m, k = c.shape
        none = np.prod(1 - c, axis=1)
        out = np.zeros((m, len(label_set)))
        inv = 1.0 / np.arange(1, k + 1)
        for j, label in enumerate(self.labels):
            others = _poisson_binomial(np.delete(c, j, axis=1))
            out[:, col[label]] = c[:, j] * (others @ inv[: k]) + none / k
        return out


def one_vs_all_train(ds: QuantumDataset, oracle: HelstromOracle, ledger=None) -> OneVsAllClassifier:
    """Train one "class j versus the rest" classifier per class.

    Items of class ``j`` get the label ``1 - 2*[y == j] = -1``.
    """
    if ds.k < 2:
        raise ValueError("one-against-all needs at least two classes")
    per_class = []
    for j in ds.label_set:
        if not ds.class_indices(j).size:
            raise EmptyClass(f"class {j} has no items")
        binary = ds.relabel([1 - 2 * int(y == j) for y in ds.labels], BINARY_LABELS)
        per_class.append((j, oracle(binary, ledger)))
    return OneVsAllClassifier(tuple(per_class))


def one_vs_all_classify(cls: OneVsAllClassifier, unknown, rng: np.random.Generator, ledger=None) -> int:
    clicked = [c for c, povm in cls.per_class if measure(povm, unknown, rng, ledger) == -1]
    pool = clicked if clicked else list(cls.labels)
    return int(pool[rng.integers(len(pool))])


# --------------------------------------------------------------------------
# binary tree
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Leaf:
    label: int


@dataclass(frozen=True, eq=False)
class TreeNode:
    """Internal node: outcome -1 descends to ``left`` (classes ``left_classes``)."""

    povm: Povm
    left: "Union[TreeNode, Leaf]"
    right: "Union[TreeNode, Leaf]"
    left_classes: tuple[int, ...]
    right_classes: tuple[int, ...]


def _depth(node) -> int:
    return 0 if isinstance(node, Leaf) else 1 + max(_depth(node.left), _depth(node.right))


def _internal_nodes(node):
    if isinstance(node, TreeNode):
        yield node
        yield from _internal_nodes(node.left)
        yield from _internal_nodes(node.right)


@dataclass(frozen=True, eq=False)
class TreeClassifier:
    root: Union[TreeNode, Leaf]
    labels: tuple[int, ...]
    split_rule: str = RANDOM_BALANCED

    @property
    def depth(self) -> int:
        return _depth(self.root)

    def internal_nodes(self) -> list[TreeNode]:
        return list(_internal_nodes(self.root))

    def classify(self, unknown, rng: np.random.Generator, ledger=None) -> int:
        return tree_classify(self, unknown, rng, ledger)

    def sample_predictions(self, states, rng: np.random.Generator):
        states = np.asarray(states, dtype=complex)
        m = states.shape[0]
        pred = np.zeros(m, dtype=int)
        copies = np.zeros(m, dtype=int)
        u = rng.random((m, max(1, self.depth)))

        def walk(node, rows, level):
            if isinstance(node, Leaf):
                pred[rows] = node.label
                return
            copies[rows] += 1
            left = u[rows, level] < _minus_probability(node.povm, states[rows])
            walk(node.left, rows[left], level + 1)
            walk(node.right, rows[~left], level + 1)

        walk(self.root, np.arange(m), 0)
        return pred, copies

    def prediction_probabilities(self, states, label_set=None) -> np.ndarray:
        label_set = self.labels if label_set is None else tuple(label_set)
        col = {c: j for j, c in enumerate(label_set)}
        states = np.asarray(states, dtype=complex)
        out = np.zeros((states.shape[0], len(label_set)))

        def walk(node, reach):
            if isinstance(node, Leaf):
                out[:, col[node.label]] += reach
                return
            p_left = _minus_probability(node.povm, states)
            walk(node.left, reach * p_left)
            walk(node.right, reach * (1 - p_left))

        walk(self.root, np.ones(states.shape[0]))
        return out


def _class_blocks(ds: QuantumDataset) -> dict[int, np.ndarray]:
    w = ds.normalized_weights
    blocks = {}
    for c in ds.label_set:
        idx = ds.class_indices(c)
        psi = ds.states[idx]
        blocks[c] = (psi.T * w[idx]) @ psi.conj()
    return blocks


def _split_distance(blocks, left, right) -> float:
    delta = sum(blocks[c] for c in right) - sum(blocks[c] for c in left)
    return trace_norm((delta + delta.conj().T) / 2)


def _max_trace_split(ds: QuantumDataset, classes: tuple[int, ...]):
    """Balanced bipartition maximizing the weighted trace distance."""
    blocks = _class_blocks(ds)
    k = len(classes)
    half = k // 2
    if k <= EXHAUSTIVE_SPLIT_LIMIT:
        best, best_d = None, -1.0
        for left in itertools.combinations(classes, half):
            right = tuple(c for c in classes if c not in left)
            d = _split_distance(blocks, left, right)
            if d > best_d + 1e-12:
                best, best_d = (left, right), d
        return best
    left, right = list(classes[:half]), list(classes[half:])
    current = _split_distance(blocks, left, right)
    improved = True
    while improved:
        improved = False
        for i, j in itertools.product(range(len(left)), range(len(right))):
            left[i], right[j] = right[j], left[i]
            d = _split_distance(blocks, left, right)
            if d > current + 1e-12:
                current, improved = d, True
            else:
                left[i], right[j] = right[j], left[i]
    return tuple(sorted(left)), tuple(sorted(right))


def _random_split(classes: tuple[int, ...], rng: np.random.Generator):
    perm = [classes[i] for i in rng.permutation(len(classes))]
    half = len(classes) // 2
    return tuple(sorted(perm[:half])), tuple(sorted(perm[half:]))


def split_classes(ds: QuantumDataset, classes: tuple[int, ...], split_rule: str,
                  rng: np.random.Generator | None):
    if split_rule == RANDOM_BALANCED:
        if rng is None:
            raise ValueError("random splitting needs a random source")
        return _random_split(classes, rng)
    if split_rule == MAX_TRACE_DISTANCE:
        return _max_trace_split(ds, classes)
    raise InvalidConfig(f"unknown split rule {split_rule!r}")


def tree_train(ds: QuantumDataset, oracle: HelstromOracle, split_rule: str = RANDOM_BALANCED,
               rng: np.random.Generator | None = None, ledger=None) -> TreeClassifier:
    """Grow a balanced classification tree from the root down.

    Every node splits its classes into halves whose sizes differ by at most
    one and calls the oracle once on the items of those classes, so each
    training state pays ``t_bin`` copies per level it descends.
    """
    if split_rule == MAX_TRACE_DISTANCE and ledger is not None and not ledger.classical:
        raise InvalidConfig("the max-trace split needs the classical description of the states")

    def grow(sub: QuantumDataset):
        classes = tuple(c for c in sub.label_set if sub.class_indices(c).size)
        if len(classes) == 1:
            return Leaf(classes[0])
        left, right = split_classes(sub, classes, split_rule, rng)
        povm = oracle(sub.to_binary(left), ledger)
        y = sub.label_array()
        sub_left = sub.subset(np.flatnonzero(np.isin(y, left)), label_set=left)
        sub_right = sub.subset(np.flatnonzero(np.isin(y, right)), label_set=right)
        return TreeNode(povm, grow(sub_left), grow(sub_right), left, right)

    present = tuple(c for c in ds.label_set if ds.class_indices(c).size)
    return TreeClassifier(grow(ds.subset(np.arange(ds.n), label_set=present)), ds.label_set, split_rule)


def tree_classify(tree: TreeClassifier, unknown, rng: np.random.Generator, ledger=None) -> int:
    node = tree.root
    while isinstance(node, TreeNode):
        node = node.left if measure(node.povm, unknown, rng, ledger) == -1 else node.right
    return node.label


def tree_node_datasets(tree: TreeClassifier, ds: QuantumDataset):
    """(node, binary node dataset) pairs in pre-order."""
    y = ds.label_array()
    out = []
    for node in tree.internal_nodes():
        classes = node.left_classes + node.right_classes
        sub = ds.subset(np.flatnonzero(np.isin(y, classes)), label_set=classes)
        out.append((node, sub.to_binary(node.left_classes)))
    return out


# --------------------------------------------------------------------------
# state identification
# --------------------------------------------------------------------------

def index_dataset(ds: QuantumDataset) -> QuantumDataset:
    """One class per item, labelled by its position; rejects duplicate states."""
    g = np.abs(ds.states.conj() @ ds.states.T) ** 2
    np.fill_diagonal(g, 0.0)
    if ds.n > 1 and g.max() > 1 - 1e-12:
        i, j = np.unravel_index(np.argmax(g), g.shape)
        raise DuplicateStates(f"items {min(i, j)} and {max(i, j)} are the same state")
    return ds.relabel(tuple(range(ds.n)), tuple(range(ds.n)))


def identify_state(unknown, ds: QuantumDataset, oracle: HelstromOracle,
                   rng: np.random.Generator, ledger=None, split_rule: str = RANDOM_BALANCED,
                   tree: TreeClassifier | None = None) -> int:
    """Index of ``unknown`` within ``ds`` using ``ceil(log2 n)`` copies.

    A tree trained on :func:`index_dataset` can be passed in to skip
    training.
    """
    if tree is None:
        tree = tree_train(index_dataset(ds), oracle, split_rule, rng, ledger)
    return tree_classify(tree, unknown, rng, ledger)


# --------------------------------------------------------------------------
# bundles
# --------------------------------------------------------------------------

Classifier = Union[Povm, AggregatedClassifier, OneVsAllClassifier, TreeClassifier,
                   IdentificationClassifier]


def _node_to_dict(node) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": node.label}
    return {"povm": node.povm.to_dict(), "left_classes": list(node.left_classes),
            "right_classes": list(node.right_classes),
            "left": _node_to_dict(node.left), "right": _node_to_dict(node.right)}


def _node_from_dict(doc: dict):
    if "leaf" in doc:
        return Leaf(int(doc["leaf"]))
    return TreeNode(Povm.from_dict(doc["povm"]), _node_from_dict(doc["left"]),
                    _node_from_dict(doc["right"]), tuple(doc["left_classes"]),
                    tuple(doc["right_classes"]))


def classifier_to_dict(cls: Classifier, params: dict | None = None) -> dict:
    params = dict(params or {})
    if isinstance(cls, Povm):
        return {"kind": "povm", "params": params, "povm": cls.to_dict()}
    if isinstance(cls, AggregatedClassifier):
        params.update(T=cls.T, c=cls.c)
        return {"kind": "costing", "params": params,
                "classifiers": [p.to_dict() for p in cls.classifiers]}
    if isinstance(cls, OneVsAllClassifier):
        return {"kind": "ova", "params": params,
                "classifiers": [{"class": c, "povm": p.to_dict()} for c, p in cls.per_class]}
    if isinstance(cls, TreeClassifier):
        params.update(split_rule=cls.split_rule)
        return {"kind": "tree", "params": params, "labels": list(cls.labels),
                "root": _node_to_dict(cls.root)}
    if isinstance(cls, IdentificationClassifier):
        params.update(e=cls.e, neighbours=cls.neighbours)
        return {"kind": "identification", "params": params,
                "dataset": dataset_to_dict(cls.dataset)}
    raise TypeError(f"cannot serialize {type(cls).__name__}")


def classifier_from_dict(doc: dict) -> Classifier:
    kind, params = doc["kind"], doc.get("params", {})
    if kind == "povm":
        return Povm.from_dict(doc["povm"])
    if kind == "costing":
        return AggregatedClassifier(tuple(Povm.from_dict(d) for d in doc["classifiers"]),
                                    params.get("c"))
    if kind == "ova":
        return OneVsAllClassifier(tuple((d["class"], Povm.from_dict(d["povm"]))
                                        for d in doc["classifiers"]))
    if kind == "tree":
        return TreeClassifier(_node_from_dict(doc["root"]), tuple(doc["labels"]),
                              params.get("split_rule", RANDOM_BALANCED))
    if kind == "identification":
        return IdentificationClassifier(dataset_from_dict(doc["dataset"]), params["e"],
                                        params.get("neighbours", 1))
    raise ValueError(f"unknown classifier kind {kind!r}")


def save_classifier(cls: Classifier, path, params: dict | None = None) -> None:
    Path(path).write_text(json.dumps(classifier_to_dict(cls, params)) + "\n")


def load_classifier(path) -> Classifier:
    return classifier_from_dict(json.loads(Path(path).read_text()))


def classifier_labels(cls: Classifier) -> Sequence[int]:
    return cls.labels
