import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dm
from qreductions.errors import (
    AllZeroWeights,
    DimensionMismatch,
    EmptyClass,
    InvalidState,
    LabelMismatch,
)
from qreductions.measurement import pgm
from qreductions.numerics import make_rng, random_psd
from qreductions.states import (
    QuantumDataset,
    basis_state,
    class_mixture,
    class_mixtures,
    entangled_vs_separable,
    entanglement_entropy,
    euclidean_distance,
    fidelity,
    fidelity_matrix,
    haar_random_state,
    load_dataset,
    orthogonal_dataset,
    plus_state,
    random_dataset,
    save_dataset,
)

ZERO, ONE, PLUS = basis_state(0, 2), basis_state(1, 2), plus_state()


def test_fidelity_examples():
    assert fidelity(ZERO, ZERO) == pytest.approx(1)
    assert fidelity(ZERO, ONE) == 0
    assert fidelity(ZERO, PLUS) == pytest.approx(0.5)
    with pytest.raises(DimensionMismatch):
        fidelity(ZERO, basis_state(0, 4))


@given(st.integers(0, 2**32 - 1), st.floats(0, 2 * np.pi))
def test_fidelity_symmetry_and_phase(seed, theta):
    rng = make_rng(seed)
    a, b = haar_random_state(2, rng), haar_random_state(2, rng)
    assert fidelity(a, b) == fidelity(b, a)
    assert fidelity(a, np.exp(1j * theta) * b) == pytest.approx(fidelity(a, b), abs=1e-12)


def test_euclidean_examples():
    assert euclidean_distance(ZERO, ZERO) == 0
    assert euclidean_distance(ZERO, -ZERO) == pytest.approx(2)
    assert euclidean_distance(ZERO, ONE) == pytest.approx(np.sqrt(2))


def test_total_variation_within_four_times_distance():
    # 100 random (pair, POVM) instances with the second state a small perturbation
    rng = make_rng(21)
    for _ in range(100):
        q = int(rng.integers(1, 4))
        a = haar_random_state(q, rng)
        eps = rng.uniform(0.001, 0.3)
        b = a + eps * haar_random_state(q, rng)
        b /= np.linalg.norm(b)
        dist = euclidean_distance(a, b)
        rhos = [random_psd(2**q, rng) for _ in range(3)]
        rhos = [r / np.trace(r).real for r in rhos]
        povm = pgm(rhos, [0.2, 0.3, 0.5])
        tvd = 0.5 * np.abs(povm.probabilities(a) - povm.probabilities(b)).sum()
        assert tvd <= 4 * dist + 1e-12


def test_class_mixture_examples():
    ds = QuantumDataset.from_items([(ZERO, -1), (ONE, 1)])
    rho, p = class_mixture(ds, -1)
    np.testing.assert_allclose(rho, dm(ZERO), atol=1e-12)
    assert p == pytest.approx(0.5)

    ds = QuantumDataset.from_items([(ZERO, -1), (PLUS, -1)], label_set=(-1, 1))
    rho, p = class_mixture(ds, -1)
    np.testing.assert_allclose(rho, [[0.75, 0.25], [0.25, 0.25]], atol=1e-12)
    assert p == pytest.approx(1)
    with pytest.raises(EmptyClass):
        class_mixture(ds, 1)

    ds = QuantumDataset.from_items([(ZERO, -1, 3.0), (PLUS, -1, 1.0)])
    rho, _ = class_mixture(ds, -1)
    np.testing.assert_allclose(rho, 0.75 * dm(ZERO) + 0.25 * dm(PLUS), atol=1e-12)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_class_mixtures_are_density_matrices(seed, k):
    rng = make_rng(seed)
    ds = random_dataset(2, k, 2 * k + 1, rng, weights="random")
    rhos, priors = class_mixtures(ds)
    assert priors.sum() == pytest.approx(1, abs=1e-9)
    for rho in rhos:
        assert np.abs(rho - rho.conj().T).max() <= 1e-9
        assert np.trace(rho).real == pytest.approx(1, abs=1e-9)
        assert np.linalg.eigvalsh(rho)[0] >= -1e-9


def test_haar_examples():
    rng = make_rng(4)
    assert np.linalg.norm(haar_random_state(3, rng)) == pytest.approx(1, abs=1e-9)
    amp0 = [abs(haar_random_state(1, rng)[0]) ** 2 for _ in range(10_000)]
    assert np.mean(amp0) == pytest.approx(0.5, abs=0.02)
    assert np.array_equal(haar_random_state(2, make_rng(9)), haar_random_state(2, make_rng(9)))
    with pytest.raises(ValueError):
        haar_random_state(11, rng)


def test_dataset_validation():
    with pytest.raises(InvalidState):
        QuantumDataset(np.array([[1.0, 1.0]]), (1,), [1.0], (1,))
    with pytest.raises(LabelMismatch):
        QuantumDataset(np.array([[1.0, 0.0]]), (3,), [1.0], (1, 2))
    with pytest.raises(ValueError):
        QuantumDataset(np.array([[1.0, 0.0]]), (1,), [-1.0], (1,))
    ds = QuantumDataset.from_items([(ZERO, -1, 0.0), (ONE, 1, 0.0)])
    with pytest.raises(AllZeroWeights):
        ds.normalized_weights


def test_dataset_flags_and_views():
    ds = QuantumDataset.from_items([(ZERO, -1), (ONE, 1), (PLUS, 1)])
    assert ds.is_standard and ds.is_binary and ds.is_classical
    assert ds.n == 3 and ds.dim == 2 and ds.qubits == 1
    assert not ds.with_weights([1, 2, 3]).is_standard
    sub = ds.subset([2, 0])
    assert sub.indices == (2, 0) and sub.labels == (1, -1)
    np.testing.assert_allclose(ds.class_priors(), [1 / 3, 2 / 3])
    with pytest.raises(ValueError):
        ds.states[0, 0] = 0


def test_caller_arrays_are_not_frozen():
    states = np.array([ZERO, ONE])
    QuantumDataset(states, (-1, 1), np.ones(2), (-1, 1))
    states[0, 0] = 1.0  # still writable


def test_generators():
    rng = make_rng(1)
    ds = random_dataset(2, 3, 7, rng)
    assert ds.label_set == (1, 2, 3) and ds.n == 7
    assert random_dataset(1, 2, 4, rng).label_set == (-1, 1)
    orth = orthogonal_dataset(3, 8)
    np.testing.assert_allclose(fidelity_matrix(orth.states), np.eye(8), atol=1e-12)
    ev = entangled_vs_separable(20, make_rng(2))
    ent = [entanglement_entropy(s) for s in ev.states]
    y = ev.label_array()
    assert np.sum(y == 1) == 10 and np.sum(y == -1) == 10
    assert all(e > 0.1 for e, c in zip(ent, y) if c == 1)
    assert all(e < 1e-9 for e, c in zip(ent, y) if c == -1)


def test_json_round_trip(tmp_path):
    ds = random_dataset(2, 3, 6, make_rng(3), weights="random", declared_copies=40)
    path = tmp_path / "d.json"
    save_dataset(ds, path)
    back = load_dataset(path)
    np.testing.assert_array_equal(back.states, ds.states)
    np.testing.assert_array_equal(back.weights, ds.weights)
    assert back.labels == ds.labels and back.label_set == ds.label_set
    assert back.declared_copies == 40


def test_loader_renormalizes_within_tolerance(tmp_path):
    doc = {"qubits": 1, "labels": [-1, 1], "declared_copies": "classical",
           "items": [{"label": -1, "weight": 1, "amplitudes": [[1 + 5e-7, 0], [0, 0]]},
                     {"label": 1, "weight": 1, "amplitudes": [["0", "0"], ["1", "0"]]}]}
    path = tmp_path / "d.json"
    path.write_text(json.dumps(doc))
    ds = load_dataset(path)
    assert np.linalg.norm(ds.states[0]) == pytest.approx(1, abs=1e-15)
    assert ds.is_classical
    doc["items"][0]["amplitudes"] = [[1.01, 0], [0, 0]]
    path.write_text(json.dumps(doc))
    with pytest.raises(InvalidState):
        load_dataset(path)
    doc["items"][0]["amplitudes"] = [[1, 0], [0, 0], [0, 0]]
    path.write_text(json.dumps(doc))
    with pytest.raises(DimensionMismatch):
        load_dataset(path)

