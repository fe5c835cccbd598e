import numpy as np
import pytest

from oracles import ZERO_PLUS_ERROR
from qreductions.errors import BudgetExhausted, InvalidRange, LabelMismatch
from qreductions.ledger import CopyLedger, CostReport, error_rate, read_cost_csv, regret, write_cost_csv
from qreductions.measurement import HelstromOracle, Povm, helstrom_weighted, measure, pgm_for_dataset
from qreductions.numerics import make_rng
from qreductions.reductions import costing_train, one_vs_all_train, tree_train
from qreductions.states import QuantumDataset, basis_state, plus_state, random_dataset

ZERO, ONE, PLUS = basis_state(0, 2), basis_state(1, 2), plus_state()


def test_finite_budget_arithmetic():
    led = CopyLedger(2, copies=5)
    led.consume_training(0, 3)
    led.consume_training(0, 2)
    with pytest.raises(BudgetExhausted) as info:
        led.consume_training(0, 1)
    assert info.value.state_index == 0
    led.consume_training(1, 0)
    assert led.training.tolist() == [5, 0]
    assert led.remaining(1) == 5


def test_classical_mode_records_zero():
    led = CopyLedger(3)
    led.consume_training(1, 10**6)
    assert led.classical and led.training_cost == 0 and led.remaining(0) == float("inf")


def test_batch_debit_is_atomic():
    led = CopyLedger(3, copies=4)
    led.consume_training(2, 3)
    with pytest.raises(BudgetExhausted):
        led.consume_training_many([0, 1, 2], 2)
    assert led.training.tolist() == [0, 0, 3]


def test_unknown_copies_counted():
    led = CopyLedger(1)
    povm = Povm(np.array([np.diag([1.0, 0]), np.diag([0, 1.0])]), (-1, 1))
    rng = make_rng(0)
    for _ in range(3):
        measure(povm, ZERO, rng, led)
    assert led.unknown_copies == 3


def test_error_rate_examples():
    ds = QuantumDataset.from_items([(ZERO, -1), (ONE, 1)])
    assert error_rate(helstrom_weighted(ds), ds) == pytest.approx(0, abs=1e-12)
    same = QuantumDataset.from_items([(PLUS, -1), (PLUS, 1)])
    rng = make_rng(1)
    for _ in range(5):
        u = np.linalg.qr(rng.standard_normal((2, 2)))[0]
        e = u @ np.diag(rng.random(2)) @ u.T
        povm = Povm(np.array([np.eye(2) - e, e]), (-1, 1))
        assert error_rate(povm, same) == pytest.approx(0.5, abs=1e-12)
    zp = QuantumDataset.from_items([(ZERO, -1), (PLUS, 1)])
    assert error_rate(helstrom_weighted(zp), zp) == pytest.approx(ZERO_PLUS_ERROR, abs=1e-12)


def test_error_rate_label_mismatch():
    ds = QuantumDataset.from_items([(ZERO, 1), (ONE, 2)])
    povm = Povm(np.array([np.diag([1.0, 0]), np.diag([0, 1.0])]), (-1, 1))
    with pytest.raises(LabelMismatch):
        error_rate(povm, ds)


def test_regret_examples():
    assert regret(0.3, 0.1) == pytest.approx(0.2)
    assert regret(0.1, 0.1 + 5e-10) == 0
    with pytest.raises(InvalidRange):
        regret(0.1, 0.2)
    ds = QuantumDataset.from_items([(ZERO, -1), (PLUS, 1)])
    opt = error_rate(helstrom_weighted(ds), ds)
    assert regret(opt, opt) == 0
    rng = make_rng(2)
    for _ in range(20):
        pair = random_dataset(1, 2, 2, rng)
        assert regret(error_rate(pgm_for_dataset(pair), pair),
                      error_rate(helstrom_weighted(pair), pair)) < 1e-9


def test_cost_csv_round_trip(tmp_path):
    rows = [CostReport("costing", "T*t_bin", 7, "T", 7), CostReport("pgm-bound", "e*(n-1)", 700,
                                                                   "not applicable", None)]
    write_cost_csv(rows, tmp_path / "c.csv")
    text = (tmp_path / "c.csv").read_text().splitlines()
    assert text[0] == ("task,training_cost_symbolic,training_cost_measured,"
                       "classification_cost_symbolic,classification_cost_measured")
    assert text[2].endswith(",NA")
    assert read_cost_csv(tmp_path / "c.csv") == rows
    assert rows[0].scaled(4).training_measured == 28


def test_merge_sums():
    a, b = CopyLedger(2, 10), CopyLedger(2, 10)
    a.consume_training(0, 2)
    b.consume_training(0, 3)
    b.consume_unknown(4)
    m = a.merge(b)
    assert m.training.tolist() == [5, 0] and m.unknown_copies == 4


@pytest.mark.parametrize("reduction", ["costing", "ova", "tree"])
def test_monotone_hierarchy(reduction):
    # a run that completes with s copies completes identically with s+1 and classically
    ds = random_dataset(2, 2 if reduction == "costing" else 4, 8, make_rng(3), weights="random")
    oracle = HelstromOracle("v2", 2)
    need = {"costing": 5 * 2, "ova": 4 * 2, "tree": 2 * 2}[reduction]

    def train(copies):
        led = CopyLedger(ds.n, copies)
        rng = make_rng(9)
        if reduction == "costing":
            cls = costing_train(ds, 5, oracle, rng, led)
            return [p.elements for p in cls.classifiers]
        if reduction == "ova":
            return [p.elements for _, p in one_vs_all_train(ds, oracle, led).per_class]
        return [n.povm.elements for n in tree_train(ds, oracle, "random", rng, led).internal_nodes()]

    base = train(need)
    for other in (train(need + 1), train(None)):
        assert all(np.array_equal(a, b) for a, b in zip(base, other))
    with pytest.raises(BudgetExhausted):
        train(need - 1)
