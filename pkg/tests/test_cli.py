import csv
import json

import numpy as np
import pytest

from qreductions.cli import main
from qreductions.states import QuantumDataset, basis_state, entanglement_entropy, load_dataset, plus_state, save_dataset

from oracles import ZERO_PLUS_ERROR


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_generate_schema_and_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["generate", "--seed", "5", "--qubits", "1", "--classes", "2", "--states", "2"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["qubits"] == 1 and len(doc["items"]) == 2
    assert {"label", "weight", "amplitudes"} <= set(doc["items"][0])
    assert load_dataset(a).n == 2


def test_generate_entangled_preset(tmp_path):
    out = tmp_path / "ev.json"
    assert main(["generate", "--seed", "1", "--preset", "entangled-vs-separable", "--states", "20",
                 "--out", str(out)]) == 0
    ds = load_dataset(out)
    ent = np.array([entanglement_entropy(s) for s in ds.states])
    y = ds.label_array()
    assert np.sum(ent[y == 1] > 0.1) == 10 and np.all(ent[y == -1] < 1e-9)


def test_run_zero_plus(tmp_path):
    data = tmp_path / "zp.json"
    save_dataset(QuantumDataset.from_items([(basis_state(0, 2), -1), (plus_state(), 1)]), data)
    out = tmp_path / "run"
    assert main(["run", "--seed", "3", "--dataset", str(data), "--trials", "100000", "--out", str(out)]) == 0
    res = json.loads((out / "results.json").read_text())
    assert abs(res["empirical_error"] - ZERO_PLUS_ERROR) <= 0.005
    assert res["exact_error"] == pytest.approx(ZERO_PLUS_ERROR, abs=1e-12)
    assert res["regret"] == 0
    assert len(read_rows(out / "trials.csv")) == 100_000
    assert (out / "convergence.png").stat().st_size > 0


def test_run_tree_on_orthogonal(tmp_path):
    out = tmp_path / "tree"
    assert main(["run", "--seed", "0", "--preset", "orthogonal", "--qubits", "3", "--classes", "8",
                 "--states", "8", "--reduction", "tree", "--trials", "2000", "--out", str(out)]) == 0
    res = json.loads((out / "results.json").read_text())
    assert res["empirical_error"] == 0 and res["exact_error"] == pytest.approx(0, abs=1e-12)
    cost = read_rows(out / "cost.csv")[0]
    assert cost["classification_cost_measured"] == "3"


@pytest.mark.parametrize("reduction", ["weighted-helstrom", "costing", "ova", "identify", "pgm", "state-index"])
def test_run_every_reduction(reduction, tmp_path):
    classes = "2" if reduction in ("weighted-helstrom", "costing") else "3"
    out = tmp_path / reduction
    assert main(["run", "--seed", "1", "--classes", classes, "--states", "6", "--weights", "random",
                 "--reduction", reduction, "--T", "5", "--e", "50", "--trials", "500",
                 "--out", str(out)]) == 0
    res = json.loads((out / "results.json").read_text())
    assert 0 <= res["empirical_error"] <= 1
    assert {"trials.csv", "cost.csv", "results.json", "convergence.png"} <= {p.name for p in out.iterdir()}


def test_run_is_byte_identical(tmp_path):
    args = ["run", "--seed", "9", "--classes", "4", "--qubits", "2", "--reduction", "ova", "--trials", "3000"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("trials.csv", "cost.csv", "results.json", "convergence.png"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "x")
    assert main(["run", "--seed", "0", "--classes", "3", "--reduction", "costing", "--out", out]) == 2
    assert main(["run", "--seed", "0", "--trials", "0", "--out", out]) == 2
    assert main(["run", "--seed", "0", "--dataset", str(tmp_path / "missing.json"), "--out", out]) == 2
    assert main(["run", "--seed", "0", "--copies", "3", "--reduction", "pgm", "--out", out]) == 2
    assert main(["run", "--seed", "0", "--copies", "3", "--oracle", "v2", "--reduction", "costing",
                 "--T", "7", "--out", out]) == 3
    assert "training state" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        main(["run", "--out", out])  # seed is mandatory
    assert info.value.code == 2


def test_cost_table(tmp_path):
    out = tmp_path / "cost.csv"
    assert main(["cost-table", "--seed", "0", "--t-bin", "1", "--e", "100", "--states", "8", "--out", str(out)]) == 0
    rows = {r["task"]: r for r in read_rows(out)}
    assert len(rows) == 8
    assert (rows["costing"]["training_cost_measured"], rows["costing"]["classification_cost_measured"]) == ("7", "7")
    assert (rows["one-vs-all"]["training_cost_measured"], rows["one-vs-all"]["classification_cost_measured"]) == ("8", "8")
    assert (rows["tree"]["training_cost_measured"], rows["tree"]["classification_cost_measured"]) == ("3", "3")
    assert rows["pgm-bound"]["training_cost_measured"] == str(100 * 7)
    assert rows["pgm-bound"]["classification_cost_measured"] == "NA"
    assert rows["identification"]["classification_cost_measured"] == str(100 * 8)
    glob = tmp_path / "global.csv"
    assert main(["cost-table", "--seed", "0", "--states", "8", "--e", "100", "--global", "--out", str(glob)]) == 0
    assert {r["task"]: r for r in read_rows(glob)}["tree"]["training_cost_measured"] == "24"


def test_audit(tmp_path):
    out = tmp_path / "audit"
    assert main(["audit", "--seed", "0", "--count", "30", "--out", str(out)]) == 0
    rows = read_rows(out / "bounds.csv")
    per = {}
    for r in rows:
        per.setdefault(r["ensemble_id"], []).append(r)
    assert len(per) == 31
    assert all(len(v) in (9, 11) for v in per.values())
    for r in rows:
        if (r["bound_name"], r["interpretation"]) in {("pgm_lower_bound", "strict"),
                                                      ("pgm_fidelity_upper_bound", "row_sum")}:
            assert r["holds"] == "true"
        if r["bound_name"] == "pgm_sandwich":
            assert r["holds"] == "true"
    rates = {(r["bound_name"], r["interpretation"]): float(r["violation_rate"]) for r in read_rows(out / "violations.csv")}
    assert rates[("pgm_eigenvalue_upper_bound", "fidelity")] == 1.0
    assert (out / "bounds.png").stat().st_size > 0
