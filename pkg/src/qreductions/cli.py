"""Command line runner: ``generate``, ``run``, ``cost-table`` and ``audit``.

Exit codes: 0 success, 2 configuration error, 3 copy budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path


from . import bounds, plotting
from .errors import BudgetExhausted, InvalidConfig, QReductionsError
from .evaluate import evaluate
from .ledger import CopyLedger, CostReport, error_rate, regret, write_cost_csv
from .measurement import HelstromOracle, helstrom_weighted, pgm_for_dataset
from .numerics import make_rng
from .reductions import (
    MAX_TRACE_DISTANCE,
    RANDOM_BALANCED,
    classifier_to_dict,
    costing_train,
    index_dataset,
    one_vs_all_train,
    tree_train,
)
from .states import (
    QuantumDataset,
    entangled_vs_separable,
    load_dataset,
    orthogonal_dataset,
    random_dataset,
    save_dataset,
)
from .swap_test import EXACT, IdentificationClassifier, similarity_matrix

REDUCTIONS = ("binary", "weighted-helstrom", "costing", "ova", "tree", "identify", "pgm",
              "state-index")
SPLITS = {"random": RANDOM_BALANCED, "max-trace": MAX_TRACE_DISTANCE}
PRESETS = ("haar", "orthogonal", "entangled-vs-separable")

# seed substreams
DATA_STREAM = 0
TRAIN_STREAM = 2
UNKNOWN_STREAM = 3
AUDIT_STREAM = 4

EXIT_CONFIG = 2
EXIT_BUDGET = 3


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    dataset: str | None
    preset: str
    qubits: int
    classes: int
    states: int
    weights: str
    copies: int | None
    reduction: str
    oracle: str
    t_bin: int
    T: int
    c: float | None
    e: int | str
    neighbours: int
    split: str
    trials: int
    exact_resample: bool
    perturbation: float = 0.0

    @classmethod
    def from_args(cls, args) -> "ExperimentConfig":
        fields = cls.__dataclass_fields__
        cfg = cls(**{k: getattr(args, k, None) for k in fields})
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.t_bin < 1 or self.T < 1 or self.trials < 1 or self.neighbours < 1:
            raise InvalidConfig("--t-bin, --T, --trials and --neighbours must be positive")
        if self.e != EXACT and int(self.e) < 1:
            raise InvalidConfig("--e must be a positive integer or 'exact'")
        if self.copies is not None and self.copies < 0:
            raise InvalidConfig("--copies must be non-negative")
        if self.perturbation < 0:
            raise InvalidConfig("--perturbation must be non-negative")


def _repetitions(text: str):
    if text == EXACT:
        return EXACT
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'exact', got {text!r}")


def generate_dataset(cfg) -> QuantumDataset:
    rng = make_rng(cfg.seed, DATA_STREAM)
    try:
        if cfg.preset == "haar":
            return random_dataset(cfg.qubits, cfg.classes, cfg.states, rng, cfg.weights, cfg.copies)
        if cfg.preset == "orthogonal":
            return orthogonal_dataset(cfg.qubits, cfg.classes, cfg.states, None, cfg.copies)
        if cfg.preset == "entangled-vs-separable":
            return entangled_vs_separable(cfg.states, rng, declared_copies=cfg.copies)
    except ValueError as exc:
        raise InvalidConfig(str(exc)) from exc
    raise InvalidConfig(f"unknown preset {cfg.preset!r}")


def _dataset(cfg) -> QuantumDataset:
    if cfg.dataset:
        try:
            return load_dataset(cfg.dataset)
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot read dataset {cfg.dataset}: {exc}") from exc
    return generate_dataset(cfg)


def _binary_view(ds: QuantumDataset) -> QuantumDataset:
    if not ds.is_binary:
        raise InvalidConfig(f"reduction needs a -1/+1 dataset, got labels {list(ds.label_set)}")
    return ds


def train(cfg, ds: QuantumDataset, ledger: CopyLedger):
    """Train the configured pipeline; returns (classifier, dataset it is scored on, cost row)."""
    oracle = HelstromOracle(cfg.oracle, cfg.t_bin)
    rng = make_rng(cfg.seed, TRAIN_STREAM)
    split = SPLITS[cfg.split]
    r = cfg.reduction
    if r == "binary":
        ds = _binary_view(ds).uniform()
        return oracle(ds, ledger), ds, ("t_bin", "1")
    if r == "weighted-helstrom":
        return oracle(_binary_view(ds), ledger), ds, ("t_bin", "1")
    if r == "costing":
        agg = costing_train(_binary_view(ds), cfg.T, oracle, rng, ledger, cfg.c, cfg.exact_resample)
        return agg, ds, ("T*t_bin", "T")
    if r == "ova":
        return one_vs_all_train(ds, oracle, ledger), ds, ("k*t_bin", "k")
    if r == "tree":
        return tree_train(ds, oracle, split, rng, ledger), ds, ("t_bin*ceil(log2 k)", "ceil(log2 k)")
    if r == "state-index":
        ids = index_dataset(ds)
        return tree_train(ids, oracle, split, rng, ledger), ids, ("t_bin*ceil(log2 n)", "ceil(log2 n)")
    if r == "identify":
        return IdentificationClassifier(ds, cfg.e, cfg.neighbours), ds, ("e", "e*n")
    if r == "pgm":
        if not ledger.classical:
            raise InvalidConfig("the PGM is built from classical descriptions only")
        return pgm_for_dataset(ds), ds, ("unknown", "1")
    raise InvalidConfig(f"unknown reduction {r!r}")


def cmd_generate(args) -> str:
    cfg = ExperimentConfig.from_args(args)
    ds = generate_dataset(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, out)
    return f"generated {cfg.preset} dataset n={ds.n} k={ds.k} qubits={ds.qubits} -> {out}"


def _identification_training(ledger: CopyLedger, ds, e) -> None:
    # every classification spends e copies of each training state on its C-SWAP tests
    if e != EXACT:
        ledger.consume_training_many(ds.indices, int(e))


def cmd_run(args) -> str:
    cfg = ExperimentConfig.from_args(args)
    ds = _dataset(cfg)
    ledger = CopyLedger.for_dataset(ds)
    cls, scored, (train_sym, cls_sym) = train(cfg, ds, ledger)
    exact_ok = not (cfg.reduction == "identify" and cfg.neighbours > 1)
    ev = evaluate(cls, scored, cfg.trials, cfg.seed, exact=exact_ok, perturbation=cfg.perturbation)
    if cfg.reduction == "identify":
        _identification_training(ledger, ds, cfg.e)
    cost = CostReport(cfg.reduction, train_sym, ledger.training_cost, cls_sym, int(ev.copies.max()))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trials.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("trial", "item", "label", "prediction", "copies"))
        for t, row in enumerate(zip(ev.items, ev.truth, ev.predictions, ev.copies)):
            w.writerow((t, *(int(v) for v in row)))
    write_cost_csv([cost], out / "cost.csv")

    # regret against the optimal single-copy measurement; classifiers spending
    # more unknown copies can beat it, so none is reported for them
    optimal = None
    if scored.is_binary and ev.exact_error is not None and int(ev.copies.max()) == 1:
        optimal = error_rate(helstrom_weighted(scored), scored)
    results = {
        "config": asdict(cfg),
        "ledger_mode": ledger.mode,
        "n": ds.n,
        "k": ds.k,
        "trials": ev.trials,
        "empirical_error": ev.error,
        "standard_error": ev.standard_error,
        "exact_error": ev.exact_error,
        "regret": None if optimal is None else regret(ev.exact_error, optimal),
        "cost": dict(zip(("task", "training_cost_symbolic", "training_cost_measured",
                          "classification_cost_symbolic", "classification_cost_measured"),
                         cost.row())),
        "unknown_copies_total": int(ev.copies.sum()),
        "classifier": classifier_to_dict(cls),
        "outcomes": {"item": ev.items.tolist(), "prediction": ev.predictions.tolist()},
    }
    (out / "results.json").write_text(json.dumps(results, indent=1) + "\n")
    plotting.plot_convergence(ev, out / "convergence.png", f"{cfg.reduction}, n={ds.n}, k={ds.k}")
    exact = "NA" if ev.exact_error is None else f"{ev.exact_error:.6f}"
    return (f"{cfg.reduction}: error {ev.error:.4f} +/- {ev.standard_error:.4f} "
            f"(exact {exact}) over {ev.trials} trials; training {ledger.training_cost}, "
            f"classification {cost.classification_measured} copies -> {out}")


def cost_table(cfg, k: int, n: int) -> list[CostReport]:
    """Measure every row of the cost table on desk-scale datasets under oracle V2."""
    rng = make_rng(cfg.seed, DATA_STREAM)
    binary = random_dataset(cfg.qubits, 2, max(n, 2), rng, "random")
    multi = random_dataset(cfg.qubits, k, max(n, k), rng)
    unknown = binary.states[0]
    budget = 10**9
    oracle = HelstromOracle("v2", cfg.t_bin)
    e = cfg.e if cfg.e != EXACT else 100
    rows = []

    def measured(task, ds, build, t_sym, c_sym):
        train_led = CopyLedger(ds.n, budget)
        cls = build(ds, train_led, make_rng(cfg.seed, TRAIN_STREAM))
        cls_led = CopyLedger(ds.n, budget)
        if cls is not None:
            cls.classify(ds.states[0], make_rng(cfg.seed, UNKNOWN_STREAM), cls_led)
        rows.append(CostReport(task, t_sym, train_led.training_cost, c_sym,
                               None if cls is None else cls_led.unknown_copies))
        return train_led, cls_led

    measured("binary", binary.uniform(), lambda d, l, r: oracle(d, l),
             "t_bin", "1")
    measured("weighted", binary, lambda d, l, r: oracle(d, l), "t_bin", "1")
    measured("costing", binary, lambda d, l, r: costing_train(d, cfg.T, oracle, r, l, cfg.c),
             "T*t_bin", "T")

    # identification spends training copies at classification time
    led = CopyLedger(binary.n, budget)
    ident = IdentificationClassifier(binary, e)
    ident.classify(unknown, make_rng(cfg.seed, UNKNOWN_STREAM), led)
    rows.append(CostReport("identification", "e", led.training_cost,
                           "e*n", led.unknown_copies))

    measured("one-vs-all", multi, lambda d, l, r: one_vs_all_train(d, oracle, l),
             "k*t_bin", "k")
    measured("tree", multi, lambda d, l, r: tree_train(d, oracle, RANDOM_BALANCED, r, l),
             "t_bin*ceil(log2 k)", "ceil(log2 k)")
    rows.append(CostReport("pgm", "unknown", None, "1", 1))
    led = CopyLedger(multi.n, budget)
    similarity_matrix(multi, e, make_rng(cfg.seed, TRAIN_STREAM), led)
    rows.append(CostReport("pgm-bound", "e*(n-1)", led.training_cost,
                           "not applicable", None))
    return rows


def cmd_cost_table(args) -> str:
    cfg = ExperimentConfig.from_args(args)
    rows = cost_table(cfg, cfg.classes, cfg.states)
    if args.global_view:
        rows = [r.scaled(cfg.states) for r in rows]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_cost_csv(rows, out)
    return f"cost table with {len(rows)} rows -> {out}"


def cmd_audit(args) -> str:
    rng = make_rng(args.seed, AUDIT_STREAM)
    if args.dataset:
        corpus = [("0", load_dataset(args.dataset))]
    else:
        corpus = bounds.build_corpus(rng, args.count)
    reports = bounds.audit_corpus(corpus, args.e, rng)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bounds.write_bound_csv(reports, out / "bounds.csv")
    rates = bounds.violation_rates(reports)
    with open(out / "violations.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("bound_name", "interpretation", "violation_rate"))
        for (name, interp), rate in sorted(rates.items()):
            w.writerow((name, interp, repr(rate)))
    plotting.plot_bounds(reports, out / "bounds.png")
    fid = rates.get(("pgm_eigenvalue_upper_bound", bounds.FIDELITY), float("nan"))
    return (f"audited {len(corpus)} ensembles, {len(reports)} rows; "
            f"fidelity eigenvalue bound violated in {fid:.1%} -> {out}")


def _add_common(p, trials=True):
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dataset", help="dataset JSON; otherwise one is generated")
    p.add_argument("--preset", choices=PRESETS, default="haar")
    p.add_argument("--qubits", type=int, default=1)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--states", type=int, default=8)
    p.add_argument("--weights", choices=("uniform", "random"), default="uniform")
    p.add_argument("--copies", type=int, default=None, help="copies per state; default classical")
    p.add_argument("--reduction", choices=REDUCTIONS, default="binary")
    p.add_argument("--oracle", choices=("v1", "v2"), default="v1")
    p.add_argument("--t-bin", dest="t_bin", type=int, default=1)
    p.add_argument("--T", dest="T", type=int, default=31)
    p.add_argument("--c", dest="c", type=float, default=None)
    p.add_argument("--e", dest="e", type=_repetitions, default=1000)
    p.add_argument("--neighbours", type=int, default=1)
    p.add_argument("--split", choices=tuple(SPLITS), default="random")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--exact-resample", dest="exact_resample", action="store_true")
    p.add_argument("--perturbation", type=float, default=0.0,
                   help="exploratory: classify held-out states at this distance from the data")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qreductions", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a dataset JSON")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="train a reduction and evaluate it")
    _add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("cost-table", help="measure training and classification costs")
    _add_common(p)
    p.add_argument("--global", dest="global_view", action="store_true",
                   help="report total training copies (times n)")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=cmd_cost_table, classes=8, T=7)

    p = sub.add_parser("audit", help="audit the PGM error bounds")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dataset")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--e", dest="e", type=_repetitions, default=EXACT)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        print(args.func(args))
    except BudgetExhausted as exc:
        print(f"error: copy budget exhausted at training state {exc.state_index}: {exc}",
              file=sys.stderr)
        return EXIT_BUDGET
    except (QReductionsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
