"""Exact error formulas, bounds on the pretty good measurement, and their audit.

The audit works at the level of individual states: a dataset of ``n`` pure
states with weights ``w`` is read as an ensemble in which state ``i`` is its
own class with prior ``w_i / sum(w)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch
from .measurement import ensemble_error, pgm
from .numerics import DEFAULT_RANK_TOL, hermitian_eigen, random_unitary, trace_norm
from .states import QuantumDataset, haar_random_state, projector
from .swap_test import EXACT, SimilarityMatrix, similarity_matrix

UPPER = "upper"
LOWER = "lower"
HOLDS_TOL = 1e-9

# interpretation tags
STRICT = "strict"
LITERAL = "literal"
ROW_SUM = "row_sum"
FIDELITY = "fidelity"
WEIGHTED_OVERLAP = "weighted_overlap"
WEIGHTED_EIGEN = "weighted_eigen"
MAX_PRIOR = "max_prior"
PRIOR_SAMPLING = "prior_sampling"
OPTIMAL = "optimal"
SQRT_OPTIMAL = "sqrt_optimal"

CSV_HEADER = ("ensemble_id", "bound_name", "interpretation", "bound_value", "exact_error", "holds")


def _as_density(s) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    return projector(s) if s.ndim == 1 else s


def helstrom_bound(rho_minus, rho_plus, p_minus: float, p_plus: float) -> float:
    """Optimal binary error ``1/2 - Tr|p_- rho_- - p_+ rho_+| / 2``."""
    rm, rp = _as_density(rho_minus), _as_density(rho_plus)
    if rm.shape != rp.shape:
        raise DimensionMismatch(f"mixtures have shapes {rm.shape} and {rp.shape}")
    d = trace_norm(p_minus * rm - p_plus * rp)
    return float(min(0.5, max(0.0, 0.5 - d / 2)))


def pgm_exact_error(states: Sequence, priors) -> float:
    """Exact error of the pretty good measurement; pure states or density matrices."""
    rhos = [_as_density(s) for s in states]
    return ensemble_error(pgm(rhos, priors), rhos, priors)


def _sim_entries(sim) -> np.ndarray:
    if isinstance(sim, SimilarityMatrix):
        return sim.clamped()
    return np.clip(np.asarray(sim, dtype=float), 0.0, 1.0)


def pgm_fidelity_upper_bound(sim, interpretation: str = ROW_SUM) -> float:
    """``1 - (1/n) sum_i 1 / sum_j S(i, j)`` for equiprobable states.

    ``ROW_SUM`` sums row ``i`` of the similarity matrix. ``LITERAL`` sums
    ``Fid(psi_i, psi_i) = 1`` over ``j``, giving ``1 - 1/n``.
    """
    s = _sim_entries(sim)
    n = s.shape[0]
    if interpretation == ROW_SUM:
        rows = s.sum(axis=1)
    elif interpretation == LITERAL:
        rows = np.full(n, float(n))
    else:
        raise ValueError(f"unknown interpretation {interpretation!r}")
    return float(1.0 - np.mean(1.0 / rows))


def weighted_gram(states, priors) -> np.ndarray:
    """``G_ij = sqrt(p_i p_j) <psi_i|psi_j>``."""
    psi = np.asarray(states, dtype=complex)
    r = np.sqrt(np.asarray(priors, dtype=float))
    g = (psi.conj() @ psi.T) * np.outer(r, r)
    return (g + g.conj().T) / 2


def _root_eigenvalues(values: np.ndarray) -> np.ndarray:
    # round-off eigenvalues of a singular matrix would otherwise contribute ~1e-8
    return np.where(values > DEFAULT_RANK_TOL, np.sqrt(np.clip(values, 0.0, None)), 0.0)


def eigenvalue_bound(matrix) -> float:
    """``1 - (1/n) (sum_i sqrt(max(lambda_i, 0)))**2`` for a Hermitian matrix."""
    dec = hermitian_eigen(matrix)
    n = dec.eigenvalues.size
    return float(1.0 - np.sum(_root_eigenvalues(dec.eigenvalues)) ** 2 / n)


def pgm_eigenvalue_upper_bound(sim_or_gram, priors=None, interpretation: str = FIDELITY) -> float:
    """Eigenvalue bound under one of three readings.

    ``FIDELITY``: the formula on the matrix of squared overlaps.
    ``WEIGHTED_OVERLAP``: ``1 - sum_i ((sqrt G)_ii)**2`` on the weighted Gram
    matrix ``G``, which is the PGM error for pure states.
    ``WEIGHTED_EIGEN``: the formula on the spectrum of ``G``; it dominates the
    previous value by Cauchy-Schwarz.
    """
    if interpretation == FIDELITY:
        return eigenvalue_bound(_sim_entries(sim_or_gram))
    g = np.asarray(sim_or_gram, dtype=complex)
    if interpretation == WEIGHTED_OVERLAP:
        dec = hermitian_eigen(g)
        root = (dec.eigenvectors * _root_eigenvalues(dec.eigenvalues)) @ dec.eigenvectors.conj().T
        return float(1.0 - np.sum(np.abs(np.diag(root)) ** 2))
    if interpretation == WEIGHTED_EIGEN:
        return eigenvalue_bound(g)
    raise ValueError(f"unknown interpretation {interpretation!r}")


def pgm_lower_bound(sim, priors, interpretation: str = STRICT) -> float:
    """``sum_i sum_{j>i} p_i p_j S(i, j)``; ``LITERAL`` starts the inner sum at ``j = i``."""
    s = _sim_entries(sim)
    p = np.asarray(priors, dtype=float)
    w = np.outer(p, p) * s
    k = 1 if interpretation == STRICT else 0
    if interpretation not in (STRICT, LITERAL):
        raise ValueError(f"unknown interpretation {interpretation!r}")
    return float(np.sum(np.triu(w, k)))


def guessing_error(priors, interpretation: str = MAX_PRIOR) -> float:
    """Error of guessing without measuring: always the likeliest class, or a class drawn by prior."""
    p = np.asarray(priors, dtype=float)
    if interpretation == MAX_PRIOR:
        return float(1.0 - p.max())
    if interpretation == PRIOR_SAMPLING:
        return float(1.0 - np.sum(p**2))
    raise ValueError(f"unknown interpretation {interpretation!r}")


@dataclass(frozen=True)
class BoundReport:
    ensemble_id: str
    bound_name: str
    interpretation: str
    kind: str
    bound_value: float
    exact_error: float

    @property
    def holds(self) -> bool:
        if self.kind == UPPER:
            return self.exact_error <= self.bound_value + HOLDS_TOL
        return self.exact_error >= self.bound_value - HOLDS_TOL

    def row(self) -> list[str]:
        return [self.ensemble_id, self.bound_name, self.interpretation,
                repr(float(self.bound_value)), repr(float(self.exact_error)),
                "true" if self.holds else "false"]


def audit_bounds(ds: QuantumDataset, e=EXACT, rng: np.random.Generator | None = None,
                 ensemble_id: str = "0") -> list[BoundReport]:
    """Evaluate every bound under every interpretation against the exact PGM error.

    Violations are reported, never corrected. Binary ensembles also get the
    sandwich rows ``eps_opt <= eps_PGM <= sqrt(eps_opt)``.
    """
    p = ds.normalized_weights
    exact = pgm_exact_error(ds.states, p)
    sim = similarity_matrix(ds, e, rng)
    gram = weighted_gram(ds.states, p)

    def rep(name, interp, kind, value):
        return BoundReport(ensemble_id, name, interp, kind, float(value), exact)

    out = [
        rep("pgm_lower_bound", STRICT, LOWER, pgm_lower_bound(sim, p, STRICT)),
        rep("pgm_lower_bound", LITERAL, LOWER, pgm_lower_bound(sim, p, LITERAL)),
        rep("pgm_fidelity_upper_bound", ROW_SUM, UPPER, pgm_fidelity_upper_bound(sim, ROW_SUM)),
        rep("pgm_fidelity_upper_bound", LITERAL, UPPER, pgm_fidelity_upper_bound(sim, LITERAL)),
        rep("pgm_eigenvalue_upper_bound", FIDELITY, UPPER,
            pgm_eigenvalue_upper_bound(sim, p, FIDELITY)),
        rep("pgm_eigenvalue_upper_bound", WEIGHTED_OVERLAP, UPPER,
            pgm_eigenvalue_upper_bound(gram, p, WEIGHTED_OVERLAP)),
        rep("pgm_eigenvalue_upper_bound", WEIGHTED_EIGEN, UPPER,
            pgm_eigenvalue_upper_bound(gram, p, WEIGHTED_EIGEN)),
        rep("guessing_upper_bound", MAX_PRIOR, UPPER, guessing_error(p, MAX_PRIOR)),
        rep("guessing_upper_bound", PRIOR_SAMPLING, UPPER, guessing_error(p, PRIOR_SAMPLING)),
    ]
    if ds.n == 2:
        opt = helstrom_bound(ds.states[0], ds.states[1], p[0], p[1])
        out.append(rep("pgm_sandwich", OPTIMAL, LOWER, opt))
        out.append(rep("pgm_sandwich", SQRT_OPTIMAL, UPPER, np.sqrt(opt)))
    return out


def _ensemble(states, priors=None) -> QuantumDataset:
    n = len(states)
    w = np.full(n, 1.0 / n) if priors is None else np.asarray(priors, dtype=float)
    labels = tuple(range(1, n + 1))
    return QuantumDataset(np.asarray(states, dtype=complex), labels, w, labels, None)


def mutually_unbiased_witness(rng: np.random.Generator | None = None) -> QuantumDataset:
    """Computational and Fourier bases of two qubits, optionally rotated.

    All pairwise fidelities are 0 or 1/4, yet the PGM error is 1/2.
    """
    d = 4
    fourier = np.exp(2j * np.pi * np.outer(np.arange(d), np.arange(d)) / d) / np.sqrt(d)
    states = np.vstack([np.eye(d), fourier.T]).astype(complex)
    if rng is not None:
        states = states @ random_unitary(d, rng).T
    return _ensemble(states)


def build_corpus(rng: np.random.Generator, count: int = 200, max_states: int = 6,
                 max_qubits: int = 3, witness: bool = True) -> list[tuple[str, QuantumDataset]]:
    """Random equiprobable ensembles of 2..max_states Haar states on 1..max_qubits qubits."""
    corpus = []
    for i in range(count):
        n = int(rng.integers(2, max_states + 1))
        q = int(rng.integers(1, max_qubits + 1))
        corpus.append((f"r{i:03d}", _ensemble([haar_random_state(q, rng) for _ in range(n)])))
    if witness:
        corpus.append(("witness", mutually_unbiased_witness(rng)))
    return corpus


def audit_corpus(corpus, e=EXACT, rng: np.random.Generator | None = None) -> list[BoundReport]:
    reports = []
    for eid, ds in corpus:
        reports.extend(audit_bounds(ds, e, rng, eid))
    return reports


def violation_rates(reports: Sequence[BoundReport]) -> dict[tuple[str, str], float]:
    """Fraction of failing rows per (bound_name, interpretation)."""
    tally: dict[tuple[str, str], list[int]] = {}
    for r in reports:
        t = tally.setdefault((r.bound_name, r.interpretation), [0, 0])
        t[0] += not r.holds
        t[1] += 1
    return {key: bad / total for key, (bad, total) in tally.items()}


def write_bound_csv(reports: Sequence[BoundReport], path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in reports:
            w.writerow(r.row())


def read_bound_csv(path) -> list[dict]:
    with open(Path(path), newline="") as fh:
        return list(csv.DictReader(fh))
