"""Independent reference computations used to check the package.

Nothing here imports the code under test beyond plain data helpers.
"""

import itertools
import math

import numpy as np
from scipy.linalg import sqrtm

# analytic values
ZERO_PLUS_ERROR = 0.5 - math.sqrt(2) / 4  # Helstrom error for |0>, |+> at equal priors
TRINE_PGM_ERROR = 1.0 / 3.0


def ket(*amps):
    v = np.array(amps, dtype=complex)
    return v / np.linalg.norm(v)


def dm(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def haar_states(rng, n, dim):
    z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def random_two_outcome_povms(rng, dim, count):
    """``count`` random effects ``E = U diag(u) U^dagger`` with ``u`` in [0, 1]."""
    z = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    q = q * (d / np.abs(d))[:, None, :]
    u = rng.random((count, dim))
    # project a fraction of effects to extreme points so the oracle also probes projectors
    u[: count // 2] = np.round(u[: count // 2])
    return np.einsum("cij,cj,ckj->cik", q, u, q.conj())


def binary_errors(effects, rho_minus, rho_plus, p_minus, p_plus):
    """Error of each POVM {I - E, E} where E answers +1."""
    delta = p_minus * rho_minus - p_plus * rho_plus
    return p_plus + np.einsum("cij,ji->c", effects, delta).real


def weighted_binary_errors(effects, states, labels, weights):
    """Weighted error sum_i w_i P(wrong | psi_i) / sum w for each effect E (answers +1)."""
    w = np.asarray(weights, float) / np.sum(weights)
    p_plus = np.einsum("mi,cij,mj->cm", states.conj(), effects, states).real
    y = np.asarray(labels)
    wrong = np.where(y == 1, 1 - p_plus, p_plus)
    return wrong @ w


def majority_tail(p_wrong, copies):
    """P(majority of an odd number of i.i.d. votes is wrong)."""
    return sum(math.comb(copies, j) * p_wrong**j * (1 - p_wrong) ** (copies - j)
               for j in range(copies // 2 + 1, copies + 1))


def poisson_binomial_enumerated(p):
    """Distribution of a sum of independent Bernoullis by full enumeration."""
    t = len(p)
    out = np.zeros(t + 1)
    for bits in itertools.product((0, 1), repeat=t):
        out[sum(bits)] += np.prod([pi if b else 1 - pi for pi, b in zip(p, bits)])
    return out


def ova_distribution_enumerated(clicks):
    """Output distribution of the click rule by enumerating every click pattern."""
    k = len(clicks)
    out = np.zeros(k)
    for bits in itertools.product((0, 1), repeat=k):
        prob = np.prod([c if b else 1 - c for c, b in zip(clicks, bits)])
        pool = [j for j in range(k) if bits[j]] or list(range(k))
        for j in pool:
            out[j] += prob / len(pool)
    return out


def swap_test_statevector(a, b):
    """P(ancilla = 1) from a tensor-network simulation of H, C-SWAP, H."""
    a, b = np.asarray(a, complex), np.asarray(b, complex)
    psi = np.zeros((2, a.size, b.size), complex)
    psi[0] = np.outer(a, b)
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    psi = np.tensordot(h, psi, axes=(1, 0))
    psi[1] = psi[1].T
    psi = np.tensordot(h, psi, axes=(1, 0))
    return float(np.sum(np.abs(psi[1]) ** 2))


def pgm_error_pure(states, priors):
    """PGM error for pure states: 1 - sum_i ((sqrt G)_ii)**2 with G the weighted Gram matrix."""
    s = np.asarray(states, complex)
    r = np.sqrt(np.asarray(priors, float))
    g = (s.conj() @ s.T) * np.outer(r, r)
    root = sqrtm(g)
    return float(1 - np.sum(np.abs(np.diag(root)) ** 2))


def pgm_error_direct(rhos, priors):
    """PGM error from scipy matrix functions on the full-rank mixture."""
    rho = sum(p * r for p, r in zip(priors, rhos))
    inv = np.linalg.inv(sqrtm(rho))
    succ = sum(p * np.trace(inv @ (p * r) @ inv @ r).real for p, r in zip(priors, rhos))
    return 1 - succ


def trace_distance_eigs(a):
    return float(np.sum(np.abs(np.linalg.eigvals(a).real)))


def mub_witness_states():
    d = 4
    f = np.array([[np.exp(2j * np.pi * j * k / d) for k in range(d)] for j in range(d)]) / 2
    return np.vstack([np.eye(d), f])
