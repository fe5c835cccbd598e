"""Dense complex linear algebra used throughout the package.

All functions take and return plain ``numpy`` arrays. Random sources are
``numpy.random.Generator`` instances built from a PCG64 bit generator so that
a (seed, substream) pair always reproduces the same draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotPsd

HERMITIAN_TOL = 1e-9
PSD_CLAMP_TOL = 1e-9
PSD_REJECT_TOL = 1e-6
DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _square_hermitian(a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > HERMITIAN_TOL:
        raise NotHermitian(f"matrix deviates from Hermitian by {dev:.3g}")
    return (m + m.conj().T) / 2


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(a)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T)) <= tol


def hermitian_eigen(a) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    m = _square_hermitian(a)
    w, v = np.linalg.eigh(m)
    return EigenDecomposition(w, v)


def trace_norm(a) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    w = np.linalg.eigvalsh(_square_hermitian(a))
    return float(np.sum(np.abs(w)))


def _psd_eigen(a) -> EigenDecomposition:
    dec = hermitian_eigen(a)
    w = dec.eigenvalues
    if w.size and w[0] < -PSD_REJECT_TOL:
        raise NotPsd(f"minimum eigenvalue {w[0]:.3g} is below -{PSD_REJECT_TOL}")
    return EigenDecomposition(np.clip(w, 0.0, None), dec.eigenvectors)


def _spectral(dec: EigenDecomposition, values: np.ndarray) -> np.ndarray:
    v = dec.eigenvectors
    out = (v * values) @ v.conj().T
    return (out + out.conj().T) / 2


def matrix_sqrt(a) -> np.ndarray:
    """Principal square root of a positive semi-definite matrix."""
    dec = _psd_eigen(a)
    return _spectral(dec, np.sqrt(dec.eigenvalues))


def pinv_sqrt(a, rank_tolerance: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Inverse square root of ``a`` on its support, zero on the kernel.

    Eigenvalues at or below ``rank_tolerance`` count as zero.
    """
    dec = _psd_eigen(a)
    w = dec.eigenvalues
    inv = np.zeros_like(w)
    keep = w > rank_tolerance
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return _spectral(dec, inv)


def support_projector(a, rank_tolerance: float = DEFAULT_RANK_TOL) -> np.ndarray:
    dec = _psd_eigen(a)
    return _spectral(dec, (dec.eigenvalues > rank_tolerance).astype(float))


def make_rng(seed: int, *substream: int) -> np.random.Generator:
    """Deterministic PCG64 generator for ``seed`` and an optional substream path.

    Distinct substream tuples give statistically independent streams, so
    trial ``i`` of an experiment can use ``make_rng(seed, i)`` regardless of
    the order in which trials are executed.
    """
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in substream))
    return np.random.Generator(np.random.PCG64(ss))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_psd(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random PSD matrix ``G G^dagger`` with ``G`` of shape (dim, rank)."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return (m + m.conj().T) / 2
