"""Dense symmetric linear algebra.

Symmetric matrices are plain ``float64`` ndarrays that have passed through
:func:`as_sym`; eigen-decompositions come from cyclic Jacobi rotations in
the compiled kernel (or its numpy fallback).
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ._backend import kernels

ASYM_TOL = 1e-8
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


class ConvergenceError(ArithmeticError):
    """Jacobi iteration ran out of sweeps."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (off-diagonal residual {residual:.3e})")
        self.residual = residual


class EigDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_sym(m, *, copy: bool = True) -> np.ndarray:
    """Validate and symmetrise a square matrix.

    Returns ``(m + m.T) / 2`` as a read-only float64 array. Raises
    ``ValueError`` for non-square or non-finite input, or when the
    asymmetry ``max|m - m.T|`` exceeds ``1e-8 * max(1, max|m|)``.
    """
    a = np.array(m, dtype=np.float64, copy=copy)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > ASYM_TOL * scale:
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    a.setflags(write=False)
    return a


def eig_sym(m) -> EigDecomposition:
    """Eigenvalues (non-increasing) and orthonormal eigenvectors of a symmetric matrix."""
    a = as_sym(m)
    w, v, sweeps, off = kernels.jacobi_eigh(np.ascontiguousarray(a), JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceError("Jacobi eigensolver did not converge", off)
    return EigDecomposition(w, v)


def eigvals_sym(m) -> np.ndarray:
    return eig_sym(m).eigenvalues


def lambda_max(m) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    return float(eig_sym(m).eigenvalues[0])


def lambda_min(m) -> float:
    return float(eig_sym(m).eigenvalues[-1])


def spectral_norm(m) -> float:
    w = eig_sym(m).eigenvalues
    return float(max(abs(w[0]), abs(w[-1]))) if w.size else 0.0


def batch_lambda_max(mats) -> np.ndarray:
    """Largest eigenvalue of each matrix in an (N, k, k) stack of symmetric matrices.

    The stack is symmetrised but not otherwise validated; use this on
    matrices built from already validated coefficients.
    """
    a = np.asarray(mats, dtype=np.float64)
    a = np.ascontiguousarray(0.5 * (a + np.swapaxes(a, 1, 2)))
    try:
        return kernels.batch_lambda_max(a, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    except ArithmeticError as exc:
        raise ConvergenceError(str(exc), float("nan")) from None


def matrix_function(f, m) -> np.ndarray:
    """Apply a scalar function to a symmetric matrix through its spectrum."""
    w, v = eig_sym(m)
    return (v * f(w)) @ v.T


def random_orthogonal(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix)."""
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    return q * np.sign(np.diag(r))


def random_sym(k: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((k, k))
    return as_sym(scale * 0.5 * (g + g.T))


def block_diag(*blocks) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size))
    i = 0
    for b in blocks:
        j = i + b.shape[0]
        out[i:j, i:j] = b
        i = j
    return out


def power_iteration_lambda_max(m, iters: int = 5000, tol: float = 1e-14, seed: int = 0) -> float:
    """Independent estimate of the largest eigenvalue.

    Power iteration on ``m + s I`` with ``s`` a Gershgorin bound, so the
    shifted matrix is PSD and its dominant eigenvalue is ``lambda_max + s``.
    The Rayleigh quotient converges quadratically, so tight gaps are fine.
    """
    a = np.asarray(m, dtype=np.float64)
    k = a.shape[0]
    s = float(np.max(np.sum(np.abs(a), axis=1)))
    b = a + s * np.eye(k)
    x = np.random.default_rng(seed).standard_normal(k)
    x /= np.linalg.norm(x)
    prev = np.inf
    rq = 0.0
    for _ in range(iters):
        y = b @ x
        rq = float(x @ y)
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return -s
        x = y / nrm
        if abs(rq - prev) <= tol * max(1.0, abs(rq)):
            break
        prev = rq
    return rq - s
