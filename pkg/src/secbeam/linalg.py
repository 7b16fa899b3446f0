"""Dense complex-Hermitian linear-algebra kernels shared by every solver.

All matrices are plain numpy arrays (2-D, complex128). Anything that is
Hermitian by contract gets symmetrized, (A + A^H)/2, before factoring so
that accumulated floating-point drift never reaches the eigensolver.
Problem sizes here are tiny (n <= 64), so dense O(n^3) kernels are the
right tool throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, SingularityError

# Single numerical-rank rule used across the package: eigenvalues at or
# below RANK_RTOL * lambda_max count as zero.
RANK_RTOL = 1e-9


def hermitize(a: np.ndarray) -> np.ndarray:
    """Hermitian part (A + A^H) / 2 of a square matrix."""
    return 0.5 * (a + a.conj().T)


def trace_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Real trace inner product Re tr(A^H B); equals tr(AB) for Hermitian pairs."""
    return float(np.real(np.sum(np.conj(a) * b)))


def check_finite(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise DataError(f"{name} contains non-finite entries")
    return a


def _square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    check_finite(a, name)
    return a


@dataclass
class HermitianEig:
    """Eigen-decomposition A = U diag(w) U^H with w real and ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian_eig(a) -> HermitianEig:
    """Eigen-decompose a Hermitian matrix; eigenvalues ascending."""
    a = _square(a)
    w, u = np.linalg.eigh(hermitize(a))
    return HermitianEig(eigenvalues=w, eigenvectors=u)


def cholesky_hpd(a, name: str = "matrix") -> np.ndarray:
    """Lower Cholesky factor of a Hermitian positive-definite matrix."""
    a = _square(a, name)
    try:
        return np.linalg.cholesky(hermitize(a))
    except np.linalg.LinAlgError as exc:
        raise SingularityError(f"{name} is not positive definite") from exc


def solve_hpd(a, b) -> np.ndarray:
    """Solve A X = B with A Hermitian positive definite."""
    b = np.asarray(b, dtype=complex)
    a = _square(a, "A")
    if b.ndim not in (1, 2) or b.shape[0] != a.shape[0]:
        raise DimensionError(f"incompatible shapes {a.shape} and {b.shape}")
    check_finite(b, "B")
    low = cholesky_hpd(a, "A")
    return np.linalg.solve(low.conj().T, np.linalg.solve(low, b))


def inv_hpd(a) -> np.ndarray:
    """Inverse of a Hermitian positive-definite matrix, symmetrized."""
    a = np.asarray(a, dtype=complex)
    return hermitize(solve_hpd(a, np.eye(a.shape[0])))


def logdet_hpd(a) -> float:
    """log det A in nats for Hermitian positive-definite A."""
    low = cholesky_hpd(a)
    return float(2.0 * np.sum(np.log(np.real(np.diag(low)))))


def min_rayleigh_vec(a, b):
    """Minimize the generalized Rayleigh quotient (u^H A u) / (u^H B u).

    B must be Hermitian positive definite. Whitens with the Cholesky factor
    of B and solves a standard Hermitian eigenproblem. Returns (u, ratio)
    with u of unit Euclidean norm and ratio the smallest generalized
    eigenvalue of the pencil (A, B).
    """
    a = _square(a, "A")
    b = _square(b, "B")
    if a.shape != b.shape:
        raise DimensionError(f"pencil shapes differ: {a.shape} vs {b.shape}")
    low = cholesky_hpd(b, "B")
    y = np.linalg.solve(low, hermitize(a))
    c = hermitize(np.linalg.solve(low, y.conj().T).conj().T)
    w, q = np.linalg.eigh(c)
    u = np.linalg.solve(low.conj().T, q[:, 0])
    u = u / np.linalg.norm(u)
    return u, float(w[0])


def herm_basis(n: int) -> list[np.ndarray]:
    """Orthonormal real basis of the n x n Hermitian matrices (n^2 elements).

    Orthonormal under the real trace inner product: n diagonal units plus
    symmetric and antisymmetric off-diagonal pairs scaled by 1/sqrt(2).
    """
    basis = []
    for k in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[k, k] = 1.0
        basis.append(e)
    s = 1.0 / np.sqrt(2.0)
    for j in range(n):
        for k in range(j + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = s
            e[k, j] = s
            basis.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[j, k] = 1j * s
            e[k, j] = -1j * s
            basis.append(e)
    return basis


def herm_coords(a: np.ndarray, basis) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in an orthonormal basis."""
    return np.array([trace_inner(e, a) for e in basis])


def herm_from_coords(coords, basis) -> np.ndarray:
    """Hermitian matrix from its real coordinates in an orthonormal basis."""
    out = np.zeros_like(basis[0])
    for c, e in zip(coords, basis):
        out = out + c * e
    return out
