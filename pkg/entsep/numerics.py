"""
Dense complex-matrix kernel shared by every other module.

All functions are pure: they never mutate their inputs and return new
arrays. Matrices are plain ``numpy.ndarray`` values of complex dtype.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from entsep.errors import InvalidInputError

logger = logging.getLogger(__name__)

ComplexMatrix = np.ndarray

HERMITIAN_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class HermitianEigen:
    """
    Eigen-decomposition of a Hermitian matrix.

    Attributes:
        eigenvalues: Real eigenvalues sorted in descending order.
        eigenvectors: Orthonormal columns, column k paired with eigenvalues[k].
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> ComplexMatrix:
        """Return V diag(λ) V†."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermiticity_defect(m: ComplexMatrix) -> tuple[float, tuple[int, int]]:
    """Return (max |m − m†|, index of the worst entry)."""
    m = np.asarray(m)
    diff = np.abs(m - m.conj().T)
    idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return float(diff[idx]), (int(idx[0]), int(idx[1]))


def require_hermitian(m: ComplexMatrix, tol: float = HERMITIAN_TOL, what: str = "matrix") -> None:
    """
    Reject a matrix that is not square and Hermitian within ``tol``.

    Raises:
        InvalidInputError: naming the worst entry.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"{what} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError(f"{what} has non-finite entries")
    worst, (i, j) = hermiticity_defect(m)
    if worst > tol:
        raise InvalidInputError(
            f"{what} is not Hermitian: |m[{i},{j}] - conj(m[{j},{i}])| = {worst:.3e} > {tol:.1e}"
        )


def eig_hermitian(m: ComplexMatrix, tol: float = HERMITIAN_TOL) -> HermitianEigen:
    """
    Diagonalise a Hermitian matrix.

    Args:
        m: Square matrix, Hermitian within ``tol``.
        tol: Entrywise Hermiticity tolerance.

    Returns:
        HermitianEigen with eigenvalues sorted descending.

    Raises:
        InvalidInputError: If ``m`` is not Hermitian.
    """
    require_hermitian(m, tol)
    m = np.asarray(m, dtype=complex)
    # eigh only reads one triangle; symmetrise so both halves count
    values, vectors = np.linalg.eigh(0.5 * (m + m.conj().T))
    order = np.argsort(values)[::-1]
    return HermitianEigen(eigenvalues=values[order], eigenvectors=vectors[:, order])


def expm_skew_hermitian(a: ComplexMatrix, tol: float = HERMITIAN_TOL) -> ComplexMatrix:
    """
    Exponentiate a skew-Hermitian matrix ``a = iH``.

    The result U = V diag(e^{iλ}) V† is computed from the eigen-decomposition
    of H and is unitary to working precision.

    Raises:
        InvalidInputError: If ``a`` is not skew-Hermitian.
    """
    a = np.asarray(a, dtype=complex)
    h = -1j * a
    try:
        eig = eig_hermitian(h, tol)
    except InvalidInputError as exc:
        raise InvalidInputError(f"expected a skew-Hermitian argument: {exc}") from exc
    v = eig.eigenvectors
    return (v * np.exp(1j * eig.eigenvalues)) @ v.conj().T


def unitary_from_hermitian(h: ComplexMatrix) -> ComplexMatrix:
    """Return exp(iH) for Hermitian ``h``."""
    return expm_skew_hermitian(1j * np.asarray(h, dtype=complex))


def kron(*factors: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product of one or more matrices or vectors, leftmost factor first."""
    if not factors:
        raise InvalidInputError("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(f) for f in factors))


def rank_with_tolerance(m: ComplexMatrix, rel_tol: float = DEFAULT_RANK_TOL) -> int:
    """
    Count eigenvalues above ``rel_tol`` times the largest one.

    Returns 0 for the zero matrix.
    """
    values = eig_hermitian(m, tol=1e-8).eigenvalues
    top = float(values[0]) if values.size else 0.0
    if top <= 0.0:
        return 0
    return int(np.count_nonzero(values > rel_tol * top))


def min_eigenvalue(m: ComplexMatrix) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(eig_hermitian(m, tol=1e-8).eigenvalues[-1])


def projector(vector: np.ndarray) -> ComplexMatrix:
    """|v⟩⟨v| for a (not necessarily normalised) vector."""
    v = np.asarray(vector, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def frobenius(m: ComplexMatrix) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.asarray(m), "fro"))


def partial_transpose(m: ComplexMatrix, dims: Sequence[int], subsystems: Sequence[int]) -> ComplexMatrix:
    """
    Transpose the listed subsystems of an operator on ⊗_k C^{dims[k]}.

    Raises:
        InvalidInputError: If the shape does not match the product of ``dims``.
    """
    dims = [int(d) for d in dims]
    n = int(np.prod(dims))
    m = np.asarray(m)
    if m.shape != (n, n):
        raise InvalidInputError(f"matrix shape {m.shape} does not match dims {dims}")
    k = len(dims)
    axes = list(range(2 * k))
    for s in subsystems:
        axes[s], axes[k + s] = axes[k + s], axes[s]
    return np.transpose(m.reshape(dims + dims), axes).reshape(n, n)
