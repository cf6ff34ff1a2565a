"""
Orthonormal SU(N) generator basis and real Liouville vectors.

A density matrix ρ is expanded as ρ = Σ_i r_i g_i over the generalized
Gell-Mann matrices with g_0 = I/√N and Tr[g_i g_j] = δ_ij, so r_i = Tr[g_i ρ]
are real and Σ r_i² = Tr[ρ²].

Generator ordering: identity, then for each pair j < k in lexicographic
order the symmetric member (E_jk + E_kj)/√2 followed by the antisymmetric
member −i(E_jk − E_kj)/√2, then the diagonal members by increasing size.
For N = 2 this is {I, σx, σy, σz}/√2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List

import numpy as np
from scipy import sparse

from entsep.errors import InvalidInputError
from entsep.numerics import eig_hermitian

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GeneratorBasis:
    """
    Orthonormal Hermitian basis of N x N matrices.

    Attributes:
        dim: N.
        generators: Array of shape (N², N, N).
        flat: Sparse (N², N²) matrix whose row k is g_k flattened row-major.
    """

    dim: int
    generators: np.ndarray
    flat: sparse.csr_matrix = field(repr=False)

    @property
    def size(self) -> int:
        return self.dim * self.dim

    def traces_with(self, x: np.ndarray) -> np.ndarray:
        """Complex vector Tr[g_k X] for every generator."""
        x = np.asarray(x, dtype=complex)
        return self.flat @ x.T.reshape(-1)

    def vectorize_matrix(self, m: np.ndarray) -> np.ndarray:
        """Real components r_k = Tr[g_k M] of a Hermitian matrix."""
        return np.real(self.traces_with(m))

    def vectorize_states(self, vectors: np.ndarray) -> np.ndarray:
        """
        Liouville components of |v⟩⟨v| for a batch of state vectors.

        Args:
            vectors: Array of shape (n, N), one state per row.

        Returns:
            Real array of shape (N², n); column j belongs to vectors[j].
        """
        v = np.atleast_2d(np.asarray(vectors, dtype=complex))
        n = self.dim
        # Tr[g |v⟩⟨v|] = Σ_ab g_ab conj(v_a) v_b
        outer = (v.conj()[:, :, None] * v[:, None, :]).reshape(v.shape[0], n * n)
        return np.real(self.flat @ outer.T)

    def matrix_from(self, components: np.ndarray) -> np.ndarray:
        """Σ_k r_k g_k."""
        r = np.asarray(components)
        return (self.flat.T @ r).reshape(self.dim, self.dim)


@dataclass(frozen=True, eq=False)
class LiouvilleVector:
    """
    Real expansion coefficients of a Hermitian matrix.

    Attributes:
        dim: N.
        components: N² real values r_0..r_{N²−1}.
    """

    dim: int
    components: np.ndarray

    def __post_init__(self) -> None:
        r = np.asarray(self.components, dtype=float).reshape(-1)
        if r.size != self.dim * self.dim:
            raise InvalidInputError(f"expected {self.dim * self.dim} components, got {r.size}")
        object.__setattr__(self, "components", r)

    @property
    def purity(self) -> float:
        return float(self.components @ self.components)


def _generator_list(n: int) -> List[np.ndarray]:
    mats: List[np.ndarray] = [np.eye(n, dtype=complex) / np.sqrt(n)]
    for j in range(n):
        for k in range(j + 1, n):
            sym = np.zeros((n, n), dtype=complex)
            sym[j, k] = sym[k, j] = 1.0 / np.sqrt(2.0)
            anti = np.zeros((n, n), dtype=complex)
            anti[j, k] = -1j / np.sqrt(2.0)
            anti[k, j] = 1j / np.sqrt(2.0)
            mats.extend([sym, anti])
    for d in range(1, n):
        diag = np.zeros(n, dtype=complex)
        diag[:d] = 1.0
        diag[d] = -d
        mats.append(np.diag(diag) / np.sqrt(d * (d + 1)))
    return mats


@lru_cache(maxsize=16)
def build_basis(n: int) -> GeneratorBasis:
    """
    Build the generalized Gell-Mann basis for dimension ``n``.

    Raises:
        InvalidInputError: If n < 2.
    """
    if n < 2:
        raise InvalidInputError(f"basis dimension must be >= 2, got {n}")
    mats = _generator_list(n)
    stack = np.array(mats)
    stack.setflags(write=False)
    flat = sparse.csr_matrix(stack.reshape(n * n, n * n))
    flat.eliminate_zeros()
    logger.debug("built SU(%d) basis with %d generators (%d nonzeros)", n, n * n, flat.nnz)
    return GeneratorBasis(dim=n, generators=stack, flat=flat)


def gell_mann(i: int) -> np.ndarray:
    """
    Standard Gell-Mann matrix λ_i, i = 1..8 (Tr λ_i λ_j = 2δ_ij).

    The basis stores them as λ/√2 in the order λ1, λ2, λ4, λ5, λ6, λ7, λ3, λ8.
    """
    position = {1: 1, 2: 2, 4: 3, 5: 4, 6: 5, 7: 6, 3: 7, 8: 8}
    if i not in position:
        raise InvalidInputError(f"Gell-Mann index must be in 1..8, got {i}")
    return np.sqrt(2.0) * build_basis(3).generators[position[i]]


def pauli(axis: str) -> np.ndarray:
    """Pauli matrix for axis 'x', 'y' or 'z'."""
    position = {"x": 1, "y": 2, "z": 3}
    if axis not in position:
        raise InvalidInputError(f"unknown Pauli axis '{axis}'")
    return np.sqrt(2.0) * build_basis(2).generators[position[axis]]


def vectorize(rho, basis: GeneratorBasis) -> LiouvilleVector:
    """
    Liouville vector of a density matrix (or a raw Hermitian array).

    Raises:
        InvalidInputError: If the dimensions do not match.
    """
    m = np.asarray(getattr(rho, "matrix", rho))
    if m.shape != (basis.dim, basis.dim):
        raise InvalidInputError(f"matrix shape {m.shape} does not match basis dimension {basis.dim}")
    return LiouvilleVector(basis.dim, basis.vectorize_matrix(m))


def devectorize(r: LiouvilleVector, basis: GeneratorBasis) -> np.ndarray:
    """
    Hermitian matrix Σ r_i g_i.

    The result is not guaranteed positive: the Liouville space also holds
    non-states.
    """
    if r.dim != basis.dim:
        raise InvalidInputError(f"vector dimension {r.dim} does not match basis dimension {basis.dim}")
    m = basis.matrix_from(r.components)
    return 0.5 * (m + m.conj().T)


def characteristic_constraints(r: LiouvilleVector) -> np.ndarray:
    """
    Coefficients c_2..c_N of det(λI − ρ) = λ^N + c_1 λ^{N−1} + ... + c_N.

    They all vanish exactly when ρ has rank one with unit trace.
    """
    m = devectorize(r, build_basis(r.dim))
    values = eig_hermitian(m).eigenvalues
    coefficients = np.real(np.poly(values))
    return coefficients[2:]


def local_generators(n: int) -> np.ndarray:
    """The N² − 1 traceless generators for dimension ``n``."""
    return build_basis(n).generators[1:]

