"""
Reference states and independent answers used to check decompositions.

For the two-qubit Werner family ρ_W(p) = p|Ψ⁻⟩⟨Ψ⁻| + (1 − p)I/4 the
decomposition is fixed by symmetry: twirling by U⊗U maps every candidate
decomposition to one inside the family, so ρ_sep = ρ_W(q) for a separable
q and ρ_ent = |Ψ⁻⟩⟨Ψ⁻|. From p = (1 − B)q + B the smallest weight is
reached at the largest separable q, located here by bisection on the PPT
test.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from entsep.errors import InvalidInputError
from entsep.models.density import DensityMatrix, Grouping, PartitionSpec
from entsep.models.states import RngStream
from entsep.numerics import kron, min_eigenvalue, partial_transpose
from entsep.sampling import random_local_unitary

logger = logging.getLogger(__name__)

WERNER_SWEEP = (0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0)


def singlet_vector() -> np.ndarray:
    return np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)


def singlet_state() -> DensityMatrix:
    return DensityMatrix.from_pure(singlet_vector(), (2, 2))


def werner_state(p: float) -> DensityMatrix:
    """p|Ψ⁻⟩⟨Ψ⁻| + (1 − p)I/4 for p in [0, 1]."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"Werner parameter must lie in [0, 1], got {p}")
    psi = singlet_vector()
    return DensityMatrix(PartitionSpec((2, 2)), p * np.outer(psi, psi.conj()) + (1.0 - p) * np.eye(4) / 4.0)


def rotated_werner_state(p: float, rng: RngStream) -> DensityMatrix:
    """ρ_W(p) under a random local unitary U⊗V; its entangled weight is that of ρ_W(p)."""
    rho = werner_state(p)
    u = kron(*random_local_unitary(rho.partition, rng))
    return DensityMatrix(rho.partition, u @ rho.matrix @ u.conj().T)


def ghz_like_state(dims: Sequence[int] = (3, 2, 2)) -> DensityMatrix:
    """(|0…0⟩ + |1…1⟩)/√2 in the computational basis."""
    zero = kron(*(np.eye(d)[0] for d in dims))
    one = kron(*(np.eye(d)[1] for d in dims))
    return DensityMatrix.from_pure(zero + one, dims)


def product_basis_state(dims: Sequence[int], indices: Sequence[int]) -> DensityMatrix:
    """|i_1⟩⊗…⊗|i_K⟩⟨…| for computational basis labels."""
    vector = kron(*(np.eye(d)[i] for d, i in zip(dims, indices)))
    return DensityMatrix.from_pure(vector, dims)


def werner_min_pt_eigenvalue(p: float) -> float:
    """Closed form (1 − 3p)/4 of the smallest partial-transpose eigenvalue."""
    return (1.0 - 3.0 * p) / 4.0


def werner_separable_threshold(tol: float = 1e-12) -> float:
    """Largest q with ρ_W(q) PPT, by bisection."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        pt = partial_transpose(werner_state(mid).matrix, (2, 2), (1,))
        if min_eigenvalue(pt) >= -1e-15:
            lo = mid
        else:
            hi = mid
    logger.debug("Werner separable threshold %.12f", lo)
    return lo


def werner_bsa_oracle(p: float, threshold: Optional[float] = None) -> float:
    """Minimal entangled weight of ρ_W(p) from the symmetry reduction."""
    q = werner_separable_threshold() if threshold is None else threshold
    if p <= q:
        return 0.0
    return (p - q) / (1.0 - q)


def werner_closed_form(p: float) -> float:
    return max(0.0, (3.0 * p - 1.0) / 2.0)


def two_qubit_cut() -> Grouping:
    return Grouping(((0,), (1,)))
