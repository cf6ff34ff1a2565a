"""
Seeded sampling of pure states, product states and random perturbations.

Every function is a pure function of its inputs and the RngStream state.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Sequence

import numpy as np

from entsep.liouville import local_generators
from entsep.models.density import DensityMatrix, Grouping, PartitionSpec
from entsep.models.states import ProductState, PureState, RngStream
from entsep.numerics import unitary_from_hermitian

logger = logging.getLogger(__name__)


def haar_random_vector(dim: int, rng: RngStream) -> np.ndarray:
    """Normalised vector of i.i.d. complex Gaussians (Haar distributed)."""
    v = rng.complex_normal(dim)
    return v / np.linalg.norm(v)


def haar_random_pure(dim: int, rng: RngStream) -> PureState:
    """Haar-random pure state of dimension ``dim``."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return PureState(haar_random_vector(dim, rng))


def haar_random_batch(dim: int, count: int, rng: RngStream) -> np.ndarray:
    """``count`` Haar-random vectors as rows of a (count, dim) array."""
    v = rng.complex_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_product_state(
    partition: PartitionSpec,
    rng: RngStream,
    grouping: Optional[Grouping] = None,
) -> ProductState:
    """
    Product state with every factor independently Haar random.

    Args:
        partition: Base partition.
        rng: Random stream.
        grouping: Which groups form the factors (default: full split).
    """
    grouping = grouping or partition.full_split()
    dims = grouping.coarse_dims(partition)
    factors = tuple(haar_random_pure(d, rng) for d in dims)
    return ProductState(partition, grouping, factors)


def random_hermitian_direction(dim: int, width: float, rng: RngStream) -> np.ndarray:
    """Σ α_i g_i over the traceless generators with α_i ~ N(0, width²)."""
    gens = local_generators(dim)
    alphas = rng.normal(len(gens), scale=width)
    return np.tensordot(alphas, gens, axes=1)


def random_unitary_batch(dim: int, width: float, count: int, rng: RngStream) -> np.ndarray:
    """
    ``count`` unitaries exp{i Σ α_i g_i} with α_i ~ N(0, width²).

    Same distribution as unitary_from_hermitian(random_hermitian_direction(...)),
    computed with one stacked eigendecomposition.

    Returns:
        Array of shape (count, dim, dim).
    """
    gens = local_generators(dim)
    alphas = rng.normal((count, len(gens)), scale=width)
    h = np.tensordot(alphas, gens, axes=1)
    h = 0.5 * (h + np.conj(np.swapaxes(h, 1, 2)))
    values, vectors = np.linalg.eigh(h)
    return (vectors * np.exp(1j * values)[:, None, :]) @ np.conj(np.swapaxes(vectors, 1, 2))


def perturb_local(p: ProductState, width: float, rng: RngStream) -> ProductState:
    """
    Apply exp{i Σ α_j g_j} independently to every factor.

    The result is again a product state over the same grouping.
    """
    if width < 0:
        raise ValueError("width must be >= 0")
    if width == 0:
        return p
    factors = []
    for f in p.factors:
        u = unitary_from_hermitian(random_hermitian_direction(f.dim, width, rng))
        factors.append(PureState.normalized(u @ f.amplitudes))
    return ProductState(p.partition, p.grouping, tuple(factors))


def perturb_generic(s: PureState, width: float, rng: RngStream) -> PureState:
    """Apply exp{i Σ α_i g_i} over all N² − 1 traceless generators of the full space."""
    if width < 0:
        raise ValueError("width must be >= 0")
    if width == 0:
        return s
    u = unitary_from_hermitian(random_hermitian_direction(s.dim, width, rng))
    return PureState.normalized(u @ s.amplitudes)


def random_local_unitary(partition: PartitionSpec, rng: RngStream) -> List[np.ndarray]:
    """One Haar-random unitary per subsystem (QR of a complex Ginibre matrix)."""
    unitaries = []
    for d in partition.subsystem_dims:
        z = rng.complex_normal((d, d)) / np.sqrt(2.0)
        q, r = np.linalg.qr(z)
        phases = np.diag(r) / np.abs(np.diag(r))
        unitaries.append(q * phases)
    return unitaries


def random_mixed_state(
    dims: Sequence[int],
    rng: RngStream,
    rank: Optional[int] = None,
) -> DensityMatrix:
    """
    Random-rank mixture of Haar-random pure states with Dirichlet weights.

    Args:
        dims: Subsystem dimensions.
        rng: Random stream.
        rank: Number of mixed states; drawn uniformly from 1..N when omitted.
    """
    partition = PartitionSpec(tuple(dims))
    n = partition.total_dim
    k = int(rank) if rank is not None else int(rng.integers(1, n + 1))
    vectors = haar_random_batch(n, k, rng)
    weights = rng.dirichlet(np.ones(k))
    rho = (vectors.T * weights) @ vectors.conj()
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(partition, rho / np.trace(rho).real)


def random_separable_state(
    dims: Sequence[int],
    rng: RngStream,
    n_terms: Optional[int] = None,
    grouping: Optional[Grouping] = None,
) -> DensityMatrix:
    """Convex mixture of random product states (separable by construction)."""
    partition = PartitionSpec(tuple(dims))
    n = partition.total_dim
    k = int(n_terms) if n_terms is not None else int(rng.integers(1, n * n + 1))
    vectors = np.array(
        [random_product_state(partition, rng, grouping).assembled.amplitudes for _ in range(k)]
    )
    weights = rng.dirichlet(np.ones(k))
    rho = (vectors.T * weights) @ vectors.conj()
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(partition, rho / np.trace(rho).real)
