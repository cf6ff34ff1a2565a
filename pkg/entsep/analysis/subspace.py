"""
Product-state geometry of an entangled subspace.

The overlap ⟨p|Π|p⟩ with a product state p is maximised factor by factor:
with every factor but one fixed, the best remaining factor is the top
eigenvector of the partially contracted projector.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from entsep.errors import InvalidInputError
from entsep.models.analysis import (
    TANGLEMETER_DIMS,
    BetaDistribution,
    BetaSample,
    DominantEigen,
    EntangledSubspace,
    OptimizerConfig,
    ProductOverlap,
)
from entsep.models.density import DensityMatrix, Grouping, PartitionSpec, SeparabilityMode
from entsep.models.states import ProductState, PureState, RngStream
from entsep.numerics import eig_hermitian
from entsep.sampling import haar_random_vector

logger = logging.getLogger(__name__)

FACTOR_TOL = 1e-12


def _contract_except(tensor: np.ndarray, factors: Sequence[np.ndarray], skip: int) -> np.ndarray:
    """Contract conj(factors) into every group axis but ``skip``; the last axis is kept."""
    t = tensor
    for axis in reversed(range(len(factors))):
        if axis != skip:
            t = np.tensordot(factors[axis].conj(), t, axes=([0], [axis]))
    return t


def _overlap(tensor: np.ndarray, factors: Sequence[np.ndarray]) -> float:
    w = _contract_except(tensor, factors, 0)
    amplitudes = factors[0].conj() @ w
    return float(np.sum(np.abs(amplitudes) ** 2))


def alternating_maximize(
    tensor: np.ndarray, factors: List[np.ndarray], optimizer: OptimizerConfig
) -> Tuple[float, List[np.ndarray]]:
    """
    Improve ``factors`` by alternating top-eigenvector updates.

    Args:
        tensor: Subspace basis in group order, shape (M_1, ..., M_J, d).
        factors: Starting unit vectors, one per group.
        optimizer: Iteration limits.

    Returns:
        The final overlap and the factors.
    """
    factors = [f / np.linalg.norm(f) for f in factors]
    value = _overlap(tensor, factors)
    for _ in range(optimizer.max_iterations):
        moved = 0.0
        for j in range(len(factors)):
            w = _contract_except(tensor, factors, j)
            w = w.reshape(w.shape[0], -1)
            new = np.linalg.svd(w, full_matrices=False)[0][:, 0]
            inner = np.vdot(new, factors[j])
            if abs(inner) > 0:
                new = new * (inner / abs(inner))
            moved = max(moved, float(np.linalg.norm(new - factors[j])))
            factors[j] = new
        new_value = _overlap(tensor, factors)
        improved = new_value - value
        value = max(value, new_value)
        if improved < optimizer.overlap_tol and moved < FACTOR_TOL:
            break
    return min(value, 1.0), factors


def _group_tensor(subspace: EntangledSubspace, grouping: Grouping) -> np.ndarray:
    partition = subspace.partition
    columns = [grouping.to_group_order(v, partition) for v in subspace.basis_vectors.T]
    return np.stack(columns, axis=-1)


def _starting_points(tensor: np.ndarray, dims: Sequence[int], optimizer: OptimizerConfig, rng: RngStream):
    # deterministic start: leading singular vector of every group matricisation
    first = []
    for axis, d in enumerate(dims):
        mat = np.moveaxis(tensor, axis, 0).reshape(d, -1)
        first.append(np.linalg.svd(mat, full_matrices=False)[0][:, 0])
    yield first
    for _ in range(optimizer.n_starts):
        yield [haar_random_vector(d, rng) for d in dims]


def product_overlap_candidates(
    subspace: EntangledSubspace,
    grouping: Grouping,
    optimizer: Optional[OptimizerConfig] = None,
    rng: Optional[RngStream] = None,
) -> List[Tuple[float, List[np.ndarray]]]:
    """Local maxima of ⟨p|Π|p⟩ over products of one grouping, best first."""
    optimizer = optimizer or OptimizerConfig()
    rng = rng or RngStream(optimizer.seed)
    if subspace.dim == 0:
        raise InvalidInputError("cannot search an empty subspace")
    grouping.validate(subspace.partition)
    dims = grouping.coarse_dims(subspace.partition)
    tensor = _group_tensor(subspace, grouping)
    results = [alternating_maximize(tensor, start, optimizer) for start in _starting_points(tensor, dims, optimizer, rng)]
    results.sort(key=lambda r: -r[0])
    return results


def max_product_overlap(
    subspace: EntangledSubspace,
    mode: SeparabilityMode,
    optimizer: Optional[OptimizerConfig] = None,
    rng: Optional[RngStream] = None,
) -> ProductOverlap:
    """
    Largest ⟨p|Π|p⟩ over product states of any grouping of the mode.

    This is a multi-start local search; the value is a lower bound on the
    true maximum.
    """
    optimizer = optimizer or OptimizerConfig()
    rng = rng or RngStream(optimizer.seed)
    best: Optional[ProductOverlap] = None
    for grouping in mode.groupings:
        value, factors = product_overlap_candidates(subspace, grouping, optimizer, rng)[0]
        if best is None or value > best.overlap:
            state = ProductState(subspace.partition, grouping, tuple(PureState.normalized(f) for f in factors))
            best = ProductOverlap(overlap=value, argmax=state)
    logger.debug("max product overlap %.12g over %d groupings", best.overlap, len(mode.groupings))
    return best


def corner_states(
    subspace: EntangledSubspace,
    mode: SeparabilityMode,
    optimizer: Optional[OptimizerConfig] = None,
    rng: Optional[RngStream] = None,
) -> List[PureState]:
    """
    Orthonormal states of the subspace ordered by closeness to the product set.

    Each corner is the projection of the best product state onto what is
    left of the subspace; the next search runs in its orthogonal complement.
    """
    optimizer = optimizer or OptimizerConfig()
    rng = rng or RngStream(optimizer.seed)
    corners: List[PureState] = []
    current = subspace
    while current.dim > 0:
        if current.dim == 1:
            corners.append(PureState.normalized(current.basis_vectors[:, 0]))
            break
        probe = max_product_overlap(current, mode, optimizer, rng)
        v = current.basis_vectors
        coords = v.conj().T @ probe.argmax.assembled.amplitudes
        norm = np.linalg.norm(coords)
        coords = coords / norm if norm > 1e-14 else np.eye(current.dim)[:, 0].astype(complex)
        corners.append(PureState.normalized(v @ coords))
        rest = linalg.null_space(coords.conj()[None, :])
        current = EntangledSubspace(current.partition, v @ rest)
    return corners


def dominant_eigenvector(rho: DensityMatrix) -> DominantEigen:
    """Largest eigenvalue of ρ and its eigenvector."""
    eig = eig_hermitian(rho.matrix)
    return DominantEigen(float(eig.eigenvalues[0]), PureState.normalized(eig.eigenvectors[:, 0]))


def _require_tanglemeter_partition(partition: PartitionSpec) -> None:
    if tuple(partition.subsystem_dims) != TANGLEMETER_DIMS:
        raise InvalidInputError(
            f"tanglemeters are defined for the 3x2x2 system only, got partition {partition.subsystem_dims}"
        )


def beta_distribution(
    rho_ent: DensityMatrix,
    n_samples: int,
    rng: RngStream,
    optimizer: Optional[OptimizerConfig] = None,
    threads: int = 1,
    rel_tol: float = 1e-6,
) -> BetaDistribution:
    """
    Tanglemeters of Haar-random states in the range of ρ_ent.

    Each sample carries the weight ⟨ψ|ρ_ent|ψ⟩. Canonicalisations that miss
    their tolerances are dropped and counted as failures.

    Raises:
        InvalidInputError: If ρ_ent is not a 3x2x2 state.
    """
    from entsep.analysis.tanglemeter import canonicalize_322, nilpotent_log

    _require_tanglemeter_partition(rho_ent.partition)
    optimizer = optimizer or OptimizerConfig()
    if n_samples <= 0:
        return BetaDistribution(tuple(), 0, 0, None, None)

    subspace = EntangledSubspace.from_density(rho_ent, rel_tol)
    v = subspace.basis_vectors
    streams = rng.split(n_samples)
    states = [v @ haar_random_vector(subspace.dim, stream) for stream in streams]

    def canonicalize(index: int):
        psi = PureState.normalized(states[index])
        weight = float(np.real(psi.amplitudes.conj() @ rho_ent.matrix @ psi.amplitudes))
        canonical = canonicalize_322(psi, optimizer, streams[index])
        return weight, canonical

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        outcomes = list(pool.map(canonicalize, range(n_samples)))

    samples = tuple(
        BetaSample(weight, nilpotent_log(canonical)) for weight, canonical in outcomes if canonical.converged
    )
    failures = n_samples - len(samples)
    if failures:
        logger.warning("%d of %d canonicalisations did not converge and were dropped", failures, n_samples)
    if not samples:
        return BetaDistribution(samples, n_samples, failures, None, None)

    x = np.array([s.tanglemeter.as_row() for s in samples])
    w = np.array([s.weight for s in samples])
    total = float(np.sum(w))
    mean = (w @ x) / total
    centered = x - mean
    covariance = (centered.T * w) @ centered / total
    return BetaDistribution(samples, n_samples, failures, mean, covariance)
