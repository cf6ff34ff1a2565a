"""
Relaxation dynamics of the qutrit ⊗ qubit ⊗ qubit model in Liouville space.

With ρ = Σ r_m g_m the master equation becomes the real linear system

    ṙ_k = Σ_m (M_km − R_km) r_m,
    M_km = −i Tr{g_k [H, g_m]},
    R_km = Σ_ij C_ij Tr{g_k [λ_i, [λ_j, g_m]]},

where C is the covariance of the fluctuating couplings. Row and column 0
of both matrices vanish because every commutator is traceless, so the
trace component r_0 = 1/√N never moves.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Sequence

import numpy as np

from entsep.analysis.subspace import dominant_eigenvector
from entsep.analysis.tanglemeter import tanglemeter_of
from entsep.bsa import bsa_decompose
from entsep.errors import EntsepError, IntegrationError, InvalidInputError
from entsep.liouville import GeneratorBasis, LiouvilleVector, build_basis, devectorize, gell_mann, pauli
from entsep.models.analysis import TANGLEMETER_DIMS, OptimizerConfig
from entsep.models.decomposition import BsaConfig, BsaDecomposition
from entsep.models.density import PartitionSpec, SeparabilityMode
from entsep.models.dynamics import (
    MODEL_DIMS,
    DeathInterval,
    GeneratorMatrices,
    LindbladModel,
    StepRecord,
    Trajectory,
    TrajectoryAnalysis,
)
from entsep.models.states import RngStream
from entsep.numerics import kron, min_eigenvalue, rank_with_tolerance

logger = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-8


def _qutrit_term(i: int) -> np.ndarray:
    return kron(gell_mann(i), np.eye(2), np.eye(2))


def build_hamiltonian(model: LindbladModel) -> np.ndarray:
    """
    12 x 12 Hamiltonian, ordering qutrit ⊗ qubit₁ ⊗ qubit₂.

    H = Σ_i f_i λ_i⊗I⊗I + f4 λ4⊗σx⊗I + f6 λ6⊗I⊗σx + ε1 I⊗σz⊗I + ε2 I⊗I⊗σz
    """
    i2 = np.eye(2)
    i3 = np.eye(3)
    h = np.zeros((12, 12), dtype=complex)
    for i, f in enumerate(model.f, start=1):
        h += f * _qutrit_term(i)
    h += model.f4 * kron(gell_mann(4), pauli("x"), i2)
    h += model.f6 * kron(gell_mann(6), i2, pauli("x"))
    h += model.eps1 * kron(i3, pauli("z"), i2)
    h += model.eps2 * kron(i3, i2, pauli("z"))
    return 0.5 * (h + h.conj().T)


def _traces(basis: GeneratorBasis, stack: np.ndarray) -> np.ndarray:
    """Matrix T_km = Tr[g_k X_m] for a stack X of shape (n_m, N, N)."""
    flat = np.transpose(stack, (0, 2, 1)).reshape(len(stack), -1)
    return basis.flat @ flat.T


def build_drift(h: np.ndarray, basis: GeneratorBasis) -> np.ndarray:
    """M_km = −i Tr{g_k [H, g_m]}."""
    g = basis.generators
    commutators = h @ g - g @ h
    return np.real(-1j * _traces(basis, commutators))


def build_relaxation(model: LindbladModel, basis: GeneratorBasis) -> np.ndarray:
    """R_km = Σ_ij C_ij Tr{g_k [λ_i, [λ_j, g_m]]} with λ_i embedded on the qutrit."""
    if basis.dim != 12:
        raise InvalidInputError(f"relaxation is defined on the 12-level model, got basis dimension {basis.dim}")
    c = model.covariance
    g = basis.generators
    lambdas = [_qutrit_term(i) for i in (1, 2, 3)]
    inner = [lam @ g - g @ lam for lam in lambdas]
    total = np.zeros_like(g)
    for i in range(3):
        for j in range(3):
            if c[i, j] != 0.0:
                total += c[i, j] * (lambdas[i] @ inner[j] - inner[j] @ lambdas[i])
    return np.real(_traces(basis, total))


def build_generators(model: LindbladModel, basis: Optional[GeneratorBasis] = None) -> GeneratorMatrices:
    basis = basis or build_basis(12)
    return GeneratorMatrices(build_drift(build_hamiltonian(model), basis), build_relaxation(model, basis))


def rk4_propagator(generator: np.ndarray, dt: float) -> np.ndarray:
    """One classic RK4 step of ṙ = L r as a matrix: Σ_{k≤4} (dt L)^k / k!."""
    a = dt * generator
    step = np.eye(len(a))
    term = np.eye(len(a))
    for k in range(1, 5):
        term = term @ a / k
        step = step + term
    return step


def evolve(
    r0: LiouvilleVector,
    mats: GeneratorMatrices,
    dt: float,
    t_end: float,
    partition: Optional[PartitionSpec] = None,
    monitor_positivity: bool = True,
) -> Trajectory:
    """
    Integrate ṙ = (M − R) r with fixed-step RK4.

    Raises:
        InvalidInputError: If dt is not positive or dimensions disagree.
        IntegrationError: If a step produces non-finite values.
    """
    if not dt > 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")
    partition = partition or PartitionSpec(MODEL_DIMS)
    generator = mats.generator
    if generator.shape != (r0.components.size, r0.components.size):
        raise InvalidInputError(f"generator shape {generator.shape} does not match vector size {r0.components.size}")
    n_steps = int(round(t_end / dt))
    propagator = rk4_propagator(generator, dt)
    basis = build_basis(r0.dim)

    vectors = np.empty((n_steps + 1, r0.components.size))
    vectors[0] = r0.components
    violations: List[int] = []
    for step in range(1, n_steps + 1):
        vectors[step] = propagator @ vectors[step - 1]
        if not np.all(np.isfinite(vectors[step])):
            raise IntegrationError(f"non-finite state at step {step}", step)
        if monitor_positivity:
            lowest = min_eigenvalue(devectorize(LiouvilleVector(r0.dim, vectors[step]), basis))
            if lowest < -POSITIVITY_TOL:
                violations.append(step)
    if violations:
        logger.warning("%d steps left the state space (first at step %d)", len(violations), violations[0])
    logger.info("integrated %d steps of dt=%g", n_steps, dt)
    return Trajectory(partition, np.arange(n_steps + 1) * dt, vectors, tuple(violations))


def detect_death_intervals(times: Sequence[float], values: Sequence[Optional[float]], death_tol: float) -> List[DeathInterval]:
    """
    Maximal runs with B < death_tol that follow a step with B > death_tol.

    Steps without a value are skipped. A run that lasts to the end is a
    terminal onset with end None.
    """
    intervals: List[DeathInterval] = []
    alive_seen = False
    start: Optional[float] = None
    for t, b in zip(times, values):
        if b is None:
            continue
        if b < death_tol:
            if alive_seen and start is None:
                start = t
        else:
            if start is not None:
                intervals.append(DeathInterval(start, t))
                start = None
            alive_seen = True
    if start is not None:
        intervals.append(DeathInterval(start, None))
    return intervals


def analyze_trajectory(
    traj: Trajectory,
    mode: SeparabilityMode,
    bsa_config: Optional[BsaConfig] = None,
    rng: Optional[RngStream] = None,
    stride: int = 1,
    optimizer: Optional[OptimizerConfig] = None,
    death_tol: float = 1e-3,
    lambda_dom_threshold: float = 0.9,
) -> TrajectoryAnalysis:
    """
    Decompose every stride-th state, seeding each run with the previous one.

    Failed decompositions are recorded with their error and skipped.
    """
    bsa_config = bsa_config or BsaConfig()
    rng = rng or RngStream(0)
    steps = list(range(0, traj.n_steps + 1, max(1, stride)))
    streams = rng.split(len(steps))
    purity = traj.purity()
    with_tanglemeter = tuple(traj.partition.subsystem_dims) == TANGLEMETER_DIMS

    records: List[StepRecord] = []
    previous: Optional[BsaDecomposition] = None
    final_entangled = None
    for step, stream in zip(steps, streams):
        t = float(traj.times[step])
        try:
            result = bsa_decompose(traj.state(step), mode, bsa_config, stream, seed=previous)
        except EntsepError as exc:
            logger.warning("step %d (t=%g): decomposition failed: %s", step, t, exc)
            records.append(StepRecord(step, t, float(purity[step]), error=str(exc)))
            continue
        previous = result
        rank = 0
        lambda_dom = None
        tanglemeter = None
        if result.rho_ent is not None:
            final_entangled = result.rho_ent
            rank = rank_with_tolerance(result.rho_ent.matrix, bsa_config.rank_rel_tol)
            dominant = dominant_eigenvector(result.rho_ent)
            lambda_dom = dominant.lambda_dom
            if with_tanglemeter and lambda_dom > lambda_dom_threshold:
                beta, canonical = tanglemeter_of(dominant.vector, optimizer, stream)
                tanglemeter = beta if canonical.converged else None
        records.append(
            StepRecord(step, t, float(purity[step]), result.B, rank, lambda_dom, tanglemeter, result.converged)
        )
        logger.info("step %d t=%.4g B=%.6g rank=%d", step, t, result.B, rank)

    intervals = detect_death_intervals([r.t for r in records], [r.B for r in records], death_tol)
    return TrajectoryAnalysis(tuple(records), tuple(intervals), final_entangled)
