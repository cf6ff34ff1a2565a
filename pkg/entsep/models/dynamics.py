"""
Types of the qutrit ⊗ qubit ⊗ qubit relaxation model and its trajectories.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from entsep.errors import ConfigError, InvalidInputError
from entsep.liouville import LiouvilleVector, build_basis, devectorize
from entsep.models.analysis import Tanglemeter
from entsep.models.density import DensityMatrix, PartitionSpec

MODEL_DIMS = (3, 2, 2)


@dataclass(frozen=True)
class LindbladModel:
    """
    Static couplings and noise of the 12-level model.

    Attributes:
        f: Couplings of λ₁, λ₂, λ₃ on the qutrit.
        f4: Coupling of λ₄ ⊗ σ_x on qutrit and first qubit.
        f6: Coupling of λ₆ ⊗ σ_x on qutrit and second qubit.
        eps1: σ_z splitting of the first qubit.
        eps2: σ_z splitting of the second qubit.
        noise_cov: 3 x 3 covariance of the fluctuations of f.
    """

    f: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    f4: float = 0.0
    f6: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0
    noise_cov: Tuple[Tuple[float, ...], ...] = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))

    def __post_init__(self) -> None:
        f = tuple(float(v) for v in self.f)
        if len(f) != 3:
            raise InvalidInputError(f"model needs three couplings f, got {len(f)}")
        object.__setattr__(self, "f", f)
        c = np.array(self.noise_cov, dtype=float)
        if c.shape != (3, 3):
            raise InvalidInputError(f"noise covariance must be 3x3, got shape {c.shape}")
        if np.max(np.abs(c - c.T)) > 1e-12:
            raise InvalidInputError("noise covariance must be symmetric")
        lowest = float(np.linalg.eigvalsh(0.5 * (c + c.T))[0])
        if lowest < -1e-10:
            raise InvalidInputError(f"noise covariance must be positive semidefinite (min eigenvalue {lowest:.3e})")
        object.__setattr__(self, "noise_cov", tuple(tuple(float(v) for v in row) for row in c))

    @property
    def covariance(self) -> np.ndarray:
        return np.array(self.noise_cov)

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["f"] = list(self.f)
        out["noise_cov"] = [list(row) for row in self.noise_cov]
        return out


@dataclass(frozen=True, eq=False)
class GeneratorMatrices:
    """
    Real Liouville-space generators: ṙ = (drift − relaxation) r.

    Attributes:
        drift: Antisymmetric unitary part.
        relaxation: Symmetric positive part from the noise.
    """

    drift: np.ndarray
    relaxation: np.ndarray

    @property
    def generator(self) -> np.ndarray:
        return self.drift - self.relaxation


@dataclass(frozen=True)
class DynamicsConfig:
    """
    Integration and analysis settings.

    Attributes:
        dt: RK4 step.
        t_end: Final time.
        stride: Analyse every stride-th step.
        death_tol: B below this counts as separable.
        lambda_dom_threshold: Dominance needed before a tanglemeter is recorded.
        monitor_positivity: Check the spectrum of every integrated state.
        initial_state: "ghz-like" or a path to a density-matrix file.
        initial_mixing: Weight p of I/N in the start state (1 − p) ρ₀ + p I/N.
    """

    dt: float = 1e-3
    t_end: float = 25.0
    stride: int = 50
    death_tol: float = 1e-3
    lambda_dom_threshold: float = 0.9
    monitor_positivity: bool = True
    initial_state: str = "ghz-like"
    initial_mixing: float = 0.0

    def __post_init__(self) -> None:
        if not self.dt > 0 or not self.t_end > 0:
            raise ConfigError("dynamics.dt and dynamics.t_end must be positive")
        if self.stride < 1:
            raise ConfigError("dynamics.stride must be >= 1")
        if not self.death_tol > 0:
            raise ConfigError("dynamics.death_tol must be positive")
        if not 0.0 <= self.initial_mixing < 1.0:
            raise ConfigError("dynamics.initial_mixing must lie in [0, 1)")

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Integrated Liouville vectors on a uniform time grid.

    Attributes:
        partition: Subsystem structure.
        times: Grid of shape (n + 1,).
        vectors: Liouville vectors of shape (n + 1, N²).
        positivity_violations: Steps whose state had an eigenvalue below −1e-8.
    """

    partition: PartitionSpec
    times: np.ndarray
    vectors: np.ndarray
    positivity_violations: Tuple[int, ...] = field(default=())

    @property
    def n_steps(self) -> int:
        return int(len(self.times) - 1)

    def purity(self) -> np.ndarray:
        return np.sum(self.vectors ** 2, axis=1)

    def liouville(self, step: int) -> LiouvilleVector:
        return LiouvilleVector(self.partition.total_dim, self.vectors[step])

    def state(self, step: int) -> DensityMatrix:
        """Density matrix at ``step``, tiny negative eigenvalues clipped."""
        n = self.partition.total_dim
        m = devectorize(self.liouville(step), build_basis(n))
        values, vectors = np.linalg.eigh(m)
        values = np.clip(values, 0.0, None)
        m = (vectors * values) @ vectors.conj().T
        return DensityMatrix(self.partition, m / np.trace(m).real)


@dataclass(frozen=True)
class StepRecord:
    """Analysis of one trajectory step; optional fields are None when undefined."""

    step: int
    t: float
    purity: float
    B: Optional[float] = None
    rank: Optional[int] = None
    lambda_dom: Optional[float] = None
    tanglemeter: Optional[Tanglemeter] = None
    converged: Optional[bool] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class DeathInterval:
    """
    A run of steps with B below the death tolerance after B was above it.

    end is None when the run lasts to the end of the trajectory.
    """

    start: float
    end: Optional[float]

    @property
    def revived(self) -> bool:
        return self.end is not None


@dataclass(frozen=True)
class TrajectoryAnalysis:
    """
    Per-step records, the detected death intervals and the entangled
    component of the last step that had one.
    """

    records: Tuple[StepRecord, ...]
    death_intervals: Tuple[DeathInterval, ...]
    final_entangled: Optional[DensityMatrix] = None

    def failed(self) -> List[StepRecord]:
        return [r for r in self.records if r.error is not None]
