"""
Types produced when characterising an essentially entangled component.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from entsep.errors import ConfigError, InvalidInputError
from entsep.models.density import DensityMatrix, PartitionSpec
from entsep.models.states import ProductState, PureState
from entsep.numerics import eig_hermitian

TANGLEMETER_DIMS = (3, 2, 2)
BETA_COLUMNS = (
    "beta_110", "beta_210", "beta_201", "beta_111",
    "re_beta_101", "im_beta_101", "re_beta_011", "im_beta_011",
)


@dataclass(frozen=True)
class OptimizerConfig:
    """
    Settings of the local-search optimisers over product states.

    Attributes:
        n_starts: Random starts per grouping (plus one deterministic start).
        max_iterations: Alternating sweeps per start.
        overlap_tol: Stop a start when a sweep improves the overlap by less.
        amplitude_tol: Canonical amplitudes that must vanish, vanish below this.
        phase_tol: Allowed phase mismatch of the real canonical amplitudes.
        degeneracy_tol: Starts within this of the best overlap count as ties.
        seed: Seed used when the caller passes no random stream.
    """

    n_starts: int = 24
    max_iterations: int = 500
    overlap_tol: float = 1e-15
    amplitude_tol: float = 1e-7
    phase_tol: float = 1e-6
    degeneracy_tol: float = 1e-9
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_starts < 1 or self.max_iterations < 1:
            raise ConfigError("optimizer.n_starts and optimizer.max_iterations must be >= 1")
        for name in ("overlap_tol", "amplitude_tol", "phase_tol", "degeneracy_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"optimizer.{name} must be positive")

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class EntangledSubspace:
    """
    Orthonormal basis of the range of an entangled component.

    Attributes:
        partition: Subsystem structure of the ambient space.
        basis_vectors: (N, d_E) array with orthonormal columns.
    """

    partition: PartitionSpec
    basis_vectors: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.basis_vectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != self.partition.total_dim:
            raise InvalidInputError(f"subspace basis has shape {v.shape}, expected ({self.partition.total_dim}, d)")
        gram = v.conj().T @ v
        if v.shape[1] and np.max(np.abs(gram - np.eye(v.shape[1]))) > 1e-10:
            raise InvalidInputError("subspace basis vectors are not orthonormal")
        v.setflags(write=False)
        object.__setattr__(self, "basis_vectors", v)

    @classmethod
    def from_density(cls, rho: DensityMatrix, rel_tol: float = 1e-6) -> "EntangledSubspace":
        """Eigenvectors of ρ whose eigenvalues exceed rel_tol times the largest."""
        eig = eig_hermitian(rho.matrix)
        keep = eig.eigenvalues > rel_tol * eig.eigenvalues[0]
        return cls(rho.partition, eig.eigenvectors[:, keep])

    @classmethod
    def from_vectors(cls, partition: PartitionSpec, vectors: np.ndarray) -> "EntangledSubspace":
        """Span of the columns of ``vectors``."""
        return cls(partition, linalg.orth(np.asarray(vectors, dtype=complex)))

    @property
    def dim(self) -> int:
        return int(self.basis_vectors.shape[1])

    def projector(self) -> np.ndarray:
        v = self.basis_vectors
        return v @ v.conj().T


@dataclass(frozen=True, eq=False)
class ProductOverlap:
    """Best product state found for a subspace and its overlap ⟨p|Π|p⟩."""

    overlap: float
    argmax: ProductState


@dataclass(frozen=True)
class DominantEigen:
    lambda_dom: float
    vector: PureState


@dataclass(frozen=True)
class Tanglemeter:
    """
    Coefficients of the nilpotent polynomial generating the canonical state.

    The first four are nonnegative reals; beta_101 and beta_011 are complex.
    """

    beta_110: float = 0.0
    beta_210: float = 0.0
    beta_201: float = 0.0
    beta_111: float = 0.0
    beta_101: complex = 0j
    beta_011: complex = 0j

    def as_row(self) -> np.ndarray:
        """Real coefficient vector in BETA_COLUMNS order."""
        return np.array([
            self.beta_110, self.beta_210, self.beta_201, self.beta_111,
            self.beta_101.real, self.beta_101.imag, self.beta_011.real, self.beta_011.imag,
        ])

    def invariants(self) -> np.ndarray:
        """The quantities compared across a local orbit."""
        return np.array([
            self.beta_110, self.beta_210, self.beta_201, self.beta_111,
            abs(self.beta_101), abs(self.beta_011),
        ])

    def to_dict(self) -> Dict[str, float]:
        return dict(zip(BETA_COLUMNS, (float(v) for v in self.as_row())))


@dataclass(frozen=True, eq=False)
class CanonicalState:
    """
    Local-orbit representative of a 3⊗2⊗2 pure state.

    Attributes:
        alpha_*: Canonical amplitudes divided by the reference amplitude.
        norm_factor: Reference amplitude of the normalised canonical vector.
        achieved_reference_population: Its square.
        converged: Whether the residuals are within tolerance.
        amplitude_residual: Largest magnitude among the amplitudes that must vanish.
        phase_residual: Largest phase mismatch of the amplitudes that must be real.
        degenerate: Ties in the reference search or an undetermined qutrit rotation.
        vector: Canonical vector, standard ordering qutrit ⊗ qubit₁ ⊗ qubit₂.
    """

    alpha_110: float
    alpha_210: float
    alpha_201: float
    alpha_111: float
    alpha_101: complex
    alpha_011: complex
    norm_factor: float
    achieved_reference_population: float
    converged: bool
    amplitude_residual: float
    phase_residual: float
    degenerate: bool = False
    vector: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> Dict:
        return {
            "alpha_110": self.alpha_110,
            "alpha_210": self.alpha_210,
            "alpha_201": self.alpha_201,
            "alpha_111": self.alpha_111,
            "alpha_101": [self.alpha_101.real, self.alpha_101.imag],
            "alpha_011": [self.alpha_011.real, self.alpha_011.imag],
            "norm_factor": self.norm_factor,
            "achieved_reference_population": self.achieved_reference_population,
            "converged": self.converged,
            "amplitude_residual": self.amplitude_residual,
            "phase_residual": self.phase_residual,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class BetaSample:
    weight: float
    tanglemeter: Tanglemeter


@dataclass(frozen=True, eq=False)
class BetaDistribution:
    """
    Weighted tanglemeter samples of random states in an entangled subspace.

    mean and covariance are None when no sample survived.
    """

    samples: Tuple[BetaSample, ...]
    requested: int
    failures: int
    mean: Optional[np.ndarray]
    covariance: Optional[np.ndarray]

    @property
    def failure_fraction(self) -> float:
        return self.failures / self.requested if self.requested else 0.0

    def rows(self) -> List[List[float]]:
        return [[s.weight] + [float(v) for v in s.tanglemeter.as_row()] for s in self.samples]
