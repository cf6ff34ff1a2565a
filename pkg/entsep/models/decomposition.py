"""
Configuration and result types of the separable/entangled decomposition.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from entsep.errors import ConfigError
from entsep.models.density import DensityMatrix, SeparabilityMode
from entsep.models.states import ProductState, PureState


@dataclass(frozen=True)
class BsaConfig:
    """
    Parameters of the iterative LP decomposition.

    Sample counts left as None scale with the dimension as
    min(sample_factor · N², sample_cap).

    Attributes:
        n_product_vertices: Fresh product samples per iteration (all groupings together).
        n_entangled_vertices: Fresh generic samples per iteration.
        clones_per_survivor: Perturbed copies of each support vertex (default N²).
        sample_factor: Multiplier c in c · N².
        sample_cap: Upper bound on any per-class count.
        width_0: Initial perturbation width.
        width_decay: Geometric decay factor of the width per iteration.
        width_floor: Width below which the run may be declared converged.
        convergence_tol: |B_t − B_{t−patience}| threshold.
        patience: Look-back distance for the convergence rule.
        max_iterations: Hard iteration cap.
        support_tol: Weights above this count as nonzero.
        feasibility_tol: LP feasibility tolerance.
        rank_check_floor: B above which the rank bound is enforced.
        rank_rel_tol: Relative eigenvalue threshold for the rank of rho_ent.
        extremality_margin: Required gap of the product-overlap probe below 1.
        perturb_input_on_breakdown: Retry on (1−η)ρ + ηI/N after a breakdown.
        breakdown_eta: The η of that retry.
        pricing_rounds: Column-pricing re-solves per iteration (0 disables pricing).
        pricing_starts: Random starting points of the product pricing search.
        pricing_sweeps: Alternating sweeps per product pricing search.
        settle_rank: Also require rank(rho_ent) <= rank bound before declaring
            convergence while B > rank_check_floor.
    """

    n_product_vertices: Optional[int] = None
    n_entangled_vertices: Optional[int] = None
    clones_per_survivor: Optional[int] = None
    sample_factor: int = 20
    sample_cap: int = 4000
    width_0: float = 0.3
    width_decay: float = 0.9
    width_floor: float = 1e-3
    convergence_tol: float = 1e-6
    patience: int = 5
    max_iterations: int = 200
    support_tol: float = 1e-9
    feasibility_tol: float = 1e-8
    rank_check_floor: float = 1e-3
    rank_rel_tol: float = 1e-6
    extremality_margin: float = 1e-4
    perturb_input_on_breakdown: bool = True
    breakdown_eta: float = 1e-8
    pricing_rounds: int = 5
    pricing_starts: int = 3
    pricing_sweeps: int = 50
    settle_rank: bool = True

    def __post_init__(self) -> None:
        for name in ("convergence_tol", "support_tol", "feasibility_tol", "rank_check_floor",
                     "rank_rel_tol", "extremality_margin", "breakdown_eta", "width_floor"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"bsa.{name} must be positive")
        if not 0.0 < self.width_decay < 1.0:
            raise ConfigError("bsa.width_decay must lie in (0, 1)")
        if self.width_0 < 0:
            raise ConfigError("bsa.width_0 must be >= 0")
        if self.patience < 1 or self.max_iterations < 1:
            raise ConfigError("bsa.patience and bsa.max_iterations must be >= 1")
        for name in ("pricing_rounds", "pricing_starts"):
            if getattr(self, name) < 0:
                raise ConfigError(f"bsa.{name} must be >= 0")
        if self.pricing_sweeps < 1:
            raise ConfigError("bsa.pricing_sweeps must be >= 1")
        for name in ("n_product_vertices", "n_entangled_vertices", "clones_per_survivor"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ConfigError(f"bsa.{name} must be >= 0")

    def _scaled(self, dim: int) -> int:
        return min(self.sample_factor * dim * dim, self.sample_cap)

    def product_count(self, dim: int) -> int:
        return self.n_product_vertices if self.n_product_vertices is not None else self._scaled(dim)

    def entangled_count(self, dim: int) -> int:
        return self.n_entangled_vertices if self.n_entangled_vertices is not None else self._scaled(dim)

    def clone_count(self, dim: int) -> int:
        if self.clones_per_survivor is not None:
            return self.clones_per_survivor
        return min(dim * dim, self.sample_cap)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class BsaDecomposition:
    """
    ρ = (1 − B) ρ_sep + B ρ_ent with B minimal.

    rho_ent is None when B <= support_tol (the state is separable) and
    rho_sep is None when 1 − B <= support_tol.

    Attributes:
        B: Weight of the essentially entangled component.
        product_weights: a_i of the product vertices.
        product_vertices: The product vertices with nonzero basic weight.
        entangled_weights: b_i of the entangled vertices.
        entangled_vertices: The entangled vertices with nonzero basic weight.
        rho_sep: Separable component.
        rho_ent: Essentially entangled component.
        iterations_used: LP iterations performed.
        converged: Whether the convergence rule fired.
        history: B_t per iteration.
        input_perturbation: η if the input was mixed with I/N after a breakdown.
    """

    B: float
    product_weights: np.ndarray
    product_vertices: Tuple[ProductState, ...]
    entangled_weights: np.ndarray
    entangled_vertices: Tuple[PureState, ...]
    rho_sep: Optional[DensityMatrix]
    rho_ent: Optional[DensityMatrix]
    iterations_used: int
    converged: bool
    mode: SeparabilityMode
    history: Tuple[float, ...] = field(default=())
    input_perturbation: float = 0.0

    @property
    def is_separable(self) -> bool:
        return self.rho_ent is None

    @property
    def weight_sum(self) -> float:
        return float(np.sum(self.product_weights) + np.sum(self.entangled_weights))

    @property
    def support_size(self) -> int:
        return int(len(self.product_vertices) + len(self.entangled_vertices))

    def reconstruct(self) -> np.ndarray:
        """(1 − B) ρ_sep + B ρ_ent."""
        parts: List[np.ndarray] = []
        if self.rho_sep is not None:
            parts.append((1.0 - self.B) * self.rho_sep.matrix)
        if self.rho_ent is not None:
            parts.append(self.B * self.rho_ent.matrix)
        return np.sum(parts, axis=0)


@dataclass(frozen=True)
class VerificationReport:
    """
    Post-hoc checks of a decomposition.

    Fields left as None were skipped (for instance the rank check when B is
    below rank_check_floor).
    """

    reconstruction_residual: float
    weight_sum_residual: float
    sep_min_eigenvalue: Optional[float]
    ent_min_eigenvalue: Optional[float]
    support_size: int
    support_cap: int
    ent_rank: Optional[int]
    rank_bound: int
    rank_ok: Optional[bool]
    extremality_overlap: Optional[float]
    extremality_ok: Optional[bool]

    @property
    def passed(self) -> bool:
        return (
            self.reconstruction_residual < 1e-7
            and self.weight_sum_residual < 1e-8
            and self.support_size <= self.support_cap
            and self.rank_ok is not False
            and self.extremality_ok is not False
        )

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


@dataclass(frozen=True)
class PptResult:
    """Partial-transpose test across one bipartition."""

    is_ppt: bool
    min_pt_eigenvalue: float
