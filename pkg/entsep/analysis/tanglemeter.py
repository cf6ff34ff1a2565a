"""
Canonical form and tanglemeter of a qutrit ⊗ qubit ⊗ qubit pure state.

Levels are labelled relative to the reference product state: label 0 is
the reference level of each factor. The nilpotent raising operators act
on standard basis vectors with the reference level stored last, so a
standard index i of a factor of dimension d carries the label d − 1 − i.

Canonicalisation runs in three stages:

  (a) local unitaries that maximise the reference population |ψ_000|²,
      i.e. rotate the closest product state onto |000⟩. This makes
      ψ_100, ψ_200, ψ_010 and ψ_001 vanish;
  (b) a qutrit rotation within levels {1, 2} that moves all of the
      (ψ_111, ψ_211) pair into ψ_111;
  (c) diagonal phases that make ψ_110, ψ_210, ψ_201 and ψ_111 share the
      phase of ψ_000, which is then made real and positive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from entsep.analysis.subspace import product_overlap_candidates
from entsep.errors import EntsepError, InvalidInputError
from entsep.models.analysis import TANGLEMETER_DIMS, CanonicalState, EntangledSubspace, OptimizerConfig, Tanglemeter
from entsep.models.density import PartitionSpec
from entsep.models.states import PureState, RngStream
from entsep.numerics import kron

logger = logging.getLogger(__name__)

MONOMIAL_LABELS = ("110", "210", "201", "111", "101", "011")
REAL_LABELS = ("110", "210", "201", "111")
VANISHING_LABELS = ("100", "200", "010", "001", "211")


@dataclass(frozen=True)
class NilpotentBasis:
    """
    Raising operators from the reference level.

    Attributes:
        u_plus: Qutrit, reference level to label 2 (single 1 at row 1, column 3).
        t_plus: Qutrit, reference level to label 1 (single 1 at row 2, column 3).
        sigma_plus: Qubit, reference level to label 1 (single 1 at row 1, column 2).
    """

    u_plus: np.ndarray
    t_plus: np.ndarray
    sigma_plus: np.ndarray

    @classmethod
    def standard(cls) -> "NilpotentBasis":
        u = np.zeros((3, 3), dtype=complex)
        u[0, 2] = 1.0
        t = np.zeros((3, 3), dtype=complex)
        t[1, 2] = 1.0
        s = np.zeros((2, 2), dtype=complex)
        s[0, 1] = 1.0
        return cls(u, t, s)

    def monomials(self) -> Dict[str, np.ndarray]:
        """12 x 12 operators creating each canonical component from |000⟩."""
        i3 = np.eye(3)
        i2 = np.eye(2)
        u, t, s = self.u_plus, self.t_plus, self.sigma_plus
        return {
            "110": kron(t, s, i2),
            "210": kron(u, s, i2),
            "201": kron(u, i2, s),
            "111": kron(t, s, s),
            "101": kron(t, i2, s),
            "011": kron(i3, s, s),
        }

    @staticmethod
    def reference() -> np.ndarray:
        """|000⟩ in the standard ordering (last basis vector of every factor)."""
        return np.eye(12, dtype=complex)[11]


@lru_cache(maxsize=1)
def _monomials() -> Dict[str, np.ndarray]:
    monomials = NilpotentBasis.standard().monomials()
    for a in monomials.values():
        for b in monomials.values():
            if np.any(np.abs(a @ b) > 0):
                raise EntsepError("nilpotent monomials must have vanishing pairwise products")
    return monomials


def _labelled(vector: np.ndarray) -> np.ndarray:
    """Amplitude tensor indexed by level labels [a, b, c]."""
    return np.asarray(vector).reshape(TANGLEMETER_DIMS)[::-1, ::-1, ::-1]


def _standard(labelled: np.ndarray) -> np.ndarray:
    return labelled[::-1, ::-1, ::-1].reshape(-1)


def _amp(labelled: np.ndarray, label: str) -> complex:
    return complex(labelled[int(label[0]), int(label[1]), int(label[2])])


def _to_reference(factor: np.ndarray) -> np.ndarray:
    """Unitary sending ``factor`` to the last standard basis vector."""
    f = factor / np.linalg.norm(factor)
    complement = linalg.null_space(f.conj()[None, :])
    q = np.column_stack([complement, f])
    return q.conj().T


def _reference_search(
    psi: PureState, optimizer: OptimizerConfig, rng: RngStream
) -> Tuple[float, List[np.ndarray], bool]:
    """Stage (a): closest product state, plus a flag for distinct ties."""
    partition = PartitionSpec(TANGLEMETER_DIMS)
    subspace = EntangledSubspace(partition, psi.amplitudes[:, None])
    candidates = product_overlap_candidates(subspace, partition.full_split(), optimizer, rng)
    best_value, best_factors = candidates[0]
    degenerate = False
    for value, factors in candidates[1:]:
        if best_value - value > optimizer.degeneracy_tol:
            break
        fidelity = np.prod([abs(np.vdot(f, g)) ** 2 for f, g in zip(factors, best_factors)])
        if fidelity < 1.0 - 1e-6:
            degenerate = True
            break
    return best_value, best_factors, degenerate


def _phase_residual(labelled: np.ndarray, floor: float) -> float:
    ref = _amp(labelled, "000")
    worst = 0.0
    for label in REAL_LABELS:
        a = _amp(labelled, label)
        if abs(a) > floor and abs(ref) > floor:
            worst = max(worst, abs(np.angle(a / ref)))
    return worst


def _fix_phases(labelled: np.ndarray, floor: float) -> np.ndarray:
    """
    Stage (c): qutrit phases φ1, φ2 and qubit phases χ1, ξ1 on the labelled levels.

    Conditions θ_abc + φ_a + χ_b + ξ_c = 0 for the four real amplitudes, with
    θ the phase relative to ψ_000; conditions on vanishing amplitudes drop out.
    """
    ref = _amp(labelled, "000")
    rows = {
        "110": [1, 0, 1, 0],
        "210": [0, 1, 1, 0],
        "201": [0, 1, 0, 1],
        "111": [1, 0, 1, 1],
    }
    a_rows = []
    rhs = []
    for label, row in rows.items():
        amp = _amp(labelled, label)
        if abs(amp) > floor:
            a_rows.append(row)
            rhs.append(-np.angle(amp / ref))
    out = labelled * np.exp(-1j * np.angle(ref))
    if not a_rows:
        return out
    phi1, phi2, chi1, xi1 = np.linalg.lstsq(np.array(a_rows, dtype=float), np.array(rhs), rcond=None)[0]
    qutrit = np.exp(1j * np.array([0.0, phi1, phi2]))
    qubit1 = np.exp(1j * np.array([0.0, chi1]))
    qubit2 = np.exp(1j * np.array([0.0, xi1]))
    return out * qutrit[:, None, None] * qubit1[None, :, None] * qubit2[None, None, :]


def canonicalize_322(
    psi: PureState,
    optimizer: Optional[OptimizerConfig] = None,
    rng: Optional[RngStream] = None,
) -> CanonicalState:
    """
    Canonical representative of the local orbit of a 12-dimensional state.

    Args:
        psi: Normalised state, ordering qutrit ⊗ qubit₁ ⊗ qubit₂.
        optimizer: Multi-start settings and residual tolerances.
        rng: Stream for the random starts.

    Raises:
        InvalidInputError: If psi is not 12-dimensional.
    """
    optimizer = optimizer or OptimizerConfig()
    rng = rng or RngStream(optimizer.seed)
    if psi.dim != 12:
        raise InvalidInputError(f"canonicalisation needs a 12-dimensional state, got {psi.dim}")
    floor = 1e-12

    _, factors, degenerate = _reference_search(psi, optimizer, rng)
    local = kron(*(_to_reference(f) for f in factors))
    lab = _labelled(local @ psi.amplitudes)

    w = lab[1:3, 1, 1].copy()
    size = np.linalg.norm(w)
    if size > floor:
        rotation = np.array([[w[0].conj(), w[1].conj()], [-w[1], w[0]]]) / size
        lab[1:3] = np.einsum("ij,jbc->ibc", rotation, lab[1:3])
    elif np.linalg.norm(lab[1:3]) > optimizer.amplitude_tol:
        # any rotation in levels {1, 2} keeps the stage (b) objective at zero
        degenerate = True

    lab = _fix_phases(lab, floor)

    ref = _amp(lab, "000")
    amplitude_residual = max(abs(_amp(lab, label)) for label in VANISHING_LABELS)
    phase_residual = _phase_residual(lab, floor)
    converged = amplitude_residual < optimizer.amplitude_tol and phase_residual < optimizer.phase_tol
    if not converged:
        logger.debug(
            "canonicalisation missed tolerances: amplitude %.3e phase %.3e", amplitude_residual, phase_residual
        )

    alpha = {label: _amp(lab, label) / ref for label in MONOMIAL_LABELS}
    return CanonicalState(
        alpha_110=abs(alpha["110"]),
        alpha_210=abs(alpha["210"]),
        alpha_201=abs(alpha["201"]),
        alpha_111=abs(alpha["111"]),
        alpha_101=alpha["101"],
        alpha_011=alpha["011"],
        norm_factor=float(ref.real),
        achieved_reference_population=float(abs(ref) ** 2),
        converged=bool(converged),
        amplitude_residual=float(amplitude_residual),
        phase_residual=float(phase_residual),
        degenerate=bool(degenerate),
        vector=_standard(lab),
    )


def nilpotent_log(c: CanonicalState) -> Tanglemeter:
    """
    Logarithm of the polynomial 1 + Σ α·monomial.

    Every product of two monomials vanishes, so log(1 + x) = x and the
    coefficients carry over unchanged.
    """
    _monomials()
    return Tanglemeter(
        beta_110=c.alpha_110,
        beta_210=c.alpha_210,
        beta_201=c.alpha_201,
        beta_111=c.alpha_111,
        beta_101=c.alpha_101,
        beta_011=c.alpha_011,
    )


def assemble_canonical(t: Tanglemeter) -> PureState:
    """Normalised exp(Σ β·monomial)|000⟩."""
    monomials = _monomials()
    coefficients = {
        "110": t.beta_110, "210": t.beta_210, "201": t.beta_201,
        "111": t.beta_111, "101": t.beta_101, "011": t.beta_011,
    }
    generator = sum(coefficients[label] * monomials[label] for label in MONOMIAL_LABELS)
    return PureState.normalized(linalg.expm(generator) @ NilpotentBasis.reference())


def tanglemeter_of(
    psi: PureState, optimizer: Optional[OptimizerConfig] = None, rng: Optional[RngStream] = None
) -> Tuple[Tanglemeter, CanonicalState]:
    """Canonicalise and take the nilpotent logarithm in one call."""
    canonical = canonicalize_322(psi, optimizer, rng)
    return nilpotent_log(canonical), canonical
