"""
Equality-form linear programming: minimize c·x subject to A x = b, x >= 0.

Two-phase revised simplex on a dense basis. The basis inverse is kept
explicitly, updated by eta (rank-one) transformations after every pivot and
rebuilt from an LU factorisation every ``refactor_every`` pivots. Pricing is
Dantzig's rule with a Harris ratio test; after ``bland_after`` pivots without
progress in the objective the solver switches to Bland's rule until the
objective moves again. Solves against the basis are refined by one step of
iterative refinement.

Infeasible and unbounded problems are reported through LpSolution.status.
A basis that turns numerically singular or loses primal feasibility ends the
current attempt; LpBreakdownError is raised once the cold retries fail too.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from entsep.errors import InvalidInputError, LpBreakdownError

logger = logging.getLogger(__name__)

DEFAULT_FEASIBILITY_TOL = 1e-8
DEFAULT_PIVOT_TOL = 1e-9
DEFAULT_SUPPORT_TOL = 1e-9
OPTIMALITY_TOL = 1e-9
MAX_CONDITION = 1e13
WARM_MAX_CONDITION = 1e10
HARRIS_TOL = 1e-10
LOST_FEASIBILITY_TOL = 1e-7
PROGRESS_TOL = 1e-12


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LpProblem:
    """
    minimize c·x subject to A x = b, x >= 0.

    Attributes:
        a: Constraint matrix, shape (n_rows, n_cols).
        b: Right-hand side, shape (n_rows,).
        c: Objective, shape (n_cols,).
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        c = np.array(self.c, dtype=float).reshape(-1)
        if a.ndim != 2 or a.shape[0] != b.size or a.shape[1] != c.size:
            raise InvalidInputError(
                f"inconsistent LP dimensions: A {a.shape}, b {b.shape}, c {c.shape}"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise InvalidInputError("LP data must be finite")
        for arr in (a, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def n_rows(self) -> int:
        return int(self.a.shape[0])

    @property
    def n_cols(self) -> int:
        return int(self.a.shape[1])

    def with_columns(self, extra_a: np.ndarray, extra_c: np.ndarray) -> "LpProblem":
        """Append columns, keeping the existing ones at their indices."""
        return LpProblem(np.hstack([self.a, np.asarray(extra_a, dtype=float)]), self.b, np.concatenate([self.c, extra_c]))

    def dump(self, path: Path) -> None:
        """
        Write A, b, c as plain text for external cross-checks.

        One line per column: ``col <j> <c_j> <a_1j> ... <a_mj>``, then a
        final ``rhs <b_1> ... <b_m>`` line.
        """
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# rows={self.n_rows} cols={self.n_cols}\n")
            for j in range(self.n_cols):
                values = " ".join(repr(float(v)) for v in self.a[:, j])
                fh.write(f"col {j} {float(self.c[j])!r} {values}\n")
            fh.write("rhs " + " ".join(repr(float(v)) for v in self.b) + "\n")


@dataclass(frozen=True, eq=False)
class LpSolution:
    """
    Result of a simplex run.

    Attributes:
        status: optimal, infeasible or unbounded.
        x: Primal values (nonnegative), zeros unless optimal.
        objective_value: c·x at optimum (nan otherwise).
        basis: Original column indices of the final basis.
        support: Indices with x_i > support_tol.
        pivots: Number of pivots performed over both phases.
        phase1_residual: Sum of artificial values at the end of phase 1.
        unbounded_column: Column that escapes to infinity when unbounded.
        reduced_costs: Phase-2 reduced costs of the original columns.
        duals: Simplex multipliers y of the rows at optimum, so that
            reduced_costs = c − yᵀA.
        warm_started: Whether phase 1 was skipped.
    """

    status: LpStatus
    x: np.ndarray
    objective_value: float
    basis: Tuple[int, ...]
    support: Tuple[int, ...]
    pivots: int = 0
    phase1_residual: float = 0.0
    unbounded_column: Optional[int] = None
    reduced_costs: Optional[np.ndarray] = field(default=None, repr=False)
    duals: Optional[np.ndarray] = field(default=None, repr=False)
    warm_started: bool = False

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class RevisedSimplex:
    """
    Two-phase revised simplex solver for one problem.

    The instance owns its working storage and is not thread-safe; create one
    per problem. A solve makes up to three attempts: from the supplied basis
    (when it is nonsingular and primal feasible), cold, and cold under
    Bland's rule from the first pivot. LpBreakdownError is raised only when
    all of them break down.
    """

    def __init__(
        self,
        problem: LpProblem,
        feasibility_tol: float = DEFAULT_FEASIBILITY_TOL,
        pivot_tol: float = DEFAULT_PIVOT_TOL,
        support_tol: float = DEFAULT_SUPPORT_TOL,
        bland_after: int = 200,
        refactor_every: int = 50,
        max_pivots: Optional[int] = None,
    ) -> None:
        self.problem = problem
        self.feasibility_tol = feasibility_tol
        self.pivot_tol = pivot_tol
        self.support_tol = support_tol
        self.bland_after = bland_after
        self.refactor_every = refactor_every
        m, n = problem.n_rows, problem.n_cols
        self.max_pivots = max_pivots if max_pivots is not None else 10 * (m + n) + 1000
        if m > n:
            logger.warning("LP has more rows (%d) than columns (%d)", m, n)

        # rows with negative rhs are flipped so the artificial start is feasible
        self._signs = np.where(problem.b < 0, -1.0, 1.0)
        self._a = problem.a * self._signs[:, None]
        self._b = problem.b * self._signs
        self._full = np.hstack([self._a, np.eye(m)])
        self._b_scale = 1.0 + float(np.max(np.abs(self._b))) if m else 1.0
        self._harris = HARRIS_TOL * self._b_scale
        self.pivots = 0
        self._reset()

    # Basis bookkeeping

    def _reset(self) -> None:
        m, n = self.problem.n_rows, self.problem.n_cols
        self._basis = np.arange(n, n + m)
        self._b_inv = np.eye(m)
        self._since_refactor = 0
        self._attempt_pivots = 0

    def _refactor(self, max_condition: float = MAX_CONDITION) -> None:
        m = self.problem.n_rows
        if m == 0:
            return
        basis_matrix = self._full[:, self._basis]
        cond = np.linalg.cond(basis_matrix)
        if not np.isfinite(cond) or cond > max_condition:
            raise LpBreakdownError(f"basis matrix is numerically singular (condition {cond:.3e})")
        lu = linalg.lu_factor(basis_matrix)
        self._b_inv = linalg.lu_solve(lu, np.eye(m))
        self._since_refactor = 0
        logger.debug("refactorised basis after %d pivots (cond %.2e)", self.pivots, cond)

    def _pivot(self, row: int, entering: int, direction: np.ndarray) -> None:
        pivot_row = self._b_inv[row] / direction[row]
        self._b_inv -= np.outer(direction, pivot_row)
        self._b_inv[row] = pivot_row
        self._basis[row] = entering
        self.pivots += 1
        self._attempt_pivots += 1
        self._since_refactor += 1
        if self._attempt_pivots > self.max_pivots:
            raise LpBreakdownError(f"simplex exceeded {self.max_pivots} pivots")
        if self._since_refactor >= self.refactor_every:
            self._refactor()

    def _solve_basis(self, v: np.ndarray, basis_matrix: np.ndarray) -> np.ndarray:
        """B⁻¹ v with one step of iterative refinement."""
        x = self._b_inv @ v
        return x + self._b_inv @ (v - basis_matrix @ x)

    def _primal(self) -> np.ndarray:
        return self._solve_basis(self._b, self._full[:, self._basis])

    # Core loop

    def _iterate(
        self, cost: np.ndarray, allowed: np.ndarray, use_bland: bool = False
    ) -> Tuple[LpStatus, Optional[int], np.ndarray]:
        """Run simplex pivots for ``cost`` until optimal or unbounded."""
        stalled = 0
        sticky_bland = use_bland
        best = np.inf
        while True:
            basis_matrix = self._full[:, self._basis]
            x_b = self._solve_basis(self._b, basis_matrix)
            if x_b.size and float(x_b.min()) < -LOST_FEASIBILITY_TOL * self._b_scale:
                raise LpBreakdownError(f"basis lost primal feasibility ({float(x_b.min()):.3e})")
            x_pos = np.maximum(x_b, 0.0)

            objective = float(cost[self._basis] @ x_pos)
            if objective < best - PROGRESS_TOL * (1.0 + abs(objective)):
                stalled = 0
                use_bland = sticky_bland
            else:
                stalled += 1
                if not use_bland and stalled >= self.bland_after:
                    logger.debug("switching to Bland's rule after %d stalled pivots", stalled)
                    use_bland = True
            best = min(best, objective)

            c_b = cost[self._basis]
            y = c_b @ self._b_inv
            y = y + (c_b - y @ basis_matrix) @ self._b_inv
            reduced = cost - y @ self._full
            candidates = np.where(allowed, reduced, np.inf)
            candidates[self._basis] = np.inf

            if use_bland:
                eligible = np.flatnonzero(candidates < -OPTIMALITY_TOL)
                if eligible.size == 0:
                    return LpStatus.OPTIMAL, None, reduced
                entering = int(eligible[0])
            else:
                entering = int(np.argmin(candidates))
                if not candidates[entering] < -OPTIMALITY_TOL:
                    return LpStatus.OPTIMAL, None, reduced

            direction = self._solve_basis(self._full[:, entering], basis_matrix)
            rows = np.flatnonzero(direction > self.pivot_tol)
            if rows.size == 0:
                return LpStatus.UNBOUNDED, entering, reduced

            ratios = x_pos[rows] / direction[rows]
            if use_bland:
                theta = float(ratios.min())
                ties = rows[ratios <= theta * (1.0 + 1e-9) + 1e-14]
                leaving = int(ties[np.argmin(self._basis[ties])])
            else:
                # Harris: among rows within the relaxed bound take the largest pivot
                bound = float(((x_pos[rows] + self._harris) / direction[rows]).min())
                ties = rows[ratios <= bound]
                leaving = int(ties[np.argmax(direction[ties])])
            self._pivot(leaving, entering, direction)

    def _drive_out_artificials(self) -> None:
        n = self.problem.n_cols
        for row in range(self.problem.n_rows):
            if self._basis[row] < n:
                continue
            row_values = self._b_inv[row] @ self._a
            row_values[self._basis[self._basis < n]] = 0.0
            j = int(np.argmax(np.abs(row_values)))
            if abs(row_values[j]) <= self.pivot_tol:
                # redundant constraint: the artificial stays basic at zero
                continue
            self._pivot(row, j, self._solve_basis(self._full[:, j], self._full[:, self._basis]))

    def _checked_basis(self, starting_basis: Sequence[int]) -> np.ndarray:
        m, n = self.problem.n_rows, self.problem.n_cols
        basis = np.array(list(starting_basis), dtype=int)
        if basis.size != m or len(set(basis.tolist())) != m or np.any(basis < 0) or np.any(basis >= n):
            raise InvalidInputError(f"starting basis must hold {m} distinct column indices in [0, {n})")
        return basis

    def _warm_basis_ok(self, basis: np.ndarray) -> bool:
        self._reset()
        self._basis = basis.copy()
        try:
            self._refactor(WARM_MAX_CONDITION)
        except LpBreakdownError:
            logger.debug("warm basis is ill-conditioned; falling back to a cold start")
            return False
        lowest = float(self._primal().min(initial=0.0))
        if lowest < -self.feasibility_tol:
            logger.debug("warm basis is infeasible (min x_B %.3e); falling back to a cold start", lowest)
            return False
        return True

    def solve(self, starting_basis: Optional[Sequence[int]] = None) -> LpSolution:
        attempts: List[Tuple[str, Optional[np.ndarray]]] = []
        if starting_basis is not None:
            attempts.append(("warm", self._checked_basis(starting_basis)))
        attempts += [("cold", None), ("bland", None)]

        failure: Optional[LpBreakdownError] = None
        for kind, basis in attempts:
            if basis is not None and not self._warm_basis_ok(basis):
                continue
            try:
                return self._attempt(warm=basis is not None, use_bland=kind == "bland")
            except LpBreakdownError as exc:
                logger.info("%s simplex attempt broke down: %s", kind, exc)
                failure = exc
        assert failure is not None
        raise failure

    def _attempt(self, warm: bool, use_bland: bool) -> LpSolution:
        m, n = self.problem.n_rows, self.problem.n_cols
        originals = np.zeros(n + m, dtype=bool)
        originals[:n] = True

        phase1_residual = 0.0
        if not warm:
            self._reset()
            phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
            self._iterate(phase1_cost, np.ones(n + m, dtype=bool), use_bland)
            self._refactor()
            phase1_residual = float(np.maximum(self._primal(), 0.0)[self._basis >= n].sum())
            if phase1_residual > self.feasibility_tol * self._b_scale:
                logger.info("LP infeasible: phase-1 residual %.3e", phase1_residual)
                return LpSolution(
                    LpStatus.INFEASIBLE, np.zeros(n), float("nan"), tuple(), tuple(),
                    pivots=self.pivots, phase1_residual=phase1_residual,
                )
            self._drive_out_artificials()

        cost = np.concatenate([self.problem.c, np.zeros(m)])
        status, escaping, reduced = self._iterate(cost, originals, use_bland)
        basis = tuple(int(j) for j in self._basis if j < n)
        if status is LpStatus.UNBOUNDED:
            return LpSolution(
                LpStatus.UNBOUNDED, np.zeros(n), float("-inf"), basis, tuple(),
                pivots=self.pivots, phase1_residual=phase1_residual, unbounded_column=escaping,
            )

        self._refactor()
        basis_matrix = self._full[:, self._basis]
        x_b = self._solve_basis(self._b, basis_matrix)
        c_b = cost[self._basis]
        y = c_b @ self._b_inv
        y = y + (c_b - y @ basis_matrix) @ self._b_inv
        if float(x_b.min(initial=0.0)) < -1e-10 * self._b_scale:
            logger.debug("clipping basic value %.3e to zero", float(x_b.min()))
        x = np.zeros(n + m)
        x[self._basis] = np.maximum(x_b, 0.0)
        x = x[:n]
        residual = float(np.max(np.abs(self.problem.a @ x - self.problem.b), initial=0.0))
        if residual > self.feasibility_tol * self._b_scale:
            raise LpBreakdownError(f"final solution violates A x = b by {residual:.3e}")
        support = tuple(int(j) for j in np.flatnonzero(x > self.support_tol))
        return LpSolution(
            LpStatus.OPTIMAL,
            x,
            float(self.problem.c @ x),
            basis,
            support,
            pivots=self.pivots,
            phase1_residual=phase1_residual,
            reduced_costs=reduced[:n],
            duals=y * self._signs,
            warm_started=warm,
        )


def lp_solve(
    p: LpProblem,
    feasibility_tol: float = DEFAULT_FEASIBILITY_TOL,
    pivot_tol: float = DEFAULT_PIVOT_TOL,
    support_tol: float = DEFAULT_SUPPORT_TOL,
) -> LpSolution:
    """Cold two-phase solve."""
    return RevisedSimplex(p, feasibility_tol, pivot_tol, support_tol).solve()


def lp_warm_solve(
    p: LpProblem,
    starting_basis: Sequence[int],
    feasibility_tol: float = DEFAULT_FEASIBILITY_TOL,
    pivot_tol: float = DEFAULT_PIVOT_TOL,
    support_tol: float = DEFAULT_SUPPORT_TOL,
) -> LpSolution:
    """
    Solve starting from ``starting_basis``.

    Phase 1 is skipped when the basis is nonsingular and primal feasible;
    otherwise the solver falls back to a cold start.

    Raises:
        InvalidInputError: If the basis does not hold n_rows distinct valid indices.
    """
    return RevisedSimplex(p, feasibility_tol, pivot_tol, support_tol).solve(starting_basis)


def enumerate_basic_solutions(p: LpProblem, tol: float = 1e-9) -> LpSolution:
    """
    Optimum by exhaustive search over all bases.

    Exponential in the problem size; meant for cross-checking the simplex on
    small bounded instances with full row rank.
    """
    m, n = p.n_rows, p.n_cols
    best: Optional[Tuple[float, np.ndarray, Tuple[int, ...]]] = None
    for cols in combinations(range(n), m):
        sub = p.a[:, cols]
        if np.linalg.matrix_rank(sub) < m:
            continue
        x_b = np.linalg.solve(sub, p.b)
        if float(x_b.min(initial=0.0)) < -tol:
            continue
        value = float(p.c[list(cols)] @ x_b)
        if best is None or value < best[0] - tol:
            x = np.zeros(n)
            x[list(cols)] = np.maximum(x_b, 0.0)
            best = (value, x, tuple(cols))
    if best is None:
        return LpSolution(LpStatus.INFEASIBLE, np.zeros(n), float("nan"), tuple(), tuple())
    value, x, cols = best
    support = tuple(int(j) for j in np.flatnonzero(x > DEFAULT_SUPPORT_TOL))
    return LpSolution(LpStatus.OPTIMAL, x, value, cols, support)
