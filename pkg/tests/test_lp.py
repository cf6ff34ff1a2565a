# tests/test_lp.py
import numpy as np
import pytest
from scipy.optimize import linprog

from entsep.analysis.benchmark import random_feasible_lp
from entsep.errors import InvalidInputError
from entsep.lp import LpProblem, LpStatus, enumerate_basic_solutions, lp_solve, lp_warm_solve
from entsep.models.states import RngStream


def test_small_problem_by_hand():
    """min x1 + 2x2 s.t. x1 + x2 = 1 picks x1 = 1."""
    p = LpProblem(np.array([[1.0, 1.0]]), np.array([1.0]), np.array([1.0, 2.0]))
    s = lp_solve(p)

    assert s.status is LpStatus.OPTIMAL
    assert s.objective_value == pytest.approx(1.0)
    assert np.allclose(s.x, [1.0, 0.0])
    assert s.support == (0,)


def test_infeasible_and_unbounded_are_statuses():
    """Neither outcome raises; both are reported on the solution."""
    infeasible = LpProblem(np.array([[1.0, 1.0]]), np.array([-1.0]), np.array([1.0, 1.0]))
    assert lp_solve(infeasible).status is LpStatus.INFEASIBLE

    unbounded = LpProblem(np.array([[1.0, -1.0]]), np.array([1.0]), np.array([0.0, -1.0]))
    s = lp_solve(unbounded)
    assert s.status is LpStatus.UNBOUNDED
    assert s.unbounded_column == 1


def test_inconsistent_dimensions_rejected():
    with pytest.raises(InvalidInputError, match="inconsistent"):
        LpProblem(np.ones((2, 3)), np.ones(3), np.ones(3))


def test_matches_enumeration_on_small_instances():
    """Optimal values agree with exhaustive basis enumeration."""
    for stream in RngStream(11).split(30):
        m = int(stream.integers(1, 5))
        n = int(stream.integers(m + 1, 9))
        p = random_feasible_lp(m, n, stream)
        ours = lp_solve(p)
        reference = enumerate_basic_solutions(p)

        assert ours.is_optimal and reference.is_optimal
        assert ours.objective_value == pytest.approx(reference.objective_value, abs=1e-9)
        # primal feasibility of the returned point
        assert np.allclose(p.a @ ours.x, p.b, atol=1e-8)
        assert np.all(ours.x >= 0.0)


def test_matches_linprog_on_medium_instances():
    """scipy's HiGHS solver agrees on the optimal value."""
    for stream in RngStream(5).split(5):
        p = random_feasible_lp(20, 120, stream)
        ours = lp_solve(p)
        reference = linprog(p.c, A_eq=p.a, b_eq=p.b, bounds=(0, None), method="highs")

        assert reference.status == 0
        assert ours.objective_value == pytest.approx(reference.fun, abs=1e-7)


def test_warm_start_from_optimal_basis_needs_no_pivots():
    """Re-solving from the optimal basis skips phase 1 and stops at once."""
    p = random_feasible_lp(6, 30, RngStream(2))
    cold = lp_solve(p)
    warm = lp_warm_solve(p, cold.basis)

    assert warm.warm_started
    assert warm.pivots == 0
    assert warm.objective_value == pytest.approx(cold.objective_value, abs=1e-12)


def test_warm_start_after_adding_columns_never_gets_worse():
    """Extra columns can only lower the optimum reached from the old basis."""
    rng = RngStream(9)
    p = random_feasible_lp(5, 20, rng)
    cold = lp_solve(p)
    extra = rng.normal((5, 15))
    bigger = p.with_columns(extra, rng.uniform(15))
    warm = lp_warm_solve(bigger, cold.basis)

    assert warm.objective_value <= cold.objective_value + 1e-12
    assert warm.objective_value == pytest.approx(lp_solve(bigger).objective_value, abs=1e-9)


def test_warm_start_rejects_bad_basis():
    p = random_feasible_lp(3, 6, RngStream(1))
    with pytest.raises(InvalidInputError):
        lp_warm_solve(p, [0, 0, 1])


def test_dump_writes_one_line_per_column(tmp_path):
    p = LpProblem(np.array([[1.0, 2.0, 3.0]]), np.array([1.0]), np.array([0.0, 1.0, 1.0]))
    path = tmp_path / "lp.txt"
    p.dump(path)
    lines = path.read_text().splitlines()

    assert lines[0] == "# rows=1 cols=3"
    assert lines[1].startswith("col 0 0.0 1.0")
    assert lines[-1] == "rhs 1.0"


@pytest.mark.slow
def test_enumeration_sweep():
    """The full 100-instance cross-check."""
    for stream in RngStream(0).split(100):
        m = int(stream.integers(1, 5))
        n = int(stream.integers(m + 1, 9))
        p = random_feasible_lp(m, n, stream)
        assert lp_solve(p).objective_value == pytest.approx(enumerate_basic_solutions(p).objective_value, abs=1e-9)
