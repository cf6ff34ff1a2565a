# tests/test_oracles.py
import numpy as np
import pytest

from entsep.analysis.oracles import (
    WERNER_SWEEP,
    ghz_like_state,
    product_basis_state,
    werner_bsa_oracle,
    werner_closed_form,
    werner_min_pt_eigenvalue,
    werner_separable_threshold,
    werner_state,
)
from entsep.errors import InvalidInputError
from entsep.numerics import min_eigenvalue, partial_transpose


def test_separable_threshold_is_one_third():
    assert werner_separable_threshold() == pytest.approx(1.0 / 3.0, abs=1e-9)


@pytest.mark.parametrize("p", WERNER_SWEEP)
def test_oracle_matches_closed_form(p):
    """Bisection and the closed form (3p − 1)/2 agree on the sweep."""
    assert werner_bsa_oracle(p) == pytest.approx(werner_closed_form(p), abs=1e-9)


@pytest.mark.parametrize("p", [0.0, 0.25, 0.5, 0.9])
def test_partial_transpose_spectrum(p):
    pt = partial_transpose(werner_state(p).matrix, (2, 2), (1,))
    assert min_eigenvalue(pt) == pytest.approx(werner_min_pt_eigenvalue(p), abs=1e-12)


def test_oracle_accepts_a_given_threshold():
    assert werner_bsa_oracle(0.5, threshold=0.5) == 0.0
    assert werner_bsa_oracle(1.0, threshold=0.5) == pytest.approx(1.0)


def test_werner_parameter_range():
    with pytest.raises(InvalidInputError, match=r"\[0, 1\]"):
        werner_state(1.5)


def test_reference_states():
    ghz = ghz_like_state((3, 2, 2))
    assert ghz.purity == pytest.approx(1.0)
    assert ghz.matrix[0, 0] == pytest.approx(0.5)
    # |1⟩|1⟩|1⟩ sits at 1*4 + 1*2 + 1
    assert ghz.matrix[7, 7] == pytest.approx(0.5)

    basis = product_basis_state((2, 3), (1, 2))
    assert np.argmax(np.diag(basis.matrix).real) == 5
