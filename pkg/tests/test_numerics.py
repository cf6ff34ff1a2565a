# tests/test_numerics.py
import numpy as np
import pytest

from entsep.errors import InvalidInputError
from entsep.numerics import (
    eig_hermitian,
    expm_skew_hermitian,
    frobenius,
    kron,
    min_eigenvalue,
    partial_transpose,
    rank_with_tolerance,
    require_hermitian,
    unitary_from_hermitian,
)


def test_eig_hermitian_sorts_descending_and_reconstructs(rng):
    """Eigenvalues come back in descending order and rebuild the matrix."""
    z = rng.complex_normal((5, 5))
    h = z + z.conj().T
    eig = eig_hermitian(h)

    assert np.all(np.diff(eig.eigenvalues) <= 0)
    assert np.allclose(eig.reconstruct(), h, atol=1e-12)


def test_require_hermitian_names_worst_entry():
    """The error message points at the entry that breaks Hermiticity."""
    m = np.eye(3, dtype=complex)
    m[0, 2] = 0.5

    with pytest.raises(InvalidInputError, match=r"m\[0,2\]|m\[2,0\]"):
        require_hermitian(m)


def test_require_hermitian_rejects_non_square():
    with pytest.raises(InvalidInputError, match="square"):
        require_hermitian(np.zeros((2, 3)))


def test_expm_skew_hermitian_is_unitary(rng, paulis):
    """exp(iH) of a Hermitian H is unitary and matches the closed form for σz."""
    z = rng.complex_normal((4, 4))
    u = unitary_from_hermitian(z + z.conj().T)
    assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-12)

    theta = 0.7
    u = expm_skew_hermitian(1j * theta * paulis["z"])
    assert np.allclose(u, np.diag([np.exp(1j * theta), np.exp(-1j * theta)]))


def test_expm_skew_hermitian_rejects_hermitian_argument():
    with pytest.raises(InvalidInputError, match="skew-Hermitian"):
        expm_skew_hermitian(np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_rank_with_tolerance():
    """Eigenvalues below the relative threshold do not count."""
    m = np.diag([1.0, 1e-3, 1e-9, 0.0])

    assert rank_with_tolerance(m, 1e-6) == 2
    assert rank_with_tolerance(m, 1e-2) == 1
    assert rank_with_tolerance(np.zeros((3, 3))) == 0


def test_kron_orders_leftmost_first():
    a = np.array([1.0, 0.0])
    b = np.array([0.0, 1.0, 0.0])

    # |0⟩ ⊗ |1⟩ sits at index 0 * 3 + 1
    assert np.argmax(kron(a, b)) == 1


def test_partial_transpose_of_singlet(singlet):
    """The singlet's partial transpose has the single negative eigenvalue −1/2."""
    pt = partial_transpose(singlet.matrix, (2, 2), (1,))

    assert min_eigenvalue(pt) == pytest.approx(-0.5)
    # transposing both sides is the full transpose
    full = partial_transpose(singlet.matrix, (2, 2), (0, 1))
    assert frobenius(full - singlet.matrix.T) < 1e-14


def test_partial_transpose_shape_mismatch():
    with pytest.raises(InvalidInputError, match="does not match"):
        partial_transpose(np.eye(4), (2, 3), (1,))
