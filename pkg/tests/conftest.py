"""
Pytest fixtures shared across the test suite.

The fixtures provide the reference matrices (Pauli, Gell-Mann), the
two-qubit reference states (singlet, Werner family, product basis
states), small decomposition settings that keep the default suite fast,
and seeded random streams.
"""

import pytest

from entsep.analysis.oracles import ghz_like_state, product_basis_state, singlet_state, werner_state
from entsep.liouville import gell_mann, pauli
from entsep.models.analysis import OptimizerConfig
from entsep.models.decomposition import BsaConfig
from entsep.models.density import PartitionSpec, SeparabilityMode
from entsep.models.states import RngStream
from entsep.numerics import kron
from entsep.sampling import random_local_unitary


@pytest.fixture
def paulis():
    """σx, σy, σz as a dict keyed by axis."""
    return {axis: pauli(axis) for axis in "xyz"}


@pytest.fixture
def gell_manns():
    """λ1..λ8 keyed by their index."""
    return {i: gell_mann(i) for i in range(1, 9)}


@pytest.fixture
def rng():
    """A fresh stream with a fixed seed for every test."""
    return RngStream(1234)


@pytest.fixture
def two_qubits():
    return PartitionSpec.of(2, 2)


@pytest.fixture
def assembly():
    """The qutrit ⊗ qubit ⊗ qubit partition of the relaxation model."""
    return PartitionSpec.of(3, 2, 2)


@pytest.fixture
def k_sep_2x2(two_qubits):
    return SeparabilityMode.k_separable(two_qubits)


@pytest.fixture
def singlet():
    return singlet_state()


@pytest.fixture
def zero_zero():
    """|00⟩⟨00|, an extreme point of the separable set."""
    return product_basis_state((2, 2), (0, 0))


@pytest.fixture
def werner():
    """Factory for Werner states ρ_W(p)."""
    return werner_state


@pytest.fixture
def ghz_like():
    return ghz_like_state((3, 2, 2))


@pytest.fixture
def fast_bsa():
    """
    Settings that converge quickly on two-qubit inputs.

    Fewer samples and a coarser width floor than the defaults; the
    accuracy targets of the tests still hold for N = 4.
    """
    return BsaConfig(sample_factor=10, width_floor=1e-2, max_iterations=120)


@pytest.fixture
def fast_optimizer():
    return OptimizerConfig(n_starts=8, max_iterations=300)


@pytest.fixture
def random_unitary():
    """Factory for Haar-random local unitaries U_1⊗…⊗U_K over the given dimensions."""

    def make(dims, rng):
        return kron(*random_local_unitary(PartitionSpec(tuple(dims)), rng))

    return make
