# tests/test_subspace.py
import numpy as np
import pytest

from entsep.analysis.oracles import singlet_vector
from entsep.analysis.subspace import (
    beta_distribution,
    corner_states,
    dominant_eigenvector,
    max_product_overlap,
    product_overlap_candidates,
)
from entsep.errors import InvalidInputError
from entsep.models.analysis import EntangledSubspace
from entsep.models.density import DensityMatrix, SeparabilityMode
from entsep.models.states import RngStream
from entsep.sampling import random_mixed_state


def test_subspace_requires_orthonormal_columns(two_qubits):
    with pytest.raises(InvalidInputError, match="orthonormal"):
        EntangledSubspace(two_qubits, np.ones((4, 2)))
    with pytest.raises(InvalidInputError, match="shape"):
        EntangledSubspace(two_qubits, np.ones((3, 1)))


def test_subspace_from_vectors_orthonormalises(two_qubits, rng):
    vectors = rng.complex_normal((4, 2))
    subspace = EntangledSubspace.from_vectors(two_qubits, vectors)

    assert subspace.dim == 2
    p = subspace.projector()
    assert np.allclose(p @ p, p, atol=1e-12)


def test_singlet_overlap_is_one_half(two_qubits, k_sep_2x2, fast_optimizer):
    """No product state overlaps the singlet by more than 1/2."""
    subspace = EntangledSubspace(two_qubits, singlet_vector()[:, None])
    probe = max_product_overlap(subspace, k_sep_2x2, fast_optimizer, RngStream(0))

    assert probe.overlap == pytest.approx(0.5, abs=1e-9)
    assert probe.argmax.grouping == two_qubits.full_split()


def test_two_dimensional_subspaces_contain_products(two_qubits, k_sep_2x2, fast_optimizer, rng):
    """Every plane of C²⊗C² meets the product set."""
    subspace = EntangledSubspace.from_vectors(two_qubits, rng.complex_normal((4, 2)))
    probe = max_product_overlap(subspace, k_sep_2x2, fast_optimizer, rng)

    assert probe.overlap == pytest.approx(1.0, abs=1e-6)


def test_candidates_are_sorted_best_first(two_qubits, fast_optimizer, rng):
    subspace = EntangledSubspace.from_vectors(two_qubits, rng.complex_normal((4, 1)))
    candidates = product_overlap_candidates(subspace, two_qubits.full_split(), fast_optimizer, rng)
    values = [value for value, _ in candidates]

    assert len(candidates) == fast_optimizer.n_starts + 1
    assert values == sorted(values, reverse=True)


def test_bisep_mode_sees_products_across_a_cut(assembly, fast_optimizer, rng):
    """A state entangled only inside one group is product for that bipartition."""
    pair = (np.kron([1, 0, 0], [1, 0]) + np.kron([0, 1, 0], [0, 1])) / np.sqrt(2)
    v = np.kron(pair, [0, 1])
    subspace = EntangledSubspace(assembly, v[:, None].astype(complex))

    k_sep = max_product_overlap(subspace, SeparabilityMode.k_separable(assembly), fast_optimizer, rng)
    bisep = max_product_overlap(subspace, SeparabilityMode.bisep_augmented(assembly), fast_optimizer, rng)

    assert k_sep.overlap == pytest.approx(0.5, abs=1e-9)
    assert bisep.overlap == pytest.approx(1.0, abs=1e-9)
    assert bisep.argmax.grouping.label() == "2|0,1"


def test_corner_count_equals_rank(assembly, fast_optimizer):
    """One orthonormal corner per dimension of the range."""
    rho = random_mixed_state((3, 2, 2), RngStream(4), rank=3)
    subspace = EntangledSubspace.from_density(rho)
    corners = corner_states(subspace, SeparabilityMode.k_separable(assembly), fast_optimizer, RngStream(5))

    assert len(corners) == 3
    gram = np.array([[np.vdot(a.amplitudes, b.amplitudes) for b in corners] for a in corners])
    assert np.allclose(gram, np.eye(3), atol=1e-10)
    # every corner lies inside the range
    p = subspace.projector()
    for c in corners:
        assert np.allclose(p @ c.amplitudes, c.amplitudes, atol=1e-10)
    assert np.allclose(sum(c.projector() for c in corners), p, atol=1e-8)


def test_dominant_eigenvector(singlet, werner):
    dominant = dominant_eigenvector(werner(0.6))

    assert dominant.lambda_dom == pytest.approx(0.6 + 0.4 / 4)
    assert dominant.vector.fidelity(dominant_eigenvector(singlet).vector) == pytest.approx(1.0)


def test_beta_distribution_of_a_pure_component(ghz_like, fast_optimizer):
    """Every sample of a rank-one component is the component itself."""
    distribution = beta_distribution(ghz_like, 4, RngStream(0), fast_optimizer, threads=2)

    assert distribution.requested == 4
    assert distribution.failures == 0
    assert len(distribution.rows()) == 4
    for sample in distribution.samples:
        assert sample.weight == pytest.approx(1.0)
        assert sample.tanglemeter.beta_111 == pytest.approx(1.0, abs=1e-4)
    assert distribution.covariance.shape == (8, 8)
    assert np.allclose(distribution.covariance, 0.0, atol=1e-7)


def test_beta_weights_of_a_flat_component(fast_optimizer):
    """On (|ψ₁⟩⟨ψ₁| + |ψ₂⟩⟨ψ₂|)/2 every sample carries weight 1/d_E = 1/2."""
    ghz = np.zeros(12, dtype=complex)
    ghz[[0, 7]] = 1.0 / np.sqrt(2.0)
    flipped = np.zeros(12, dtype=complex)
    flipped[[2, 5]] = 1.0 / np.sqrt(2.0)
    rho = DensityMatrix.from_array(0.5 * (np.outer(ghz, ghz) + np.outer(flipped, flipped)), (3, 2, 2))
    distribution = beta_distribution(rho, 4, RngStream(2), fast_optimizer)

    assert distribution.samples
    weights = [s.weight for s in distribution.samples]
    assert weights == pytest.approx([0.5] * len(weights))
    assert np.mean(weights) == pytest.approx(1.0 / 2)


def test_beta_distribution_edge_cases(ghz_like, singlet):
    """No samples asked means no samples; other partitions are refused."""
    empty = beta_distribution(ghz_like, 0, RngStream(0))
    assert empty.samples == () and empty.mean is None and empty.failure_fraction == 0.0

    with pytest.raises(InvalidInputError, match="3x2x2"):
        beta_distribution(singlet, 3, RngStream(0))


def test_empty_subspace_cannot_be_searched(two_qubits):
    subspace = EntangledSubspace(two_qubits, np.zeros((4, 0)))
    with pytest.raises(InvalidInputError, match="empty"):
        product_overlap_candidates(subspace, two_qubits.full_split())


def test_subspace_from_density_uses_relative_threshold(two_qubits):
    rho = DensityMatrix.from_array(np.diag([0.7, 0.3 - 1e-9, 1e-9, 0.0]), (2, 2))

    assert EntangledSubspace.from_density(rho, 1e-6).dim == 2
    assert EntangledSubspace.from_density(rho, 1e-12).dim == 3
