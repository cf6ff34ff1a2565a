# tests/test_tanglemeter.py
import numpy as np
import pytest

from entsep.analysis.tanglemeter import (
    MONOMIAL_LABELS,
    NilpotentBasis,
    assemble_canonical,
    canonicalize_322,
    nilpotent_log,
    tanglemeter_of,
)
from entsep.errors import InvalidInputError
from entsep.models.analysis import OptimizerConfig, Tanglemeter
from entsep.models.states import PureState, RngStream
from entsep.sampling import haar_random_vector, random_product_state

SMALL = Tanglemeter(
    beta_110=0.12, beta_210=0.05, beta_201=0.08, beta_111=0.15,
    beta_101=0.04 + 0.03j, beta_011=-0.02 + 0.06j,
)


def _local_rotation(state, rng, random_unitary):
    u = random_unitary((3, 2, 2), rng)
    return PureState.normalized(u @ state.amplitudes)


def test_monomial_products_vanish():
    """Every pairwise product of raising monomials is zero."""
    monomials = NilpotentBasis.standard().monomials()
    for a in monomials.values():
        for b in monomials.values():
            assert np.allclose(a @ b, 0.0)


def test_monomials_raise_the_reference_to_their_label():
    """A monomial sends |000⟩ to the level labels it names."""
    reference = NilpotentBasis.reference()
    for label, op in NilpotentBasis.standard().monomials().items():
        labelled = (op @ reference).reshape(3, 2, 2)[::-1, ::-1, ::-1]
        assert labelled[int(label[0]), int(label[1]), int(label[2])] == pytest.approx(1.0)
        assert np.sum(np.abs(labelled)) == pytest.approx(1.0)


def test_product_states_have_zero_tanglemeter(assembly, fast_optimizer, rng):
    for _ in range(5):
        p = random_product_state(assembly, rng).assembled
        beta, canonical = tanglemeter_of(p, fast_optimizer, rng)

        assert canonical.converged
        assert canonical.achieved_reference_population == pytest.approx(1.0, abs=1e-9)
        assert np.max(np.abs(beta.as_row())) < 1e-6


def test_ghz_like_state(ghz_like):
    """β_111 = 1 and nothing else; the two basis products tie as references."""
    psi = PureState.normalized(ghz_like.eigen().eigenvectors[:, 0])
    beta, canonical = tanglemeter_of(psi, OptimizerConfig(), RngStream(0))

    assert canonical.converged
    assert canonical.degenerate
    assert beta.beta_111 == pytest.approx(1.0, abs=1e-4)
    others = np.delete(beta.as_row(), MONOMIAL_LABELS.index("111"))
    assert np.max(np.abs(others)) < 1e-4
    assert canonical.achieved_reference_population == pytest.approx(0.5, abs=1e-6)


def test_assembled_canonical_state_roundtrips(fast_optimizer):
    """Canonicalising exp(Σβ·monomial)|000⟩ gives back β."""
    psi = assemble_canonical(SMALL)
    beta, canonical = tanglemeter_of(psi, fast_optimizer, RngStream(2))

    assert canonical.converged
    assert not canonical.degenerate
    assert np.allclose(beta.as_row(), SMALL.as_row(), atol=1e-6)
    # the assembled state is already in canonical form
    assert np.allclose(canonical.vector, psi.amplitudes, atol=1e-6)


def test_tanglemeter_is_invariant_under_local_unitaries(fast_optimizer, random_unitary):
    psi = assemble_canonical(SMALL)
    for stream in RngStream(7).split(3):
        rotated = _local_rotation(psi, stream, random_unitary)
        beta, canonical = tanglemeter_of(rotated, fast_optimizer, stream)

        assert canonical.converged
        assert np.allclose(beta.invariants(), SMALL.invariants(), atol=1e-6)


def test_canonical_amplitudes_are_normalised(fast_optimizer, rng):
    psi = PureState.normalized(haar_random_vector(12, rng))
    canonical = canonicalize_322(psi, fast_optimizer, rng)

    assert np.linalg.norm(canonical.vector) == pytest.approx(1.0)
    assert canonical.norm_factor ** 2 == pytest.approx(canonical.achieved_reference_population)
    assert nilpotent_log(canonical).beta_111 == canonical.alpha_111


def test_canonicalisation_needs_twelve_dimensions():
    with pytest.raises(InvalidInputError, match="12-dimensional"):
        canonicalize_322(PureState.basis(4, 0))


@pytest.mark.slow
def test_local_invariance_on_random_states(random_unitary):
    """Haar states and their local rotations share invariants; ties are skipped."""
    optimizer = OptimizerConfig()
    compared = agreed = 0
    for stream in RngStream(0).split(50):
        psi = PureState.normalized(haar_random_vector(12, stream))
        a, ca = tanglemeter_of(psi, optimizer, stream)
        b, cb = tanglemeter_of(_local_rotation(psi, stream, random_unitary), optimizer, stream)
        if ca.degenerate or cb.degenerate or not (ca.converged and cb.converged):
            continue
        compared += 1
        agreed += np.allclose(a.invariants(), b.invariants(), atol=1e-5)

    assert compared >= 25
    assert agreed == compared
