# tests/test_dynamics.py
import numpy as np
import pytest
from scipy import linalg

from entsep.analysis.oracles import ghz_like_state
from entsep.config import load_config
from entsep.dynamics import (
    analyze_trajectory,
    build_generators,
    build_hamiltonian,
    build_relaxation,
    detect_death_intervals,
    evolve,
    rk4_propagator,
)
from entsep.errors import IntegrationError, InvalidInputError
from entsep.liouville import build_basis, vectorize
from entsep.models.decomposition import BsaConfig
from entsep.models.dynamics import MODEL_DIMS, DeathInterval, GeneratorMatrices, LindbladModel
from entsep.models.density import SeparabilityMode
from entsep.models.states import RngStream

NOISE = ((0.02, 0.005, 0.0), (0.005, 0.03, 0.0), (0.0, 0.0, 0.01))


@pytest.fixture(scope="module")
def basis():
    return build_basis(12)


@pytest.fixture
def model():
    return LindbladModel(f=(0.3, -0.2, 0.5), f4=0.6, f6=0.4, eps1=0.3, eps2=-0.1, noise_cov=NOISE)


@pytest.fixture
def r0(ghz_like, basis):
    return vectorize(ghz_like, basis)


def test_hamiltonian_is_hermitian(model):
    h = build_hamiltonian(model)

    assert h.shape == (12, 12)
    assert np.allclose(h, h.conj().T)


def test_generator_symmetries(model, basis):
    """Drift is antisymmetric, relaxation symmetric and positive; index 0 is inert."""
    mats = build_generators(model, basis)

    assert np.allclose(mats.drift, -mats.drift.T, atol=1e-12)
    assert np.allclose(mats.relaxation, mats.relaxation.T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(mats.relaxation)) > -1e-12
    for m in (mats.drift, mats.relaxation):
        assert np.allclose(m[0], 0.0) and np.allclose(m[:, 0], 0.0)


def test_trace_component_is_constant(model, basis, r0):
    traj = evolve(r0, build_generators(model, basis), 1e-2, 2.0, monitor_positivity=False)

    assert np.max(np.abs(traj.vectors[:, 0] - 1.0 / np.sqrt(12))) < 1e-9
    assert traj.n_steps == 200


def test_purity_is_conserved_without_noise(basis, r0):
    mats = build_generators(LindbladModel(f=(0.3, -0.2, 0.5), f4=0.6, f6=0.4, eps1=0.3), basis)
    traj = evolve(r0, mats, 1e-3, 1.0, monitor_positivity=False)

    assert np.max(np.abs(traj.purity() - 1.0)) < 1e-8


def test_purity_never_increases_under_pure_noise(basis, r0):
    mats = build_generators(LindbladModel(noise_cov=NOISE), basis)
    traj = evolve(r0, mats, 1e-2, 5.0)
    purity = traj.purity()

    assert np.all(np.diff(purity) <= 1e-12)
    assert purity[-1] < purity[0]
    assert traj.positivity_violations == ()


def test_rk4_error_shrinks_sixteenfold(model, basis, r0):
    """Halving the step cuts the global error by about 2⁴."""
    mats = build_generators(model, basis)
    exact = linalg.expm(mats.generator * 1.0) @ r0.components

    errors = []
    for dt in (0.05, 0.025):
        traj = evolve(r0, mats, dt, 1.0, monitor_positivity=False)
        errors.append(np.linalg.norm(traj.vectors[-1] - exact))

    assert 8.0 <= errors[0] / errors[1] <= 32.0


def test_rk4_propagator_of_zero_generator_is_identity():
    assert np.array_equal(rk4_propagator(np.zeros((4, 4)), 0.1), np.eye(4))


def test_evolve_input_checks(model, basis, r0):
    mats = build_generators(model, basis)
    with pytest.raises(InvalidInputError, match="dt"):
        evolve(r0, mats, 0.0, 1.0)
    with pytest.raises(InvalidInputError, match="generator shape"):
        evolve(r0, GeneratorMatrices(np.zeros((4, 4)), np.zeros((4, 4))), 0.1, 1.0)


def test_blow_up_raises_integration_error(r0):
    huge = GeneratorMatrices(np.zeros((144, 144)), -1e300 * np.eye(144))
    with np.errstate(all="ignore"):
        with pytest.raises(IntegrationError) as info:
            evolve(r0, huge, 1.0, 3.0, monitor_positivity=False)
    assert info.value.step == 1


def test_model_validation():
    with pytest.raises(InvalidInputError, match="positive semidefinite"):
        LindbladModel(noise_cov=((1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (0.0, 0.0, 0.0)))
    with pytest.raises(InvalidInputError, match="symmetric"):
        LindbladModel(noise_cov=((1.0, 0.5, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)))
    with pytest.raises(InvalidInputError, match="three couplings"):
        LindbladModel(f=(1.0, 2.0))


def test_death_intervals():
    """A revived run is closed; a run lasting to the end is terminal."""
    times = [0, 1, 2, 3, 4, 5, 6]
    values = [0.5, 1e-4, None, 1e-5, 0.2, 0.0, 0.0]
    intervals = detect_death_intervals(times, values, 1e-3)

    assert intervals == [DeathInterval(1, 4), DeathInterval(5, None)]
    assert intervals[0].revived and not intervals[1].revived


def test_separable_start_is_not_a_death():
    assert detect_death_intervals([0, 1, 2], [0.0, 0.0, 0.5], 1e-3) == []


def test_analyze_static_trajectory(ghz_like, assembly, basis, r0, fast_optimizer):
    """Without couplings the GHZ-like state stays pure: B = 1 and β_111 = 1 at every step."""
    mats = build_generators(LindbladModel(), basis)
    traj = evolve(r0, mats, 1e-3, 2e-3)
    analysis = analyze_trajectory(
        traj,
        SeparabilityMode.k_separable(assembly),
        BsaConfig(sample_factor=2),
        RngStream(0),
        optimizer=fast_optimizer,
    )

    assert [r.step for r in analysis.records] == [0, 1, 2]
    assert analysis.failed() == []
    assert analysis.death_intervals == ()
    for record in analysis.records:
        assert record.B == pytest.approx(1.0, abs=1e-9)
        assert record.rank == 1
        assert record.lambda_dom == pytest.approx(1.0)
        assert record.tanglemeter.beta_111 == pytest.approx(1.0, abs=1e-4)


def test_relaxation_leaves_the_maximally_mixed_state_alone(basis):
    """Noise on λ1 alone annihilates I/12 but damps a λ2 coherence."""
    relaxation = build_relaxation(LindbladModel(noise_cov=((1.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))), basis)
    identity = np.eye(12) / 12.0
    coherence = identity + 0.02 * np.kron(np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]]), np.eye(4))

    assert np.allclose(relaxation @ vectorize(identity, basis).components, 0.0, atol=1e-12)
    assert np.linalg.norm(relaxation @ vectorize(coherence, basis).components) > 1e-3


def test_strong_noise_ends_in_a_terminal_death(assembly, basis, r0, fast_optimizer):
    """Dephasing kills the GHZ coherence as e^(−8t): alive at t = 0.5, separable from t = 1 on."""
    noise = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    traj = evolve(r0, build_generators(LindbladModel(noise_cov=noise), basis), 1e-2, 2.0)
    analysis = analyze_trajectory(
        traj,
        SeparabilityMode.k_separable(assembly),
        BsaConfig(sample_factor=2, max_iterations=60),
        RngStream(0),
        stride=50,
        optimizer=fast_optimizer,
    )
    b = [r.B for r in analysis.records]

    assert b[0] == pytest.approx(1.0, abs=1e-9)
    assert b[1] > 1e-3
    assert all(value < 1e-3 for value in b[2:])
    assert len(analysis.death_intervals) == 1
    interval = analysis.death_intervals[0]
    assert interval.start == pytest.approx(1.0) and interval.end is None and not interval.revived


def test_preset_dies_and_revives(basis, fast_optimizer):
    """The preset state passes through a separable window around |210⟩ and becomes entangled again."""
    config = load_config(preset_name="fig3-like")
    rho0 = ghz_like_state(MODEL_DIMS).mixed_with_identity(config.dynamics.initial_mixing)
    traj = evolve(
        vectorize(rho0, basis), build_generators(config.model, basis), config.dynamics.dt, 3.7, monitor_positivity=False
    )
    # t = 0 and 3.7 sit at the GHZ-like state, t = 1.85 at |210⟩
    analysis = analyze_trajectory(
        traj,
        SeparabilityMode.bisep_augmented(traj.partition),
        config.bsa,
        RngStream(config.seed),
        stride=1850,
        optimizer=fast_optimizer,
        death_tol=config.dynamics.death_tol,
    )
    b = [r.B for r in analysis.records]

    assert [r.step for r in analysis.records] == [0, 1850, 3700]
    assert analysis.failed() == []
    assert b[0] > 0.05 and b[2] > 0.01
    assert b[1] < config.dynamics.death_tol
    assert len(analysis.death_intervals) == 1
    interval = analysis.death_intervals[0]
    assert interval.start == pytest.approx(1.85) and interval.end == pytest.approx(3.7)
    assert interval.revived
    assert analysis.records[0].rank <= 5 and analysis.records[2].rank <= 5
