import numpy as np
import pytest

from lossmodes.errors import (BandViolation, InvariantViolation,
                              PreconditionError, SolverError)
from lossmodes.models.components.enums import ModeClass
from lossmodes.models.system import LagrangianSystem
from lossmodes.services.asymptotic_service import AsymptoticService
from lossmodes.services.canonical_service import CanonicalService
from lossmodes.services.example_service import ExampleService
from lossmodes.services.linalg import greedy_match, numerical_rank, op_norm
from lossmodes.services.spectral_service import SpectralService
from lossmodes.services.system_service import SystemService

pytestmark = [pytest.mark.spectral]

CLOSED_FORM_BETAS = [0.0, 0.5, 1.0, 1.9, 2.0, 2.1, 3.0, 10.0, 100.0]


def _closed_form(beta):
    root = np.sqrt(complex(1.0 - (beta / 2.0) ** 2))
    return np.array([-0.5j * beta + root, -0.5j * beta - root])


@pytest.mark.parametrize("beta", CLOSED_FORM_BETAS)
def test_damped_oscillator_closed_form(oscillator, beta):
    can = CanonicalService.build_canonical(oscillator)
    es = SpectralService.eigensolve(
        CanonicalService.system_operator(can, beta))
    if beta == 2.0:
        assert np.abs(es.values + 1j).max() <= 1e-6
    else:
        _, mismatch = greedy_match(es.values, _closed_form(beta))
        assert mismatch <= 1e-10


def test_eigensolve_contract():
    with pytest.raises(SolverError):
        SpectralService.eigensolve(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(SolverError):
        SpectralService.eigensolve(np.ones((2, 3)))
    es = SpectralService.eigensolve(np.diag([1.0, 2.0j]))
    assert len(es) == 2
    assert np.allclose(np.linalg.norm(es.vectors, axis=0), 1.0)
    assert es.residuals.max() < 1e-14


def test_quality_factor():
    assert SpectralService.quality_factor(1.0 - 0.5j) == pytest.approx(1.0)
    assert SpectralService.quality_factor(-2.0 - 0.5j) == pytest.approx(2.0)
    assert SpectralService.quality_factor(3.0 + 0.0j) == float("inf")
    assert SpectralService.quality_factor(-1.0j) == 0.0
    with pytest.raises(InvariantViolation):
        SpectralService.quality_factor(1.0 + 0.1j)


def test_critically_damped_oscillator_modes():
    sys = ExampleService.build_damped_oscillator(2.0)
    can = CanonicalService.build_canonical(sys)
    ms = SpectralService.modes(can, 2.0)
    assert len(ms.overdamped()) == 2
    assert all(m.q_factor == 0.0 for m in ms)
    assert np.abs(ms.zetas + 1j).max() <= 1e-6


def test_underdamped_oscillator_has_no_overdamped_mode(oscillator):
    # beta = 1 is half the threshold 2 omega_max / b_min = 2.
    can = CanonicalService.build_canonical(oscillator)
    ms = SpectralService.modes(can, 1.0)
    assert ms.overdamped() == []
    for mode in ms:
        assert mode.q_factor == pytest.approx(np.sqrt(3.0) / 2.0)
        assert mode.mode_class is ModeClass.unclassified
    assert not ms.dichotomy_holds


def test_lossless_circuit_spectrum(circuit):
    can = CanonicalService.build_canonical(circuit)
    ms = SpectralService.modes(can, 0.0)
    expected = np.array([-np.sqrt(3.0), -1.0, 1.0, np.sqrt(3.0)])
    assert np.allclose(np.sort(ms.zetas.real), expected)
    assert np.abs(ms.zetas.imag).max() <= 1e-12
    assert all(m.q_factor == float("inf") for m in ms)
    assert SpectralService.check_symmetry(ms).passed


def test_free_mass_has_an_infinite_quality_factor_at_zero():
    sys = LagrangianSystem(alpha=[[1.0]], theta=[[0.0]], eta=[[0.0]],
                           r_mat=[[1.0]], beta=1.0)
    ms = SpectralService.modes(CanonicalService.build_canonical(sys), 1.0)
    at_zero = [m for m in ms if abs(m.zeta) <= 1e-12]
    damped = [m for m in ms if abs(m.zeta + 1j) <= 1e-12]
    assert len(at_zero) == 1 and len(damped) == 1
    assert at_zero[0].q_factor == float("inf")
    assert damped[0].q_factor == 0.0


def test_selective_overdamping_of_the_circuit(circuit):
    can = CanonicalService.build_canonical(circuit)
    ms = SpectralService.modes(can, 50.0)
    assert len(ms.overdamped()) == 2
    assert len(ms.oscillatory()) == 2
    assert ms.dichotomy_holds
    assert len(ms.of_class(ModeClass.sigma1)) == 1
    # The most damped mode comes first.
    assert ms[0].mode_class is ModeClass.sigma1
    assert ms[0].overdamped


@pytest.mark.slow
def test_spectral_symmetry(make_systems):
    systems = make_systems(50, seed=31, n_max=6) \
        + make_systems(50, seed=32, gyro=True, n_max=6)
    for k, sys in enumerate(systems):
        can = CanonicalService.build_canonical(sys)
        beta = 0.0 if k % 5 == 0 else sys.beta
        report = SpectralService.check_symmetry(
            SpectralService.modes(can, beta))
        assert report.passed, report.as_dict()
        if beta == 0.0:
            assert report.max_imag_at_zero <= 1e-8


def test_rayleigh_quotients(gyro_system):
    can = CanonicalService.build_canonical(gyro_system)
    beta = gyro_system.beta
    ms = SpectralService.modes(can, beta)
    scale = op_norm(ms.operator)
    for mode in ms:
        identities = SpectralService.rayleigh_identities(can, mode, beta)
        assert identities["frequency_residual"] <= 1e-8 * scale
        assert identities["damping_residual"] <= 1e-8 * scale
        if not mode.overdamped and np.isfinite(mode.q_factor):
            assert SpectralService.mode_quality_factor(can, mode, beta) \
                == pytest.approx(mode.q_factor, rel=1e-8)


def test_dichotomy_needs_the_hypothesis(oscillator):
    can = CanonicalService.build_canonical(oscillator)
    with pytest.raises(PreconditionError):
        SpectralService.dichotomy(CanonicalService.system_operator(can, 1.0))
    with pytest.raises(PreconditionError):
        SpectralService.dichotomy(np.eye(3))


@pytest.mark.slow
def test_dichotomy_counts_and_damping_bands(make_systems):
    for sys in make_systems(50, seed=33, partial=True):
        can = CanonicalService.build_canonical(sys)
        thr = AsymptoticService.thresholds(sys, can)
        beta = 3.0 * thr.beta_star
        n_r = SystemService.loss_fraction(sys).n_r
        d = SpectralService.dichotomy(
            CanonicalService.system_operator(can, beta))
        assert len(d.sigma1) == n_r
        assert len(d.sigma0) == 2 * sys.n - n_r
        assert d.ranks == (n_r, 2 * sys.n - n_r)
        assert max(d.projector_residuals().values()) <= 1e-8

        split = SpectralService.dichotomy_damping_split(
            d, thr.omega_max, thr.b_min, beta)
        assert split.max_high_q < 0.5
        assert split.min_high_damping >= beta * thr.b_min - thr.omega_max \
            - 1e-8 * beta * thr.b_min


def test_damping_split_rejects_a_wrong_band(circuit):
    can = CanonicalService.build_canonical(circuit)
    thr = AsymptoticService.thresholds(circuit, can)
    beta = 3.0 * thr.beta_star
    d = SpectralService.dichotomy(CanonicalService.system_operator(can, beta))
    with pytest.raises(BandViolation):
        SpectralService.dichotomy_damping_split(d, thr.omega_max,
                                                10.0 * thr.b_min, beta)


def test_disc_bounds_on_random_matrices():
    rng = np.random.default_rng(34)
    for _ in range(200):
        m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        assert SpectralService.eigenvalue_bounds_check(m).passed


def test_projector_rank_on_engineered_matrices():
    rng = np.random.default_rng(35)
    for k in range(50):
        n = int(rng.integers(2, 7))
        rank = int(rng.integers(1, n + 1))
        m = ExampleService.random_dissipative_matrix(n, rank, seed=k)
        d = SpectralService.dichotomy(m)
        im_m = (m - m.conj().T) / 2.0j
        assert d.ranks[1] == n - numerical_rank(im_m)
        assert np.allclose(SpectralService._schur_projector(m, d.r0), d.p0,
                           atol=1e-8)
