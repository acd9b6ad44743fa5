import numpy as np
import pytest

from lossmodes.errors import (DegenerateFitError, InvariantViolation,
                              PreconditionError, UnsupportedRegimeError)
from lossmodes.models.circuit import CircuitParams
from lossmodes.models.components.enums import QTrend
from lossmodes.models.modes import PencilEig
from lossmodes.models.system import LagrangianSystem
from lossmodes.services.asymptotic_service import AsymptoticService
from lossmodes.services.canonical_service import CanonicalService
from lossmodes.services.example_service import ExampleService
from lossmodes.services.linalg import greedy_match
from lossmodes.services.pencil_service import PencilService
from lossmodes.services.system_service import SystemService

pytestmark = [pytest.mark.asymptotics]

SQRT2 = np.sqrt(2.0)


@pytest.fixture
def circuit_canonical(circuit):
    return CanonicalService.build_canonical(circuit)


def _claim(report, name):
    return next(claim for claim in report.claims if claim.name == name)


def test_loss_subspace_reassembles_omega(circuit_canonical):
    split = AsymptoticService.decompose_loss_subspace(circuit_canonical)
    assert split.n_r == 1
    assert split.kernel_basis.shape == (4, 3)
    assert split.reassembly_residual(circuit_canonical.omega) <= 1e-12


def test_lossless_system_has_no_loss_subspace():
    sys = LagrangianSystem(np.eye(2), np.zeros((2, 2)), np.eye(2),
                           np.zeros((2, 2)))
    with pytest.raises(InvariantViolation):
        AsymptoticService.decompose_loss_subspace(
            CanonicalService.build_canonical(sys))


def test_circuit_asymptotic_spectrum(circuit_canonical):
    asym = AsymptoticService.asymptotic_spectrum(circuit_canonical)
    assert asym.n_r == 1
    assert asym.kappa == 1
    assert len(asym) == 4
    assert asym.high_loss[0].b == pytest.approx(1.0)
    assert asym.high_loss[0].rho == 0.0
    rhos = [mode.rho for mode in asym.low_loss]
    assert rhos == pytest.approx([-SQRT2, 0.0, SQRT2])
    assert rhos[1] == 0.0
    assert not asym.degenerate
    assert asym.gram_residual() <= 1e-10


def test_predictions(circuit_canonical):
    asym = AsymptoticService.asymptotic_spectrum(circuit_canonical)
    predicted = AsymptoticService.predict_eigenvalues(asym, 100.0)
    assert len(predicted) == 4
    assert predicted[0] == pytest.approx(-100.0j)

    q = AsymptoticService.predict_q_factors(asym, 100.0)
    assert [p.trend for p in q] == [QTrend.vanishing, QTrend.growing,
                                    QTrend.vanishing, QTrend.growing]
    assert q[0].value == 0.0
    assert q[1].value == pytest.approx(q[3].value)
    assert q[1].value > 1.0

    with pytest.raises(PreconditionError):
        AsymptoticService.predict_eigenvalues(asym, 0.0)
    with pytest.raises(PreconditionError):
        AsymptoticService.predict_q_factors(asym, -1.0)


def test_thresholds(circuit, circuit_canonical, oscillator):
    thr = AsymptoticService.thresholds(circuit, circuit_canonical)
    assert thr.omega_max == pytest.approx(np.sqrt(3.0))
    assert thr.omega_min == pytest.approx(1.0)
    assert thr.b_min == pytest.approx(1.0)
    assert thr.beta_star == pytest.approx(2.0 * np.sqrt(3.0))
    assert thr.omega_norm == pytest.approx(thr.omega_max)

    thr = AsymptoticService.thresholds(
        oscillator, CanonicalService.build_canonical(oscillator))
    assert thr.beta_star == pytest.approx(2.0)


def test_thresholds_reject_a_foreign_canonical_form(circuit):
    uncoupled = ExampleService.build_circuit(CircuitParams(c12=float("inf")))
    with pytest.raises(InvariantViolation, match="cross-check"):
        AsymptoticService.thresholds(
            circuit, CanonicalService.build_canonical(uncoupled))


def test_gyroscopic_systems_are_out_of_scope(gyro_system):
    can = CanonicalService.build_canonical(gyro_system)
    with pytest.raises(UnsupportedRegimeError):
        AsymptoticService.thresholds(gyro_system, can)
    with pytest.raises(UnsupportedRegimeError):
        AsymptoticService.classify_overdamping(gyro_system, can, 1.0)


def test_complete_overdamping_of_the_oscillator(oscillator):
    can = CanonicalService.build_canonical(oscillator)
    report = AsymptoticService.classify_overdamping(oscillator, can, 3.0)
    assert report.regime == "complete"
    assert report.overdamped_count == 2
    assert _claim(report, "complete overdamping").holds
    assert report.claims_hold


def test_selective_overdamping_of_the_circuit(circuit, circuit_canonical):
    report = AsymptoticService.classify_overdamping(circuit,
                                                    circuit_canonical, 50.0)
    assert report.regime == "selective"
    assert (report.overdamped_count, report.oscillatory_count) == (2, 2)
    assert report.kappa == 1
    for name in ("high-loss modes overdamped", "kappa equals N_R",
                 "large-loss counts"):
        assert _claim(report, name).holds, name
    assert not _claim(report, "complete overdamping").applicable
    assert report.claims_hold
    assert report.as_dict()["thresholds"]["beta_star"] \
        == pytest.approx(2.0 * np.sqrt(3.0))


def test_below_threshold(circuit, circuit_canonical):
    report = AsymptoticService.classify_overdamping(circuit,
                                                    circuit_canonical, 1.0)
    assert report.regime == "below-threshold"
    assert report.claims_hold


def test_degenerate_systems_suppress_large_loss_claims():
    # Ker eta = Ker R = span(e2).
    sys = LagrangianSystem(np.eye(2), np.zeros((2, 2)), np.diag([1.0, 0.0]),
                           np.diag([1.0, 0.0]))
    can = CanonicalService.build_canonical(sys)
    report = AsymptoticService.classify_overdamping(sys, can, 100.0)
    assert not report.nondegenerate
    assert report.warnings
    assert not _claim(report, "kappa equals N_R").applicable
    assert not _claim(report, "large-loss counts").applicable


@pytest.mark.slow
def test_complete_overdamping_at_the_threshold(make_systems):
    for sys in make_systems(50, seed=41, full_rank=True):
        can = CanonicalService.build_canonical(sys)
        thr = AsymptoticService.thresholds(sys, can)
        report = AsymptoticService.classify_overdamping(sys, can,
                                                        thr.beta_star)
        assert report.overdamped_count == 2 * sys.n
        assert _claim(report, "complete overdamping").holds


@pytest.mark.slow
def test_large_loss_counts(make_systems):
    for sys in make_systems(50, seed=42, partial=True):
        can = CanonicalService.build_canonical(sys)
        thr = AsymptoticService.thresholds(sys, can)
        report = AsymptoticService.classify_overdamping(
            sys, can, 1e3 * thr.beta_star)
        n_r = SystemService.loss_fraction(sys).n_r
        assert report.kappa == n_r
        assert report.overdamped_count == 2 * n_r
        assert report.oscillatory_count == 2 * sys.n - 2 * n_r
        assert report.claims_hold


def test_asymptotic_error_orders(circuit_canonical):
    orders = AsymptoticService.asymptotic_error_orders(
        circuit_canonical, [1e2, 1e3, 1e4])
    assert orders.high_loss[0] == pytest.approx(-1.0, abs=0.3)
    fitted = [p for p in orders.low_loss_real if p is not None]
    assert fitted
    for p in fitted:
        assert p == pytest.approx(-2.0, abs=0.3)
    with pytest.raises(DegenerateFitError):
        AsymptoticService.asymptotic_error_orders(circuit_canonical, [1e2])


def test_oscillatory_q_growth(circuit, circuit_canonical):
    grid = np.geomspace(5.0, 500.0, 8)
    report = AsymptoticService.oscillatory_q_growth(circuit,
                                                    circuit_canonical, grid)
    assert report.passed
    assert len(report.q_values) == 2
    for series, slope in zip(report.q_values, report.slopes):
        assert series[-1] > series[0]
        assert slope is not None and slope > 0.5


def test_q_growth_preconditions(circuit, circuit_canonical, oscillator):
    with pytest.raises(DegenerateFitError):
        AsymptoticService.oscillatory_q_growth(circuit, circuit_canonical,
                                               [10.0])
    with pytest.raises(PreconditionError):
        AsymptoticService.oscillatory_q_growth(circuit, circuit_canonical,
                                               [1.0, 10.0])
    with pytest.raises(PreconditionError):
        AsymptoticService.oscillatory_q_growth(
            oscillator, CanonicalService.build_canonical(oscillator),
            [5.0, 10.0])


def test_track_modes_follows_the_spectrum(circuit_canonical):
    grid = np.linspace(0.5, 20.0, 40)
    tracked = AsymptoticService.track_modes(circuit_canonical, grid)
    assert tracked.zetas.shape == (40, 4)
    for beta, row in zip(tracked.betas, tracked.zetas):
        a = CanonicalService.system_operator(circuit_canonical, beta)
        _, mismatch = greedy_match(row, np.linalg.eigvals(a))
        assert mismatch <= 1e-8 * max(1.0, beta)
    with pytest.raises(PreconditionError):
        AsymptoticService.track_modes(circuit_canonical, [1.0, 3.0, 2.0])


@pytest.mark.parametrize("beta", [1.0, 3.0, 50.0])
def test_fundamental_inequalities(circuit, circuit_canonical, beta):
    thr = AsymptoticService.thresholds(circuit, circuit_canonical)
    for pe in PencilService.solve_pencil(circuit, beta):
        report = AsymptoticService.fundamental_inequalities(
            circuit, thr, pe.zeta, pe.q_vec, beta)
        assert report.passed, [c.as_dict() for c in report.checks]
        if -pe.zeta.imag >= thr.omega_max:
            assert report.certified_overdamped


def test_fundamental_inequalities_need_an_eigenpair(circuit,
                                                    circuit_canonical):
    thr = AsymptoticService.thresholds(circuit, circuit_canonical)
    bad = PencilEig(1.0 + 0.0j, np.array([1.0, 0.0], dtype=complex))
    with pytest.raises(PreconditionError):
        AsymptoticService.fundamental_inequalities(circuit, thr, bad.zeta,
                                                   bad.q_vec, 3.0)
