from fractions import Fraction

import numpy as np
import pytest

from lossmodes.errors import (DataError, InvariantViolation, StructuralError,
                              SystemParseError)
from lossmodes.models.system import LagrangianSystem, State
from lossmodes.services.example_service import ExampleService
from lossmodes.services.system_service import SystemService

pytestmark = [pytest.mark.model]


def test_oscillator_validates(oscillator):
    report = SystemService.validate_system(oscillator)
    assert report.overall
    assert report.failed() == []
    assert report.alpha_condition == pytest.approx(1.0)


def test_asymmetric_alpha_fails_by_name():
    sys = LagrangianSystem([[2.0, 1.0], [0.0, 2.0]], np.zeros((2, 2)),
                           np.eye(2), np.eye(2))
    report = SystemService.validate_system(sys)
    assert not report.overall
    assert not report.check("alpha symmetry").passed
    assert report.check("eta symmetry").passed


def test_indefinite_eta_and_negative_beta_fail():
    sys = LagrangianSystem(np.eye(2), np.zeros((2, 2)), np.diag([1.0, -1.0]),
                           np.eye(2), beta=-1.0)
    names = {check.name for check in SystemService.validate_system(
        sys).failed()}
    assert names == {"eta positive semidefinite", "beta nonnegative"}


def test_symmetric_theta_fails():
    sys = LagrangianSystem(np.eye(2), [[0.0, 1.0], [1.0, 0.0]], np.eye(2),
                           np.eye(2))
    report = SystemService.validate_system(sys)
    assert not report.check("theta skew-symmetry").passed


def test_zero_r_fails():
    sys = LagrangianSystem(np.eye(2), np.zeros((2, 2)), np.eye(2),
                           np.zeros((2, 2)))
    assert not SystemService.validate_system(sys).check("R nonzero").passed
    with pytest.raises(InvariantViolation):
        SystemService.loss_fraction(sys)


def test_structural_errors():
    with pytest.raises(StructuralError):
        LagrangianSystem(np.eye(2), np.zeros((3, 3)), np.eye(2), np.eye(2))
    with pytest.raises(StructuralError):
        LagrangianSystem(np.ones((2, 3)), np.zeros((2, 3)), np.ones((2, 3)),
                         np.ones((2, 3)))
    with pytest.raises(DataError):
        LagrangianSystem([[np.nan]], [[0.0]], [[1.0]], [[1.0]])
    with pytest.raises(DataError):
        LagrangianSystem([[1.0]], [[0.0]], [[1.0]], [[1.0]], beta=np.inf)


def test_from_dict_requires_all_keys(circuit):
    data = circuit.as_dict()
    restored = LagrangianSystem.from_dict(data)
    assert np.array_equal(restored.eta, circuit.eta)
    assert restored.beta == circuit.beta
    del data["eta"]
    with pytest.raises(SystemParseError, match="eta"):
        LagrangianSystem.from_dict(data)
    with pytest.raises(SystemParseError):
        LagrangianSystem.from_dict([1, 2, 3])


def test_loss_fraction_of_the_circuit(circuit):
    fraction = SystemService.loss_fraction(circuit)
    assert fraction.n_r == 1
    assert fraction.delta_r == Fraction(1, 2)
    assert fraction.two_component


def test_energies_of_a_static_state(oscillator):
    e = SystemService.energies(oscillator, State([1.0], [0.0]))
    assert e.kinetic == 0.0
    assert e.potential == pytest.approx(0.5)
    assert e.total == pytest.approx(0.5)
    assert e.dissipated_power == 0.0
    assert e.lagrangian == pytest.approx(-0.5)


def test_energies_with_gyroscopy_and_force(gyro_system):
    rng = np.random.default_rng(3)
    n = gyro_system.n
    s = State(rng.standard_normal(n) + 1j * rng.standard_normal(n),
              rng.standard_normal(n) + 1j * rng.standard_normal(n))
    force = rng.standard_normal(n)
    e = SystemService.energies(gyro_system, s, force)
    q, qdot = s.q_vec, s.qdot_vec
    moment = np.vdot(qdot, gyro_system.theta @ q).real
    assert e.kinetic == pytest.approx(
        0.5 * np.vdot(qdot, gyro_system.alpha @ qdot).real + 0.5 * moment)
    assert e.total == pytest.approx(
        0.5 * np.vdot(qdot, gyro_system.alpha @ qdot).real
        + 0.5 * np.vdot(q, gyro_system.eta @ q).real)
    assert e.work_rate == pytest.approx(np.vdot(qdot, force).real)
    assert e.dissipated_power >= 0.0


@pytest.mark.parametrize("seed", range(5))
def test_energies_split_over_real_and_imaginary_parts(seed):
    sys = ExampleService.random_system(4, 2, gyro=True, seed=seed, beta=1.3)
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    qdot = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    whole = SystemService.energies(sys, State(q, qdot))
    real = SystemService.energies(sys, State(q.real, qdot.real))
    imag = SystemService.energies(sys, State(q.imag, qdot.imag))
    for name in ("kinetic", "potential", "total", "dissipated_power"):
        assert getattr(whole, name) == pytest.approx(
            getattr(real, name) + getattr(imag, name), rel=1e-10, abs=1e-10)


def test_el_residual_vanishes_on_an_eigenmode(oscillator):
    zeta = np.sqrt(3.0) / 2.0 - 0.5j
    q = np.array([1.0 + 0.0j])
    s = State(q, -1j * zeta * q)
    residual = SystemService.el_residual(oscillator, s, -zeta ** 2 * q)
    assert np.abs(residual).max() < 1e-14


def test_el_residual_checks_dimensions(oscillator):
    with pytest.raises(StructuralError):
        SystemService.el_residual(oscillator, State([1.0], [0.0]),
                                  np.zeros(2))


def test_hamiltonian_form_is_inverse_related(gyro_system):
    m_h = SystemService.hamiltonian_form(gyro_system)
    assert np.allclose(m_h, m_h.T)
    m_l = SystemService.lagrangian_matrix(gyro_system)
    n = gyro_system.n
    assert np.allclose(m_l[:n, n:], gyro_system.theta)
    assert np.allclose(m_l[n:, n:], -gyro_system.eta)


def test_nondegeneracy(circuit):
    assert SystemService.is_nondegenerate(circuit)
    degenerate = LagrangianSystem(np.eye(2), np.zeros((2, 2)),
                                  np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
    assert not SystemService.is_nondegenerate(degenerate)


def test_with_beta_keeps_forms(circuit):
    other = circuit.with_beta(50.0)
    assert other.beta == 50.0
    assert np.array_equal(other.alpha, circuit.alpha)
    assert circuit.beta == 1.0


def test_system_matrices_are_read_only(circuit):
    with pytest.raises(ValueError):
        circuit.alpha[0, 0] = 5.0
