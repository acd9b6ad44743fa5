import numpy as np
import pytest

from lossmodes.errors import (InapplicableTheoremError, IntegratorError,
                              PreconditionError, SamplingError,
                              StructuralError)
from lossmodes.models.system import State
from lossmodes.services.asymptotic_service import AsymptoticService
from lossmodes.services.canonical_service import CanonicalService
from lossmodes.services.dynamics_service import DynamicsService
from lossmodes.services.example_service import ExampleService
from lossmodes.services.pencil_service import PencilService

pytestmark = [pytest.mark.dynamics]

OSCILLATOR_MODE = np.sqrt(3.0) / 2.0 - 0.5j


def test_conservative_motion_keeps_its_energy(oscillator):
    traj = DynamicsService.integrate(oscillator, 0.0, State([1.0], [0.0]),
                                     t_end=20.0, dt_max=0.01)
    total = traj.column("total")
    assert np.abs(total - total[0]).max() <= 1e-6 * total[0]
    assert traj.beta == 0.0


def test_energy_balance(oscillator):
    traj = DynamicsService.integrate(oscillator, 1.0, State([1.0], [0.5]),
                                     t_end=10.0, dt_max=0.01)
    assert DynamicsService.energy_balance_residual(oscillator, traj) <= 1e-5
    total = traj.column("total")
    assert np.all(np.diff(total) <= 1e-8 * np.abs(total).max())
    assert total[-1] < total[0]


def test_forced_energy_balance(circuit):
    def force(t):
        return np.array([np.cos(t), 0.0])

    traj = DynamicsService.integrate(circuit, 0.5, State.zero(2), t_end=10.0,
                                     dt_max=0.01, force_fn=force)
    assert DynamicsService.energy_balance_residual(circuit, traj,
                                                   force) <= 1e-5


def test_single_mode_decay(oscillator):
    initial = DynamicsService.eigenmode_state(OSCILLATOR_MODE, [1.0])
    traj = DynamicsService.integrate(oscillator, 1.0, initial, t_end=5.0,
                                     dt_max=0.01)
    assert DynamicsService.decay_rate(traj) \
        == pytest.approx(-2.0 * OSCILLATOR_MODE.imag, rel=0.01)
    assert DynamicsService.energy_quality_factor(traj, OSCILLATOR_MODE) \
        == pytest.approx(np.sqrt(3.0) / 2.0, rel=1e-3)


def test_trajectory_frame(circuit):
    traj = DynamicsService.integrate(circuit, 1.0, State([1.0, 0.0],
                                                         [0.0, 0.0]),
                                     t_end=1.0, dt_max=0.1)
    frame = traj.to_frame()
    assert len(frame) == 11
    assert frame["t"].iloc[-1] == pytest.approx(1.0)
    for column in ("re_q1", "im_qdot0", "T", "V", "H", "dissipated_power",
                   "re_G", "im_G"):
        assert column in frame.columns


def test_integration_preconditions(oscillator):
    with pytest.raises(PreconditionError):
        DynamicsService.integrate(oscillator, 1.0, State([1.0], [0.0]),
                                  t_end=0.0, dt_max=0.01)
    with pytest.raises(StructuralError):
        DynamicsService.integrate(oscillator, 1.0, State.zero(2),
                                  t_end=1.0, dt_max=0.01)


def test_stiff_runs_are_refused(oscillator):
    with pytest.raises(IntegratorError, match="stiff"):
        DynamicsService.integrate(oscillator, 1e6, State([1.0], [0.0]),
                                  t_end=1e3, dt_max=0.01)


def test_coarse_sampling_is_rejected(oscillator):
    coarse = DynamicsService.integrate(oscillator, 1.0, State([1.0], [0.0]),
                                       t_end=20.0, dt_max=2.0)
    with pytest.raises(SamplingError):
        DynamicsService.energy_balance_residual(oscillator, coarse)
    short = DynamicsService.integrate(oscillator, 1.0, State([1.0], [0.0]),
                                      t_end=0.03, dt_max=0.01)
    with pytest.raises(SamplingError):
        DynamicsService.energy_balance_residual(oscillator, short)


def test_gyroscopic_virial_identity(gyro_system):
    beta = gyro_system.beta
    for pe in PencilService.solve_pencil(gyro_system, beta):
        report = DynamicsService.virial_check(gyro_system, pe.zeta, pe.q_vec,
                                              beta)
        assert report.residual <= (1e-8 if report.rhs is not None else 1e-6)
        assert not report.equipartition


@pytest.mark.slow
def test_gyroscopic_virial_identity_on_random_systems():
    oscillatory = 0
    for seed in range(40):
        sys = ExampleService.random_system(4, 2, gyro=True, seed=seed)
        for pe in PencilService.solve_pencil(sys, sys.beta):
            report = DynamicsService.virial_check(sys, pe.zeta, pe.q_vec,
                                                  sys.beta)
            if report.rhs is not None:
                assert report.residual <= 1e-8
                oscillatory += 1
    assert oscillatory >= 100


def test_equipartition_without_gyroscopy(circuit):
    oscillatory = 0
    for pe in PencilService.solve_pencil(circuit, 1.0):
        report = DynamicsService.virial_check(circuit, pe.zeta, pe.q_vec, 1.0)
        assert report.residual <= 1e-8
        assert report.theta_moment == 0.0
        if report.rhs is not None:
            assert report.equipartition
            oscillatory += 1
    assert oscillatory > 0


def test_overdamped_modes_break_equipartition(circuit):
    gaps = []
    for pe in PencilService.solve_pencil(circuit, 50.0):
        report = DynamicsService.virial_check(circuit, pe.zeta, pe.q_vec,
                                              50.0)
        if report.rhs is None:
            assert not report.equipartition
            gaps.append(report.equipartition_gap)
    assert len(gaps) == 2
    assert max(gaps) > 0.1


@pytest.mark.slow
def test_strongly_damped_modes_keep_an_energy_gap():
    checked = 0
    for seed in range(30):
        sys = ExampleService.random_system(4, 2, seed=seed)
        thr = AsymptoticService.thresholds(
            sys, CanonicalService.build_canonical(sys))
        beta = 5.0 * thr.beta_star
        for pe in PencilService.solve_pencil(sys, beta):
            if -pe.zeta.imag < 2.0 * thr.omega_max:
                continue
            report = DynamicsService.virial_check(sys, pe.zeta, pe.q_vec,
                                                  beta)
            assert report.rhs is None
            assert report.equipartition_gap > 0.1
            checked += 1
    assert checked > 0


def test_virial_check_needs_an_eigenpair(circuit):
    with pytest.raises(PreconditionError):
        DynamicsService.virial_check(circuit, 1.0, np.array([1.0, 0.0]), 1.0)


def test_time_average_virial(circuit):
    traj = DynamicsService.integrate(circuit, 0.0, State([1.0, 0.0],
                                                         [0.0, 0.5]),
                                     t_end=50.0, dt_max=0.01)
    report = DynamicsService.time_average_virial(traj)
    assert report.window == pytest.approx(50.0)
    assert report.avg_lagrangian == pytest.approx(report.avg_dg_dt,
                                                  abs=1e-4)
    assert report.avg_t_minus_v == pytest.approx(report.avg_lagrangian,
                                                  abs=1e-9)
    assert report.pointwise_residual <= 1e-6

    with pytest.raises(SamplingError):
        DynamicsService.time_average_virial(traj, t_window=0.02)


def test_time_average_virial_needs_a_conservative_motion(circuit):
    traj = DynamicsService.integrate(circuit, 1.0, State([1.0, 0.0],
                                                         [0.0, 0.0]),
                                     t_end=1.0, dt_max=0.01)
    with pytest.raises(InapplicableTheoremError):
        DynamicsService.time_average_virial(traj)
