import numpy as np
import pytest

from lossmodes.errors import ConditioningError, NotPSDError
from lossmodes.models.system import LagrangianSystem, State
from lossmodes.services.canonical_service import CanonicalService
from lossmodes.services.system_service import SystemService

pytestmark = [pytest.mark.canonical]


def _random_state(n, rng):
    return State(rng.standard_normal(n) + 1j * rng.standard_normal(n),
                 rng.standard_normal(n) + 1j * rng.standard_normal(n))


def test_psd_sqrt_squares_back():
    rng = np.random.default_rng(11)
    g = rng.standard_normal((4, 2))
    m = g @ g.T
    root = CanonicalService.psd_sqrt(m)
    assert np.allclose(root, root.T)
    assert np.linalg.eigvalsh(root).min() > -1e-12
    assert np.allclose(root @ root, m, atol=1e-12)


def test_psd_sqrt_2x2_matches_eigen_root():
    rng = np.random.default_rng(12)
    for _ in range(20):
        g = rng.standard_normal((2, 2))
        m = g @ g.T
        assert np.allclose(CanonicalService.psd_sqrt_2x2(m),
                           CanonicalService.psd_sqrt(m), atol=1e-12)
    assert np.allclose(CanonicalService.psd_sqrt_2x2(np.zeros((2, 2))), 0.0)


def test_psd_sqrt_rejects_indefinite():
    with pytest.raises(NotPSDError):
        CanonicalService.psd_sqrt(np.diag([1.0, -1.0]))


def test_singular_alpha_is_rejected():
    sys = LagrangianSystem(np.diag([1.0, 0.0]), np.zeros((2, 2)), np.eye(2),
                           np.eye(2))
    with pytest.raises(ConditioningError):
        CanonicalService.build_canonical(sys)


def test_operator_structure(gyro_system):
    can = CanonicalService.build_canonical(gyro_system)
    assert np.allclose(can.omega, can.omega.conj().T)
    assert np.linalg.eigvalsh(can.b_mat).min() > -1e-12
    a = CanonicalService.system_operator(can, 2.5)
    assert np.allclose(a.conj(), -a)
    assert can.factorization_residual <= 1e-10
    m_h = SystemService.hamiltonian_form(gyro_system)
    assert np.allclose(can.k_block.T @ can.k_block, m_h)


def test_canonical_state_follows_the_equations_of_motion(gyro_system):
    rng = np.random.default_rng(5)
    can = CanonicalService.build_canonical(gyro_system)
    n, beta = gyro_system.n, gyro_system.beta
    s = _random_state(n, rng)
    force = rng.standard_normal(n)
    qddot = np.linalg.solve(gyro_system.alpha,
                            force - gyro_system.damping_matrix(beta)
                            @ s.qdot_vec - gyro_system.eta @ s.q_vec)

    v = CanonicalService.state_to_force_vars(gyro_system, can, s)
    assert np.allclose(v[:n], can.sqrt_alpha @ s.qdot_vec)
    assert np.allclose(v[n:], can.k_q @ s.q_vec)

    v_dot = np.concatenate([can.sqrt_alpha @ qddot, can.k_q @ s.qdot_vec])
    a = CanonicalService.system_operator(can, beta)
    f = CanonicalService.forcing_vector(can, force)
    assert np.allclose(v_dot, -1j * a @ v + f)


def test_energetic_equivalence(gyro_system):
    rng = np.random.default_rng(6)
    can = CanonicalService.build_canonical(gyro_system)
    for _ in range(10):
        s = _random_state(gyro_system.n, rng)
        force = rng.standard_normal(gyro_system.n)
        residuals = CanonicalService.energetic_equivalence_check(
            gyro_system, can, s, force)
        assert residuals.worst() <= 1e-12


def test_canonical_energies_of_a_static_state(oscillator):
    can = CanonicalService.build_canonical(oscillator)
    v = CanonicalService.state_to_force_vars(oscillator, can,
                                             State([2.0], [0.0]))
    energy, dissipation, work = CanonicalService.canonical_energies(
        can, v, oscillator.beta)
    assert energy == pytest.approx(2.0)
    assert dissipation == 0.0
    assert work == 0.0
