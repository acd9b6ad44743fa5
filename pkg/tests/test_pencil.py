import numpy as np
import pytest

from lossmodes.errors import (PreconditionError, SingularBlockError,
                              StructuralError, UnsupportedError,
                              UnsupportedRegimeError)
from lossmodes.models.modes import PencilEig
from lossmodes.services.canonical_service import CanonicalService
from lossmodes.services.linalg import greedy_match, op_norm
from lossmodes.services.pencil_service import PencilService

pytestmark = [pytest.mark.pencil]


def _random_zeta(rng):
    return complex(rng.uniform(-3, 3), rng.uniform(-3, 1))


def test_determinant_equivalence(make_systems):
    rng = np.random.default_rng(21)
    systems = make_systems(50, seed=21, n_max=6) \
        + make_systems(50, seed=22, gyro=True, n_max=6)
    worst = 0.0
    for sys in systems:
        can = CanonicalService.build_canonical(sys)
        comparison = PencilService.det_equivalence(
            sys, can, _random_zeta(rng), rng.uniform(0.0, 10.0))
        worst = max(worst, comparison.relerr)
    assert worst <= 1e-8


def test_four_factor_form(gyro_system):
    rng = np.random.default_rng(23)
    can = CanonicalService.build_canonical(gyro_system)
    for _ in range(10):
        residual = PencilService.factorization_residual(
            gyro_system, can, _random_zeta(rng), rng.uniform(0.0, 5.0))
        assert residual <= 1e-10
    with pytest.raises(UnsupportedError):
        PencilService.factorization_residual(gyro_system, can, 0.0, 1.0)


def test_companion_spectrum_matches_operator(make_systems):
    for sys in make_systems(10, seed=24, gyro=True):
        can = CanonicalService.build_canonical(sys)
        a = CanonicalService.system_operator(can, sys.beta)
        pencil = np.array([pe.zeta for pe in
                           PencilService.solve_pencil(sys, sys.beta)])
        _, mismatch = greedy_match(pencil, np.linalg.eigvals(a))
        assert mismatch <= 1e-7 * max(op_norm(a), 1.0)


def test_eigenvector_maps_both_ways(gyro_system):
    beta = gyro_system.beta
    can = CanonicalService.build_canonical(gyro_system)
    a = CanonicalService.system_operator(can, beta)
    for pe in PencilService.solve_pencil(gyro_system, beta):
        assert PencilService.pencil_residual(gyro_system, pe, beta) <= 1e-8
        w = PencilService.pencil_to_canonical(gyro_system, pe, beta, can)
        assert np.linalg.norm(a @ w - pe.zeta * w) \
            <= 1e-8 * op_norm(a) * np.linalg.norm(w)

        back = PencilService.canonical_to_pencil(gyro_system, pe.zeta, w,
                                                 beta, can)
        assert back.zeta == pe.zeta
        assert np.allclose(back.q_vec, pe.q_vec)


def test_pencil_map_preconditions(gyro_system):
    n = gyro_system.n
    bad = PencilEig(zeta=1.0 + 0.0j, q_vec=np.ones(n, dtype=complex))
    with pytest.raises(PreconditionError):
        PencilService.pencil_to_canonical(gyro_system, bad, 1.0)
    with pytest.raises(UnsupportedError):
        PencilService.pencil_to_canonical(
            gyro_system, PencilEig(0j, np.ones(n, dtype=complex)), 1.0)
    with pytest.raises(StructuralError):
        PencilService.canonical_to_pencil(gyro_system, 1.0, np.ones(n), 1.0)


def test_hamiltonian_matrix_spectrum(gyro_system):
    beta = 1.3
    can = CanonicalService.build_canonical(gyro_system)
    a = CanonicalService.system_operator(can, beta)
    m = PencilService.hamiltonian_matrix(gyro_system, beta)
    _, mismatch = greedy_match(np.linalg.eigvals(1j * m),
                               np.linalg.eigvals(a))
    assert mismatch <= 1e-8 * max(op_norm(a), 1.0)


def test_imaginary_root_count_on_examples(circuit, oscillator):
    assert PencilService.imaginary_root_count(circuit, 50.0) == 2
    assert PencilService.imaginary_root_count(oscillator, 3.0) == 2
    assert PencilService.imaginary_root_count(oscillator, 1.0) == 0
    assert PencilService.imaginary_root_count(circuit, 0.0) == 0


def test_imaginary_root_count_needs_theta_zero(gyro_system):
    with pytest.raises(UnsupportedRegimeError):
        PencilService.imaginary_root_count(gyro_system, 1.0)


class TestBlockIdentities:
    def test_aitken_factorization(self):
        rng = np.random.default_rng(25)
        for _ in range(100):
            k, m = rng.integers(1, 4, size=2)
            p = rng.standard_normal((k, k))
            q = rng.standard_normal((k, m))
            r = rng.standard_normal((m, k))
            s = rng.standard_normal((m, m)) + 3.0 * np.eye(m)
            residual, det_relerr = PencilService.aitken_factorization(
                p, q, r, s)
            assert residual <= 1e-10
            assert det_relerr <= 1e-8

    def test_commuting_blocks_with_singular_s(self):
        rng = np.random.default_rng(26)
        for _ in range(100):
            n = int(rng.integers(2, 5))
            perm = np.eye(n)[rng.permutation(n)]
            s_values = rng.standard_normal(n)
            s_values[0] = 0.0
            s = perm @ np.diag(s_values) @ perm.T
            r = perm @ np.diag(rng.standard_normal(n)) @ perm.T
            p = rng.standard_normal((n, n))
            q = rng.standard_normal((n, n))
            relerr, limits = PencilService.commuting_determinant(p, q, r, s)
            assert relerr <= 1e-8
            assert len(limits) == 3
            assert max(limits) <= 1e-8

            report = PencilService.schur_identities(p, q, r, s)
            assert report.commuting
            assert report.factorization_residual is None
            assert report.passed

    def test_singular_non_commuting_blocks(self):
        p, q = np.eye(2), np.eye(2)
        s = np.diag([1.0, 0.0])
        r = np.array([[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(SingularBlockError):
            PencilService.aitken_factorization(p, q, r, s)
        with pytest.raises(PreconditionError):
            PencilService.commuting_determinant(p, q, r, s)
        with pytest.raises(SingularBlockError):
            PencilService.schur_identities(p, q, r, s)

    def test_blocks_must_conform(self):
        with pytest.raises(StructuralError):
            PencilService.schur_identities(np.eye(2), np.ones((2, 3)),
                                           np.ones((2, 2)), np.eye(2))
