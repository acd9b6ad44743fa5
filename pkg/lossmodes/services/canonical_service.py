"""Service layer for the K-factorization and the canonical system operator."""

import logging

import numpy as np
import scipy.linalg as sl

from lossmodes.errors import ConditioningError, NotPSDError
from lossmodes.models.canonical import CanonicalSystem
from lossmodes.models.components.tolerances import DEFAULT_TOLERANCES, Tolerances
from lossmodes.models.reports import EquivalenceResiduals
from lossmodes.models.system import LagrangianSystem, State
from lossmodes.services.linalg import inner, op_norm
from lossmodes.services.system_service import SystemService


logger = logging.getLogger(__name__)


class CanonicalService:
    # Relative tolerance for K^T K = M_H.
    _FACTORIZATION_TOL = 1e-10

    @classmethod
    def psd_sqrt(cls, m: np.ndarray,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
        """Unique positive semidefinite square root of a symmetric matrix.

        Parameters
        ----------
        m: np.ndarray
            Real symmetric positive semidefinite matrix.
        tol: Tolerances
            Eigenvalues in [-tol.validation*|m|, 0) are clamped to zero.

        Returns
        -------
        np.ndarray
            S = S^T >= 0 with S S = m.

        Raises
        ------
        NotPSDError
            If m is not symmetric or has a negative eigenvalue beyond the
            tolerance.
        """
        values, vectors = cls._symmetric_eigen(m, tol)
        root = (vectors * np.sqrt(values)) @ vectors.T
        return (root + root.T) / 2.0

    @classmethod
    def psd_sqrt_2x2(cls, m: np.ndarray) -> np.ndarray:
        """Closed-form square root of a 2x2 symmetric PSD matrix.

        sqrt(M) = (sqrt(det M) I + M) / sqrt(Tr M + 2 sqrt(det M))
        """
        m = np.asarray(m, dtype=float)
        assert m.shape == (2, 2)
        root_det = np.sqrt(max(float(np.linalg.det(m)), 0.0))
        denominator = np.sqrt(max(float(np.trace(m)) + 2.0 * root_det, 0.0))
        if denominator == 0.0:
            return np.zeros((2, 2))
        return (root_det * np.eye(2) + m) / denominator

    @classmethod
    def inverse_psd_sqrt(cls, m: np.ndarray,
                         tol: Tolerances = DEFAULT_TOLERANCES
                         ) -> tuple[np.ndarray, np.ndarray]:
        """sqrt(m) and sqrt(m)^-1 from one eigendecomposition.

        Raises
        ------
        ConditioningError
            If m is singular to tolerance.
        """
        values, vectors = cls._symmetric_eigen(m, tol)
        if values[0] <= tol.validation * max(values[-1], 0.0):
            raise ConditioningError(
                f"matrix is not invertible to tolerance (smallest eigenvalue "
                f"{values[0]:.3e}, largest {values[-1]:.3e})")
        roots = np.sqrt(values)
        root = (vectors * roots) @ vectors.T
        inverse_root = (vectors / roots) @ vectors.T
        return (root + root.T) / 2.0, (inverse_root + inverse_root.T) / 2.0

    @classmethod
    def build_canonical(cls, sys: LagrangianSystem,
                        tol: Tolerances = DEFAULT_TOLERANCES
                        ) -> CanonicalSystem:
        """Build K, Omega and B for a validated system.

        Parameters
        ----------
        sys: LagrangianSystem

        Returns
        -------
        CanonicalSystem

        Raises
        ------
        ConditioningError
            If alpha is not invertible to tolerance.
        NotPSDError
            If eta is not positive semidefinite.
        """
        assert isinstance(sys, LagrangianSystem)
        n = sys.n
        sqrt_alpha, k_p = cls.inverse_psd_sqrt(sys.alpha, tol)
        k_q = cls.psd_sqrt(sys.eta, tol)
        phi = k_q @ k_p
        r_tilde = k_p @ sys.r_mat @ k_p
        r_tilde = (r_tilde + r_tilde.T) / 2.0
        gyro = k_p @ sys.theta @ k_p
        gyro = (gyro - gyro.T) / 2.0
        omega_p = -2.0j * gyro

        zeros = np.zeros((n, n))
        omega = np.block([[omega_p, -1.0j * phi.T],
                          [1.0j * phi, zeros]])
        b_mat = np.block([[r_tilde, zeros], [zeros, zeros]])
        k_block = np.block([[k_p, -k_p @ sys.theta], [zeros, k_q]])

        m_h = SystemService.hamiltonian_form(sys)
        residual = op_norm(k_block.T @ k_block - m_h) / max(op_norm(m_h),
                                                             1e-300)
        if residual > cls._FACTORIZATION_TOL:
            logger.warning("K^T K differs from M_H by %.3e (relative); "
                           "alpha condition number %.3e", residual,
                           np.linalg.cond(sys.alpha))
        logger.debug("canonical system built: N=%d, |Omega|=%.6g", n,
                     op_norm(omega))
        return CanonicalSystem(k_p=k_p, k_q=k_q, sqrt_alpha=sqrt_alpha,
                               k_block=k_block, phi=phi, r_tilde=r_tilde,
                               omega_p=omega_p, omega=omega, b_mat=b_mat,
                               alpha_condition=float(np.linalg.cond(sys.alpha)),
                               factorization_residual=residual)

    @classmethod
    def system_operator(cls, can: CanonicalSystem, beta: float) -> np.ndarray:
        """A(beta) = Omega - i beta B."""
        assert isinstance(can, CanonicalSystem)
        return can.omega - 1.0j * beta * can.b_mat

    @classmethod
    def state_to_force_vars(cls, sys: LagrangianSystem, can: CanonicalSystem,
                            s: State) -> np.ndarray:
        """Canonical state v = K [alpha Q' + theta Q; Q].

        Parameters
        ----------
        sys: LagrangianSystem
        can: CanonicalSystem
        s: State

        Returns
        -------
        np.ndarray
            Complex 2N-vector, equal to [sqrt(alpha) Q'; sqrt(eta) Q].
        """
        assert isinstance(s, State)
        momentum = sys.alpha @ s.qdot_vec + sys.theta @ s.q_vec
        return can.k_block @ np.concatenate([momentum, s.q_vec])

    @classmethod
    def forcing_vector(cls, can: CanonicalSystem,
                       force: np.ndarray) -> np.ndarray:
        """f = [K_p F; 0]."""
        force = np.asarray(force, dtype=complex)
        return np.concatenate([can.k_p @ force, np.zeros(can.n, dtype=complex)])

    @classmethod
    def canonical_energies(cls, can: CanonicalSystem, v: np.ndarray,
                           beta: float, f: np.ndarray | None = None
                           ) -> tuple[float, float, float]:
        """U[v] = (v, v)/2, W_dis[v] = beta (v, B v), W[v] = Re(v, f)."""
        energy = 0.5 * inner(v, v).real
        dissipation = beta * inner(v, can.b_mat @ v).real
        work = 0.0 if f is None else inner(v, f).real
        return energy, dissipation, work

    @classmethod
    def energetic_equivalence_check(cls, sys: LagrangianSystem,
                                    can: CanonicalSystem, s: State,
                                    force: np.ndarray | None = None,
                                    beta: float | None = None
                                    ) -> EquivalenceResiduals:
        """Compare the canonical energetics with the Lagrangian ones.

        Each residual is the absolute difference divided by the natural
        scale of the quantity (zero scale leaves it unnormalized).

        Returns
        -------
        EquivalenceResiduals
        """
        beta = sys.beta if beta is None else beta
        lagrangian = SystemService.energies(sys, s, force, beta)
        v = cls.state_to_force_vars(sys, can, s)
        f = None if force is None else cls.forcing_vector(can, force)
        energy, dissipation, work = cls.canonical_energies(can, v, beta, f)

        q_norm = float(np.linalg.norm(s.q_vec))
        qdot_norm = float(np.linalg.norm(s.qdot_vec))
        state_sq = q_norm ** 2 + qdot_norm ** 2
        energy_scale = state_sq * (op_norm(sys.alpha) + op_norm(sys.eta)
                                   + op_norm(sys.theta))
        dissipation_scale = abs(beta) * op_norm(sys.r_mat) * qdot_norm ** 2
        work_scale = 0.0 if force is None \
            else qdot_norm * float(np.linalg.norm(force))

        def normalized(difference: float, scale: float) -> float:
            return difference / scale if scale > 0.0 else difference

        return EquivalenceResiduals(
            energy=normalized(abs(energy - lagrangian.total), energy_scale),
            dissipation=normalized(abs(dissipation
                                       - lagrangian.dissipated_power),
                                   dissipation_scale),
            work=normalized(abs(work - lagrangian.work_rate), work_scale))

    @classmethod
    def _symmetric_eigen(cls, m: np.ndarray, tol: Tolerances
                         ) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending, clamped at zero) and eigenvectors."""
        m = np.asarray(m, dtype=float)
        scale = max(op_norm(m), 1e-300)
        asymmetry = float(np.max(np.abs(m - m.T))) if m.size else 0.0
        if asymmetry > tol.validation * scale:
            raise NotPSDError(f"matrix is not symmetric (asymmetry "
                              f"{asymmetry:.3e})")
        values, vectors = sl.eigh((m + m.T) / 2.0)
        if values.size and values[0] < -tol.validation * scale:
            raise NotPSDError(f"matrix has a negative eigenvalue "
                              f"{values[0]:.3e}")
        return np.clip(values, 0.0, None), vectors
