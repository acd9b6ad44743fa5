"""Service layer for validating Lagrangian systems and evaluating their
energetics."""

import logging
from fractions import Fraction

import numpy as np
import scipy.linalg as sl

from lossmodes.errors import ConditioningError, InvariantViolation, StructuralError
from lossmodes.models.components.tolerances import DEFAULT_TOLERANCES, Tolerances
from lossmodes.models.reports import Check, LossFraction, ValidationReport
from lossmodes.models.system import EnergyBreakdown, LagrangianSystem, State
from lossmodes.services.linalg import inner, numerical_rank, op_norm


logger = logging.getLogger(__name__)


class SystemService:
    _ALPHA_SYMMETRY = "alpha symmetry"
    _ALPHA_DEFINITE = "alpha positive definite"
    _THETA_SKEW = "theta skew-symmetry"
    _ETA_SYMMETRY = "eta symmetry"
    _ETA_SEMIDEFINITE = "eta positive semidefinite"
    _R_SYMMETRY = "R symmetry"
    _R_SEMIDEFINITE = "R positive semidefinite"
    _R_NONZERO = "R nonzero"
    _BETA_NONNEGATIVE = "beta nonnegative"

    @classmethod
    def validate_system(cls, sys: LagrangianSystem,
                        tol: Tolerances = DEFAULT_TOLERANCES
                        ) -> ValidationReport:
        """Check every structural invariant of a system.

        Symmetry checks report the largest entry of the offending part
        (the skew part for symmetric forms, the symmetric part for theta).
        Definiteness checks report the smallest eigenvalue of the symmetric
        part. All thresholds are relative to the matrix norm.

        Parameters
        ----------
        sys: LagrangianSystem
            The system to validate.
        tol: Tolerances
            ``tol.validation`` is the relative threshold.

        Returns
        -------
        ValidationReport
        """
        assert isinstance(sys, LagrangianSystem)
        rel = tol.validation
        checks = []

        for name, matrix in ((cls._ALPHA_SYMMETRY, sys.alpha),
                             (cls._ETA_SYMMETRY, sys.eta),
                             (cls._R_SYMMETRY, sys.r_mat)):
            margin = float(np.max(np.abs(matrix - matrix.T))) / 2.0
            checks.append(Check(name, margin <= rel * op_norm(matrix), margin))

        theta_sym = float(np.max(np.abs(sys.theta + sys.theta.T))) / 2.0
        checks.append(Check(cls._THETA_SKEW,
                            theta_sym <= rel * op_norm(sys.theta), theta_sym))

        alpha_min = cls._min_eigenvalue(sys.alpha)
        checks.append(Check(cls._ALPHA_DEFINITE,
                            alpha_min > rel * op_norm(sys.alpha), alpha_min))
        eta_min = cls._min_eigenvalue(sys.eta)
        checks.append(Check(cls._ETA_SEMIDEFINITE,
                            eta_min >= -rel * op_norm(sys.eta), eta_min))
        r_min = cls._min_eigenvalue(sys.r_mat)
        checks.append(Check(cls._R_SEMIDEFINITE,
                            r_min >= -rel * op_norm(sys.r_mat), r_min))
        r_norm = op_norm(sys.r_mat)
        checks.append(Check(cls._R_NONZERO, r_norm > 0.0, r_norm))
        checks.append(Check(cls._BETA_NONNEGATIVE, sys.beta >= 0.0, sys.beta))

        alpha_condition = float(np.linalg.cond(sys.alpha))
        report = ValidationReport(tuple(checks), alpha_condition)
        if not report.overall:
            logger.info("validation failed: %s",
                        ", ".join(check.name for check in report.failed()))
        return report

    @classmethod
    def loss_fraction(cls, sys: LagrangianSystem,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> LossFraction:
        """Rank of the Rayleigh form and the loss fraction N_R / N.

        Parameters
        ----------
        sys: LagrangianSystem

        Returns
        -------
        LossFraction

        Raises
        ------
        InvariantViolation
            If R has numerical rank 0.
        """
        assert isinstance(sys, LagrangianSystem)
        n_r = numerical_rank(sys.r_mat, tol)
        if n_r == 0:
            raise InvariantViolation("R has rank 0; a dissipative system "
                                     "needs R != 0")
        return LossFraction(n_r, Fraction(n_r, sys.n))

    @classmethod
    def energies(cls, sys: LagrangianSystem, s: State,
                 force: np.ndarray | None = None,
                 beta: float | None = None) -> EnergyBreakdown:
        """Energetic quantities of a state with the Hermitian product.

        Parameters
        ----------
        sys: LagrangianSystem
        s: State
        force: np.ndarray | None (default None)
            Generalized force F; None means zero.
        beta: float | None (default None)
            Loss parameter; defaults to ``sys.beta``.

        Returns
        -------
        EnergyBreakdown
        """
        assert isinstance(sys, LagrangianSystem)
        assert isinstance(s, State)
        cls._check_dims(sys, s.q_vec, s.qdot_vec)
        beta = sys.beta if beta is None else beta
        q, qdot = s.q_vec, s.qdot_vec
        theta_moment = inner(qdot, sys.theta @ q).real
        kinetic = 0.5 * inner(qdot, sys.alpha @ qdot).real + 0.5 * theta_moment
        potential = 0.5 * inner(q, sys.eta @ q).real - 0.5 * theta_moment
        dissipated = beta * inner(qdot, sys.r_mat @ qdot).real
        work = 0.0
        if force is not None:
            force = np.asarray(force, dtype=complex)
            cls._check_dims(sys, force)
            work = inner(qdot, force).real
        return EnergyBreakdown(kinetic=kinetic, potential=potential,
                               total=kinetic + potential,
                               dissipated_power=dissipated, work_rate=work)

    @classmethod
    def lagrangian_value(cls, sys: LagrangianSystem, s: State) -> float:
        """L = T - V."""
        return cls.energies(sys, s).lagrangian

    @classmethod
    def el_residual(cls, sys: LagrangianSystem, s: State, qddot: np.ndarray,
                    force: np.ndarray | None = None,
                    beta: float | None = None) -> np.ndarray:
        """Euler-Lagrange residual alpha Q'' + (2 theta + beta R) Q' + eta Q - F.

        Parameters
        ----------
        sys: LagrangianSystem
        s: State
        qddot: np.ndarray
            Accelerations Q''.
        force: np.ndarray | None (default None)
        beta: float | None (default None)

        Returns
        -------
        np.ndarray
            Complex N-vector; zero along solutions.
        """
        assert isinstance(s, State)
        qddot = np.asarray(qddot, dtype=complex)
        cls._check_dims(sys, s.q_vec, qddot)
        residual = sys.alpha @ qddot + sys.damping_matrix(beta) @ s.qdot_vec \
            + sys.eta @ s.q_vec
        if force is not None:
            force = np.asarray(force, dtype=complex)
            cls._check_dims(sys, force)
            residual = residual - force
        return residual

    @classmethod
    def lagrangian_matrix(cls, sys: LagrangianSystem) -> np.ndarray:
        """Block matrix M_L = [[alpha, theta], [theta^T, -eta]]."""
        return np.block([[sys.alpha, sys.theta], [sys.theta.T, -sys.eta]])

    @classmethod
    def hamiltonian_form(cls, sys: LagrangianSystem) -> np.ndarray:
        """Block matrix M_H of the Hamiltonian in the variables [P; Q].

        Returns
        -------
        np.ndarray
            [[alpha^-1, -alpha^-1 theta],
             [-theta^T alpha^-1, theta^T alpha^-1 theta + eta]]

        Raises
        ------
        ConditioningError
            If alpha is not positive definite.
        """
        alpha_inv = cls.alpha_inverse(sys)
        return np.block([
            [alpha_inv, -alpha_inv @ sys.theta],
            [-sys.theta.T @ alpha_inv,
             sys.theta.T @ alpha_inv @ sys.theta + sys.eta]])

    @classmethod
    def alpha_inverse(cls, sys: LagrangianSystem) -> np.ndarray:
        """Inverse of the kinetic form through its Cholesky factor."""
        try:
            factor = sl.cho_factor(sys.alpha)
        except sl.LinAlgError as e:
            raise ConditioningError(f"alpha is not positive definite: {e}") \
                from e
        return sl.cho_solve(factor, np.eye(sys.n))

    @classmethod
    def is_nondegenerate(cls, sys: LagrangianSystem,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """True iff Ker eta and Ker R intersect only in zero."""
        stacked = np.vstack([sys.eta / max(op_norm(sys.eta), 1e-300),
                             sys.r_mat / max(op_norm(sys.r_mat), 1e-300)])
        return numerical_rank(stacked, tol) == sys.n

    @classmethod
    def _min_eigenvalue(cls, matrix: np.ndarray) -> float:
        symmetric = (matrix + matrix.T) / 2.0
        return float(sl.eigvalsh(symmetric)[0])

    @classmethod
    def _check_dims(cls, sys: LagrangianSystem, *vectors: np.ndarray) -> None:
        for vector in vectors:
            if vector.shape != (sys.n,):
                raise StructuralError(f"expected a vector of length {sys.n}, "
                                      f"got shape {vector.shape}")
