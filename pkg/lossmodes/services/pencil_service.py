"""Service layer for the quadratic pencil C(zeta, beta), the Hamiltonian
matrix M(beta) and the block determinant identities."""

import logging

import numpy as np
import scipy.linalg as sl

from lossmodes.errors import (InconsistencyError, PreconditionError,
                              SingularBlockError, StructuralError,
                              UnsupportedError, UnsupportedRegimeError)
from lossmodes.models.canonical import CanonicalSystem
from lossmodes.models.components.tolerances import DEFAULT_TOLERANCES, Tolerances
from lossmodes.models.modes import PencilEig
from lossmodes.models.reports import DeterminantComparison, SchurReport
from lossmodes.models.system import LagrangianSystem
from lossmodes.services.canonical_service import CanonicalService
from lossmodes.services.linalg import op_norm, relative_difference
from lossmodes.services.system_service import SystemService


logger = logging.getLogger(__name__)


class PencilService:
    # Perturbations of a singular commuting block S -> S + eps I.
    _LIMIT_EPSILONS = (1e-4, 1e-6, 1e-8)

    @classmethod
    def pencil_eval(cls, sys: LagrangianSystem, zeta: complex,
                    beta: float) -> np.ndarray:
        """C(zeta, beta) = zeta^2 alpha + i zeta (2 theta + beta R) - eta."""
        assert isinstance(sys, LagrangianSystem)
        zeta = complex(zeta)
        return zeta ** 2 * sys.alpha + 1.0j * zeta * sys.damping_matrix(beta) \
            - sys.eta

    @classmethod
    def pencil_residual(cls, sys: LagrangianSystem, pe: PencilEig,
                        beta: float) -> float:
        """|C(zeta) q| relative to |q| (|zeta|^2|alpha| + |zeta||D| + |eta|)."""
        zeta = complex(pe.zeta)
        scale = (abs(zeta) ** 2 * op_norm(sys.alpha)
                 + abs(zeta) * (2.0 * op_norm(sys.theta)
                                + abs(beta) * op_norm(sys.r_mat))
                 + op_norm(sys.eta))
        q_norm = float(np.linalg.norm(pe.q_vec))
        if q_norm == 0.0:
            return float("inf")
        residual = float(np.linalg.norm(cls.pencil_eval(sys, zeta, beta)
                                        @ pe.q_vec))
        return residual / (q_norm * max(scale, 1e-300))

    @classmethod
    def det_equivalence(cls, sys: LagrangianSystem, can: CanonicalSystem,
                        zeta: complex, beta: float) -> DeterminantComparison:
        """Compare det(zeta 1 - A(beta)) with det C(zeta, beta) / det alpha.

        Determinants are formed from LU log-determinants so that magnitude
        and phase are compared after a common rescaling.

        Returns
        -------
        DeterminantComparison
        """
        zeta = complex(zeta)
        a = CanonicalService.system_operator(can, beta)
        n2 = a.shape[0]
        sign_l, log_l = np.linalg.slogdet(zeta * np.eye(n2) - a)
        sign_c, log_c = np.linalg.slogdet(cls.pencil_eval(sys, zeta, beta))
        sign_a, log_a = np.linalg.slogdet(sys.alpha)
        sign_r, log_r = sign_c / sign_a, log_c - log_a

        # Rounding floor for a determinant of this size and scale.
        scale = max(op_norm(zeta * np.eye(n2) - a), 1.0)
        log_floor = np.log(n2 * np.finfo(float).eps) + n2 * np.log(scale)
        shift = max(log_l, log_r, log_floor)
        lhs_scaled = sign_l * np.exp(log_l - shift)
        rhs_scaled = sign_r * np.exp(log_r - shift)
        relerr = relative_difference(lhs_scaled, rhs_scaled,
                                     np.exp(log_floor - shift))
        with np.errstate(over="ignore"):
            lhs = complex(sign_l * np.exp(log_l))
            rhs = complex(sign_r * np.exp(log_r))
        return DeterminantComparison(lhs=lhs, rhs=rhs, relerr=float(relerr))

    @classmethod
    def factorization_residual(cls, sys: LagrangianSystem,
                               can: CanonicalSystem, zeta: complex,
                               beta: float) -> float:
        """Relative residual of the four-factor form of zeta 1 - A(beta).

        zeta 1 - A = [[K_p, i Phi^T / zeta], [0, 1]] diag(1 / zeta, zeta)
                     diag(C(zeta, beta), 1) [[K_p, 0], [-i Phi / zeta, 1]]

        Raises
        ------
        UnsupportedError
            If zeta = 0.
        """
        zeta = complex(zeta)
        if zeta == 0:
            raise UnsupportedError("the factorization needs zeta != 0")
        n = sys.n
        eye, zeros = np.eye(n), np.zeros((n, n))
        first = np.block([[can.k_p, 1.0j * can.phi.T / zeta], [zeros, eye]])
        second = np.block([[eye / zeta, zeros], [zeros, zeta * eye]])
        third = np.block([[cls.pencil_eval(sys, zeta, beta), zeros],
                          [zeros, eye]])
        fourth = np.block([[can.k_p.T, zeros], [-1.0j * can.phi / zeta, eye]])
        target = zeta * np.eye(2 * n) \
            - CanonicalService.system_operator(can, beta)
        product = first @ second @ third @ fourth
        return op_norm(product - target) / max(op_norm(target), 1e-300)

    @classmethod
    def pencil_to_canonical(cls, sys: LagrangianSystem, pe: PencilEig,
                            beta: float, can: CanonicalSystem | None = None,
                            tol: Tolerances = DEFAULT_TOLERANCES
                            ) -> np.ndarray:
        """Map a pencil eigenpair to an eigenvector of A(beta).

        w = [-i zeta sqrt(alpha) q; sqrt(eta) q]

        Raises
        ------
        UnsupportedError
            If zeta = 0.
        PreconditionError
            If (zeta, q) is not a pencil eigenpair to tolerance.
        """
        assert isinstance(pe, PencilEig)
        zeta = complex(pe.zeta)
        if zeta == 0:
            raise UnsupportedError("the pencil correspondence is undefined "
                                   "at zeta = 0")
        residual = cls.pencil_residual(sys, pe, beta)
        if residual > tol.pencil:
            raise PreconditionError(f"not a pencil eigenpair: relative "
                                    f"residual {residual:.3e}")
        can = can or CanonicalService.build_canonical(sys, tol)
        q = np.asarray(pe.q_vec, dtype=complex)
        return np.concatenate([-1.0j * zeta * (can.sqrt_alpha @ q),
                               can.k_q @ q])

    @classmethod
    def canonical_to_pencil(cls, sys: LagrangianSystem, zeta: complex,
                            w: np.ndarray, beta: float,
                            can: CanonicalSystem | None = None,
                            tol: Tolerances = DEFAULT_TOLERANCES
                            ) -> PencilEig:
        """Recover q = (i / zeta) K_p w_top from an eigenvector of A(beta).

        Raises
        ------
        UnsupportedError
            If zeta = 0.
        InconsistencyError
            If the top block of w vanishes or the recovered pair does not
            solve the pencil.
        """
        zeta = complex(zeta)
        if zeta == 0:
            raise UnsupportedError("the pencil correspondence is undefined "
                                   "at zeta = 0")
        w = np.asarray(w, dtype=complex)
        if w.shape != (2 * sys.n,):
            raise StructuralError(f"expected a {2 * sys.n}-vector, got shape "
                                  f"{w.shape}")
        top = w[:sys.n]
        if np.linalg.norm(top) <= tol.residual * np.linalg.norm(w):
            raise InconsistencyError("eigenvector has a vanishing top block "
                                     "although zeta != 0")
        can = can or CanonicalService.build_canonical(sys, tol)
        pe = PencilEig(zeta=zeta, q_vec=(1.0j / zeta) * (can.k_p @ top))
        residual = cls.pencil_residual(sys, pe, beta)
        if residual > tol.pencil:
            raise InconsistencyError(f"recovered vector does not solve the "
                                     f"pencil (relative residual "
                                     f"{residual:.3e})")
        return pe

    @classmethod
    def hamiltonian_matrix(cls, sys: LagrangianSystem,
                           beta: float) -> np.ndarray:
        """M(beta) = (J - diag(beta R, 0)) M_H; sigma(i M) = sigma(A)."""
        n = sys.n
        zeros = np.zeros((n, n))
        j_mat = np.block([[zeros, -np.eye(n)], [np.eye(n), zeros]])
        loss = np.block([[beta * sys.r_mat, zeros], [zeros, zeros]])
        return (j_mat - loss) @ SystemService.hamiltonian_form(sys)

    @classmethod
    def solve_pencil(cls, sys: LagrangianSystem,
                     beta: float) -> list[PencilEig]:
        """All 2N pencil eigenpairs through the companion linearization.

        [[0, I], [eta, -i D]] x = zeta [[I, 0], [0, alpha]] x with
        x = [q; zeta q] and D = 2 theta + beta R.

        Returns
        -------
        list[PencilEig]
            Unit-norm q vectors.
        """
        n = sys.n
        eye, zeros = np.eye(n), np.zeros((n, n))
        left = np.block([[zeros, eye],
                         [sys.eta, -1.0j * sys.damping_matrix(beta)]])
        right = np.block([[eye, zeros], [zeros, sys.alpha]])
        values, vectors = sl.eig(left, right)
        pairs = []
        for zeta, x in zip(values, vectors.T):
            q = x[:n] if np.linalg.norm(x[:n]) >= np.linalg.norm(x[n:]) * 1e-3 \
                else x[n:] / zeta
            pairs.append(PencilEig(zeta=complex(zeta),
                                   q_vec=q / np.linalg.norm(q)))
        logger.debug("companion pencil solved: %d eigenpairs", len(pairs))
        return pairs

    @classmethod
    def imaginary_root_count(cls, sys: LagrangianSystem, beta: float,
                             tol: Tolerances = DEFAULT_TOLERANCES) -> int:
        """Count real lambda with det C(-i lambda, beta) = 0.

        With theta = 0, p(lambda) = det(-lambda^2 alpha + lambda beta R - eta)
        is a real polynomial of degree 2N; it is sampled at Chebyshev nodes
        and its roots are taken from the fitted coefficients. Each real root
        is an overdamped eigenvalue zeta = -i lambda.

        Raises
        ------
        UnsupportedRegimeError
            If the system is gyroscopic.
        """
        if sys.is_gyroscopic:
            raise UnsupportedRegimeError("the real-root count needs theta = 0")
        degree = 2 * sys.n
        # |lambda| = |zeta| <= |A(beta)|.
        can = CanonicalService.build_canonical(sys, tol)
        radius = op_norm(CanonicalService.system_operator(can, beta)) * 1.05 \
            + 1e-12
        nodes = np.cos(np.pi * (np.arange(degree + 1) + 0.5) / (degree + 1))
        lambdas = radius * nodes
        samples = [float(np.linalg.det(-lam ** 2 * sys.alpha
                                       + lam * beta * sys.r_mat - sys.eta))
                   for lam in lambdas]
        poly = np.polynomial.Chebyshev.fit(lambdas, samples, degree,
                                           domain=[-radius, radius])
        roots = poly.roots()
        scale = max(radius, 1.0)
        real_roots = roots[np.abs(roots.imag) <= np.sqrt(tol.overdamped) * scale]
        return int(real_roots.size)

    @classmethod
    def aitken_factorization(cls, p: np.ndarray, q_blk: np.ndarray,
                             r_blk: np.ndarray, s: np.ndarray
                             ) -> tuple[float, float]:
        """Check M = [[1, Q S^-1], [0, 1]] diag(M/S, S) [[1, 0], [S^-1 R, 1]].

        Returns
        -------
        tuple[float, float]
            Relative reconstruction residual and the relative error of
            det M = det S det(P - Q S^-1 R).

        Raises
        ------
        SingularBlockError
            If S is singular; the commuting-block path handles that case.
        """
        m = cls._assemble(p, q_blk, r_blk, s)
        if np.linalg.cond(s) > 1.0 / np.finfo(float).eps:
            raise SingularBlockError("S is singular; use the commuting-block "
                                     "identity det M = det(PS - QR) when "
                                     "RS = SR")
        s_inv_r = sl.solve(s, r_blk)
        q_s_inv = sl.solve(s.T, q_blk.T).T
        schur = p - q_blk @ s_inv_r
        k, m_dim = p.shape[0], s.shape[0]
        upper = np.block([[np.eye(k), q_s_inv], [np.zeros((m_dim, k)),
                                                np.eye(m_dim)]])
        middle = np.block([[schur, np.zeros((k, m_dim))],
                           [np.zeros((m_dim, k)), s]])
        lower = np.block([[np.eye(k), np.zeros((k, m_dim))],
                          [s_inv_r, np.eye(m_dim)]])
        residual = op_norm(upper @ middle @ lower - m) / max(op_norm(m), 1e-300)
        det_relerr = relative_difference(np.linalg.det(m),
                                         np.linalg.det(s)
                                         * np.linalg.det(schur))
        return residual, det_relerr

    @classmethod
    def commuting_determinant(cls, p: np.ndarray, q_blk: np.ndarray,
                              r_blk: np.ndarray, s: np.ndarray
                              ) -> tuple[float, tuple[float, ...]]:
        """det M = det(PS - QR) for RS = SR, also for singular S.

        For singular S the identity is checked on S + eps I for the
        decreasing eps in ``_LIMIT_EPSILONS``, and the unperturbed values
        are compared directly.

        Returns
        -------
        tuple[float, tuple[float, ...]]
            Relative error at eps = 0 and at every eps.

        Raises
        ------
        PreconditionError
            If R and S do not commute.
        """
        commutator = op_norm(r_blk @ s - s @ r_blk)
        if commutator > 1e-10 * max(op_norm(r_blk) * op_norm(s), 1e-300):
            raise PreconditionError(f"R and S do not commute "
                                    f"(|RS - SR| = {commutator:.3e})")
        m = cls._assemble(p, q_blk, r_blk, s)
        scale = max(op_norm(m), 1.0) ** m.shape[0]
        relerr = relative_difference(np.linalg.det(m),
                                     np.linalg.det(p @ s - q_blk @ r_blk),
                                     np.finfo(float).eps * scale)
        limits = []
        for eps in cls._LIMIT_EPSILONS:
            s_eps = s + eps * np.eye(s.shape[0])
            m_eps = cls._assemble(p, q_blk, r_blk, s_eps)
            limits.append(relative_difference(
                np.linalg.det(m_eps), np.linalg.det(p @ s_eps - q_blk @ r_blk),
                np.finfo(float).eps * scale))
        return relerr, tuple(limits)

    @classmethod
    def schur_identities(cls, p: np.ndarray, q_blk: np.ndarray,
                         r_blk: np.ndarray, s: np.ndarray) -> SchurReport:
        """Run every applicable block identity on M = [[P, Q], [R, S]].

        The Aitken path runs when S is invertible, the commuting path when
        RS = SR.

        Raises
        ------
        SingularBlockError
            If S is singular and R, S do not commute.
        """
        cls._assemble(p, q_blk, r_blk, s)
        singular = np.linalg.cond(s) > 1.0 / np.finfo(float).eps
        commutator = op_norm(r_blk @ s - s @ r_blk)
        commuting = commutator <= 1e-10 * max(op_norm(r_blk) * op_norm(s),
                                              1e-300)
        if singular and not commuting:
            raise SingularBlockError("S is singular and does not commute "
                                     "with R; no determinant identity "
                                     "applies")
        factorization = determinant = None
        if not singular:
            factorization, determinant = cls.aitken_factorization(
                p, q_blk, r_blk, s)
        commuting_relerr, limits = None, ()
        if commuting:
            commuting_relerr, limits = cls.commuting_determinant(
                p, q_blk, r_blk, s)
        return SchurReport(factorization_residual=factorization,
                           determinant_relerr=determinant,
                           commuting=bool(commuting),
                           commuting_relerr=commuting_relerr,
                           limit_relerrs=limits)

    @classmethod
    def _assemble(cls, p, q_blk, r_blk, s) -> np.ndarray:
        p, q_blk, r_blk, s = (np.asarray(x) for x in (p, q_blk, r_blk, s))
        if p.shape[0] != p.shape[1] or s.shape[0] != s.shape[1] \
                or q_blk.shape != (p.shape[0], s.shape[0]) \
                or r_blk.shape != (s.shape[0], p.shape[0]):
            raise StructuralError("blocks are not conformable: "
                                  f"P{p.shape} Q{q_blk.shape} "
                                  f"R{r_blk.shape} S{s.shape}")
        return np.block([[p, q_blk], [r_blk, s]])
