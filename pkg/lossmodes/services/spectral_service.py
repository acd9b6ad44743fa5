"""Service layer for eigensolving the system operator and classifying its
modes."""

import logging

import numpy as np
import scipy.linalg as sl

from lossmodes.errors import (BandViolation, ClassificationAmbiguityError,
                              InvariantViolation, PreconditionError,
                              SolverError)
from lossmodes.models.canonical import CanonicalSystem
from lossmodes.models.components.enums import ModeClass, ModeFlags
from lossmodes.models.components.tolerances import DEFAULT_TOLERANCES, Tolerances
from lossmodes.models.modes import DichotomyResult, Eigensystem, Mode, ModeSet
from lossmodes.models.reports import (BoundsReport, DampingSplitReport,
                                      DiscBound, SymmetryReport)
from lossmodes.services.canonical_service import CanonicalService
from lossmodes.services.linalg import (greedy_match, hermitian_parts, inner,
                                       op_norm)


logger = logging.getLogger(__name__)


class SpectralService:
    # Above this eigenvector condition number the projectors come from an
    # ordered Schur form instead of the eigenbasis.
    _EIGENBASIS_CONDITION_LIMIT = 1e8
    # Marginal classification band around the overdamping tolerance.
    _MARGINAL_FACTOR = 10.0
    # Absolute slack of the disc bounds and damping bands.
    _BOUND_SLACK = 1e-8

    @classmethod
    def eigensolve(cls, a: np.ndarray,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> Eigensystem:
        """Dense eigendecomposition with a residual contract.

        Eigenvectors are unit-normalized and their first nonzero component is
        rotated to the positive real axis.

        Parameters
        ----------
        a: np.ndarray
            Complex square matrix with finite entries.
        tol: Tolerances
            ``tol.residual`` bounds |a w - zeta w| relative to |a|.

        Returns
        -------
        Eigensystem

        Raises
        ------
        SolverError
            If LAPACK fails or a residual exceeds the contract.
        """
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise SolverError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise SolverError("matrix has non-finite entries")
        try:
            values, vectors = sl.eig(a)
        except (sl.LinAlgError, ValueError) as e:
            raise SolverError(f"eigensolver failed: {e} (condition number "
                              f"{np.linalg.cond(a):.3e})") from e

        vectors = vectors / np.linalg.norm(vectors, axis=0)
        for k in range(vectors.shape[1]):
            column = vectors[:, k]
            lead = np.flatnonzero(np.abs(column) > 1e-12)
            if lead.size:
                phase = column[lead[0]] / abs(column[lead[0]])
                vectors[:, k] = column / phase

        matrix_norm = op_norm(a)
        residuals = np.linalg.norm(a @ vectors - vectors * values, axis=0)
        worst = float(np.max(residuals)) if residuals.size else 0.0
        if worst > tol.residual * max(matrix_norm, 1e-300):
            raise SolverError(f"eigenpair residual {worst:.3e} exceeds "
                              f"{tol.residual:g}*|A| = "
                              f"{tol.residual * matrix_norm:.3e}")
        logger.debug("eigensolve: n=%d, |A|=%.6g, worst residual %.3e",
                     a.shape[0], matrix_norm, worst)
        return Eigensystem(values=values, vectors=vectors,
                           residuals=residuals, matrix_norm=matrix_norm)

    @classmethod
    def quality_factor(cls, zeta: complex,
                       tol: Tolerances = DEFAULT_TOLERANCES,
                       scale: float = 1.0) -> float:
        """Q = -|Re zeta| / (2 Im zeta).

        Parameters
        ----------
        zeta: complex
        tol: Tolerances
            ``tol.imag * scale`` is the largest admissible positive Im zeta.
        scale: float (default 1.0)
            Magnitude of the operator the eigenvalue belongs to.

        Returns
        -------
        float
            inf for Im zeta >= 0, 0 for a purely imaginary zeta.

        Raises
        ------
        InvariantViolation
            If Im zeta > tol.imag * scale (the mode would gain energy).
        """
        zeta = complex(zeta)
        if zeta.imag > tol.imag * max(scale, 1.0):
            raise InvariantViolation(f"dissipativity violated: Im zeta = "
                                     f"{zeta.imag:.3e} > 0")
        if zeta.imag >= 0.0:
            return float("inf")
        return -0.5 * abs(zeta.real) / zeta.imag

    @classmethod
    def is_overdamped(cls, zeta: complex,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """|Re zeta| <= tol.overdamped * max(1, |Im zeta|)."""
        return abs(zeta.real) <= tol.overdamped * max(1.0, abs(zeta.imag))

    @classmethod
    def mode_flags(cls, zeta: complex, scale: float,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> ModeFlags:
        threshold = tol.overdamped * max(1.0, abs(zeta.imag))
        flags = ModeFlags(0)
        if abs(zeta.real) <= threshold:
            flags |= ModeFlags.overdamped
        if threshold / cls._MARGINAL_FACTOR < abs(zeta.real) \
                <= threshold * cls._MARGINAL_FACTOR:
            flags |= ModeFlags.marginal
        if abs(zeta.imag) <= tol.imag * max(scale, 1.0):
            flags |= ModeFlags.lossless
        return flags

    @classmethod
    def modes(cls, can: CanonicalSystem, beta: float,
              tol: Tolerances = DEFAULT_TOLERANCES) -> ModeSet:
        """Eigenmodes of A(beta) with Q-factors, flags and cluster classes.

        Lossless modes (zeta = 0 included) get Q = inf and the remaining
        overdamped modes Q = 0. Classes are sigma0/sigma1 when the dichotomy
        hypothesis holds, else n/a.

        Parameters
        ----------
        can: CanonicalSystem
        beta: float
        tol: Tolerances

        Returns
        -------
        ModeSet

        Raises
        ------
        SolverError
            If the eigensolve fails its contract.
        InvariantViolation
            If an eigenvalue lies in the upper half-plane.
        """
        assert isinstance(can, CanonicalSystem)
        a = CanonicalService.system_operator(can, beta)
        es = cls.eigensolve(a, tol)

        split = None
        try:
            split = cls.dichotomy(a, tol)
        except ClassificationAmbiguityError as e:
            logger.warning("beta=%g: %s; modes left unclassified", beta, e)
        except PreconditionError as e:
            logger.debug("beta=%g: no dichotomy (%s)", beta, e)

        modes = []
        for zeta, w, residual in zip(es.values, es.vectors.T, es.residuals):
            zeta = complex(zeta)
            flags = cls.mode_flags(zeta, es.matrix_norm, tol)
            q_factor = cls.quality_factor(zeta, tol, es.matrix_norm)
            if flags & ModeFlags.lossless:
                q_factor = float("inf")
            elif flags & ModeFlags.overdamped:
                q_factor = 0.0
            if split is None:
                mode_class = ModeClass.unclassified
            elif abs(zeta) < split.r0:
                mode_class = ModeClass.sigma0
            else:
                mode_class = ModeClass.sigma1
            modes.append(Mode(zeta=zeta, w=w.copy(), residual=float(residual),
                              mode_class=mode_class, flags=flags,
                              q_factor=q_factor))

        marginal = [m for m in modes if m.marginal]
        if marginal:
            logger.warning("beta=%g: %d mode(s) near critical damping",
                           beta, len(marginal))
        return ModeSet(beta, a, modes, dichotomy_holds=split is not None)

    @classmethod
    def check_symmetry(cls, ms: ModeSet,
                       tol: Tolerances = DEFAULT_TOLERANCES
                       ) -> SymmetryReport:
        """Check sigma(A) = -conj(sigma(A)) and the eigenvector pairing.

        A conj(w) = -conj(zeta) conj(w) whenever A w = zeta w. At beta = 0
        the spectrum is also checked to be real and symmetric about 0.

        Returns
        -------
        SymmetryReport
        """
        assert isinstance(ms, ModeSet)
        a = ms.operator
        scale = max(op_norm(a), 1.0)
        zetas = ms.zetas
        _, mismatch = greedy_match(zetas, -zetas.conj())

        pairing = 0.0
        for mode in ms:
            w_bar = mode.w.conj()
            pairing = max(pairing, float(np.linalg.norm(
                a @ w_bar + mode.zeta.conjugate() * w_bar)) / scale)

        origin_mismatch = max_imag = None
        passed = mismatch <= tol.match * scale and pairing <= tol.residual
        if ms.beta == 0.0:
            _, origin_mismatch = greedy_match(zetas, -zetas)
            max_imag = float(np.max(np.abs(zetas.imag))) / scale \
                if zetas.size else 0.0
            passed = passed and origin_mismatch <= tol.match * scale \
                and max_imag <= tol.imag
        return SymmetryReport(multiset_mismatch=mismatch,
                              pairing_residual=pairing,
                              origin_mismatch=origin_mismatch,
                              max_imag_at_zero=max_imag, passed=bool(passed))

    @classmethod
    def eigenvalue_bounds_check(cls, m: np.ndarray) -> BoundsReport:
        """Disc bounds for the eigenvalues of an arbitrary square matrix.

        Each eigenvalue lies within |Re m| of some i*gamma, gamma in
        sigma(Im m), and |Im m| >= |Im zeta| >= |gamma| - |Re m| for the
        witnessing gamma.

        Returns
        -------
        BoundsReport
        """
        m = np.asarray(m, dtype=complex)
        re_m, im_m = hermitian_parts(m)
        re_norm, im_norm = op_norm(re_m), op_norm(im_m)
        gammas = sl.eigvalsh(im_m)
        slack = cls._BOUND_SLACK * max(1.0, op_norm(m))

        bounds = []
        for zeta in sl.eigvals(m):
            distances = np.abs(zeta - 1.0j * gammas)
            nearest = int(np.argmin(distances))
            gamma = float(gammas[nearest])
            distance = float(distances[nearest])
            bounds.append(DiscBound(
                zeta=complex(zeta), distance=distance, gamma=gamma,
                contained=distance <= re_norm + slack,
                imag_bounded=abs(zeta.imag) <= im_norm + slack,
                lower_bound_holds=abs(zeta.imag) >= abs(gamma) - re_norm
                - slack))
        return BoundsReport(re_norm=re_norm, im_norm=im_norm,
                            bounds=tuple(bounds))

    @classmethod
    def dichotomy(cls, a: np.ndarray,
                  tol: Tolerances = DEFAULT_TOLERANCES) -> DichotomyResult:
        """Split sigma(a) into the cluster at the origin and the clusters at
        the nonzero i*gamma_j, with the spectral projectors.

        Parameters
        ----------
        a: np.ndarray
            Complex square matrix.
        tol: Tolerances

        Returns
        -------
        DichotomyResult

        Raises
        ------
        PreconditionError
            If min |gamma_j| <= 2 |Re a| over the nonzero gamma_j.
        ClassificationAmbiguityError
            If an eigenvalue lies in both families of discs or in none.
        """
        a = np.asarray(a, dtype=complex)
        n = a.shape[0]
        re_a, im_a = hermitian_parts(a)
        radius = op_norm(re_a)
        gammas = sl.eigvalsh(im_a)
        nonzero = np.abs(gammas) > tol.rank_threshold(np.abs(gammas), n)
        if not np.any(nonzero):
            raise PreconditionError("Im A has no nonzero eigenvalue; the "
                                    "dichotomy needs losses")
        gamma_min = float(np.min(np.abs(gammas[nonzero])))
        ratio = gamma_min / (2.0 * radius) if radius > 0.0 else float("inf")
        if ratio <= 1.0:
            raise PreconditionError(f"dichotomy hypothesis violated: "
                                    f"min|gamma| / (2|Re A|) = {ratio:.6g} "
                                    f"<= 1")
        r0 = gamma_min / 2.0
        slack = cls._BOUND_SLACK * max(1.0, op_norm(a))

        values, vectors = sl.eig(a)
        centers = 1.0j * gammas[nonzero]
        in_low = np.abs(values) <= radius + slack
        in_high = np.array([np.min(np.abs(z - centers)) <= radius + slack
                            for z in values])
        ambiguous = np.flatnonzero(in_low == in_high)
        if ambiguous.size:
            zeta = values[ambiguous[0]]
            raise ClassificationAmbiguityError(
                f"eigenvalue {zeta:.6g} cannot be assigned to a single "
                f"cluster (r0={r0:.6g}, |Re A|={radius:.6g})")

        if np.linalg.cond(vectors) < cls._EIGENBASIS_CONDITION_LIMIT:
            dual = np.linalg.inv(vectors)
            p0 = vectors[:, in_low] @ dual[in_low, :]
        else:
            p0 = cls._schur_projector(a, r0)
        p1 = np.eye(n) - p0

        rank_p0 = int(round(float(np.trace(p0).real)))
        ranks = (n - rank_p0, rank_p0)
        logger.debug("dichotomy: |sigma0|=%d, |sigma1|=%d, ratio %.3g",
                     int(in_low.sum()), int(in_high.sum()), ratio)
        return DichotomyResult(matrix=a, sigma0=values[in_low],
                               sigma1=values[in_high], p0=p0, p1=p1, r0=r0,
                               radius=radius, gammas=gammas[nonzero],
                               ranks=ranks)

    @classmethod
    def dichotomy_damping_split(cls, d: DichotomyResult, omega_max: float,
                                b_min: float, beta: float,
                                tol: Tolerances = DEFAULT_TOLERANCES
                                ) -> DampingSplitReport:
        """Damping bands of the two clusters of A(beta).

        Low-loss modes have 0 <= -Im zeta <= omega_max; high-loss modes have
        -Im zeta >= beta b_min - omega_max and
        Q <= omega_max / (2 (beta b_min - omega_max)).

        Raises
        ------
        BandViolation
            Naming the first eigenvalue outside its band.
        """
        assert isinstance(d, DichotomyResult)
        slack = cls._BOUND_SLACK * max(1.0, beta * b_min)
        high_edge = beta * b_min - omega_max
        if high_edge <= 0.0:
            raise PreconditionError("beta b_min <= omega_max; the high-loss "
                                    "band is empty")

        for zeta in d.sigma0:
            if not -slack <= -zeta.imag <= omega_max + slack:
                raise BandViolation(f"low-loss eigenvalue {zeta:.6g} outside "
                                    f"0 <= -Im zeta <= {omega_max:.6g}")
        for zeta in d.sigma1:
            if -zeta.imag < high_edge - slack:
                raise BandViolation(f"high-loss eigenvalue {zeta:.6g} below "
                                    f"the band edge {high_edge:.6g}")

        q_bound = 0.5 * omega_max / high_edge
        high_q = [cls.quality_factor(z, tol, beta * b_min) for z in d.sigma1]
        max_high_q = max(high_q, default=0.0)
        if max_high_q > q_bound + slack:
            raise BandViolation(f"high-loss Q {max_high_q:.6g} exceeds the "
                                f"bound {q_bound:.6g}")
        return DampingSplitReport(
            low_band_edge=omega_max, high_band_edge=high_edge,
            q_bound=q_bound,
            max_low_damping=max((-z.imag for z in d.sigma0), default=0.0),
            min_high_damping=min((-z.imag for z in d.sigma1),
                                 default=float("inf")),
            max_high_q=max_high_q)

    @classmethod
    def match_spectra(cls, x: np.ndarray, y: np.ndarray
                      ) -> tuple[list[tuple[int, int]], float]:
        """Greedy nearest-pair matching of two eigenvalue multisets."""
        return greedy_match(x, y)

    @classmethod
    def rayleigh_identities(cls, can: CanonicalSystem, mode: Mode,
                            beta: float) -> dict[str, float]:
        """Re zeta = (w, Omega w)/(w, w) and -Im zeta = beta (w, B w)/(w, w).

        Returns
        -------
        dict[str, float]
            The two quotients and their absolute deviations from zeta.
        """
        w = mode.w
        norm_sq = inner(w, w).real
        frequency = inner(w, can.omega @ w).real / norm_sq
        damping = beta * inner(w, can.b_mat @ w).real / norm_sq
        return {"frequency": frequency, "damping": damping,
                "frequency_residual": abs(mode.zeta.real - frequency),
                "damping_residual": abs(-mode.zeta.imag - damping)}

    @classmethod
    def mode_quality_factor(cls, can: CanonicalSystem, mode: Mode,
                            beta: float) -> float:
        """Q[w] = |Re zeta| U[w] / W_dis[w] from the mode's energetics."""
        energy, dissipation, _ = CanonicalService.canonical_energies(
            can, mode.w, beta)
        if dissipation <= 0.0:
            return float("inf")
        return abs(mode.zeta.real) * energy / dissipation

    @classmethod
    def _schur_projector(cls, a: np.ndarray, r0: float) -> np.ndarray:
        """Projector onto the invariant subspace of sigma(a) inside |z| < r0.

        T = [[T11, T12], [0, T22]] with sigma(T11) inside the disc; the
        block-diagonalizing Y solves T11 Y - Y T22 = -T12.
        """
        t_mat, z_mat, k = sl.schur(a, output="complex",
                                   sort=lambda x: abs(x) < r0)
        n = a.shape[0]
        if k in (0, n):
            return np.eye(n, dtype=complex) * float(k == n)
        y = sl.solve_sylvester(t_mat[:k, :k], -t_mat[k:, k:], -t_mat[:k, k:])
        p0_t = np.zeros((n, n), dtype=complex)
        p0_t[:k, :k] = np.eye(k)
        p0_t[:k, k:] = -y
        return z_mat @ p0_t @ z_mat.conj().T
