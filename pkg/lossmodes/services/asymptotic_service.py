"""Service layer for the large-loss spectral asymptotics and the overdamping
theory of systems without gyroscopy."""

import logging

import numpy as np
import scipy.linalg as sl
from scipy.optimize import linear_sum_assignment

from lossmodes.errors import (DegenerateFitError, InvariantViolation,
                              PreconditionError, TrackingError,
                              UnsupportedRegimeError)
from lossmodes.models.asymptotic import (AsymptoticSpectrum, HighLossMode,
                                         LossSubspace, LowLossMode,
                                         QPrediction, Thresholds, TrackedModes)
from lossmodes.models.canonical import CanonicalSystem
from lossmodes.models.components.enums import ModeClass, QTrend, Regime
from lossmodes.models.components.tolerances import DEFAULT_TOLERANCES, Tolerances
from lossmodes.models.modes import PencilEig
from lossmodes.models.reports import (Check, Claim, ErrorOrders,
                                      InequalityReport, OverdampingReport,
                                      QGrowthReport)
from lossmodes.models.system import LagrangianSystem, State
from lossmodes.services.canonical_service import CanonicalService
from lossmodes.services.linalg import (group_close, inner, numerical_rank,
                                       op_norm, range_and_kernel)
from lossmodes.services.pencil_service import PencilService
from lossmodes.services.spectral_service import SpectralService
from lossmodes.services.system_service import SystemService


logger = logging.getLogger(__name__)


class AsymptoticService:
    # Relative width of a group of coinciding first-order coefficients.
    _GROUP_TOL = 1e-8
    # Q values may drop by this fraction between grid points.
    _Q_MONOTONE_TOL = 0.01
    # Step halvings allowed per grid interval while tracking.
    _MAX_HALVINGS = 6
    # Assignment is ambiguous when the best match is farther than this
    # fraction of the second best.
    _AMBIGUITY_RATIO = 0.5

    @classmethod
    def decompose_loss_subspace(cls, can: CanonicalSystem,
                                tol: Tolerances = DEFAULT_TOLERANCES
                                ) -> LossSubspace:
        """Blocks of Omega in orthonormal bases of Ran B and Ker B.

        Parameters
        ----------
        can: CanonicalSystem

        Returns
        -------
        LossSubspace

        Raises
        ------
        InvariantViolation
            If B = 0.
        """
        assert isinstance(can, CanonicalSystem)
        b_values, range_basis, kernel_basis = range_and_kernel(can.b_mat, tol)
        if b_values.size == 0:
            raise InvariantViolation("B has rank 0; a dissipative system "
                                     "needs R != 0")
        range_basis = range_basis.astype(complex)
        kernel_basis = kernel_basis.astype(complex)
        omega = can.omega
        subspace = LossSubspace(
            b_values=b_values, range_basis=range_basis,
            kernel_basis=kernel_basis,
            b2=range_basis.conj().T @ can.b_mat @ range_basis,
            omega2=range_basis.conj().T @ omega @ range_basis,
            theta=range_basis.conj().T @ omega @ kernel_basis,
            omega1=kernel_basis.conj().T @ omega @ kernel_basis)
        logger.debug("loss subspace: dim Ran B=%d, dim Ker B=%d",
                     b_values.size, kernel_basis.shape[1])
        return subspace

    @classmethod
    def asymptotic_spectrum(cls, can: CanonicalSystem,
                            tol: Tolerances = DEFAULT_TOLERANCES
                            ) -> AsymptoticSpectrum:
        """First-order large-loss data {b_j, rho_j} and {rho_j, d_j}.

        High-loss: b_j are the nonzero eigenvalues of B and
        rho_j = (w0_j, Omega w0_j). Low-loss: rho_j are the eigenvalues of
        Omega1 and d_j = (w0_j, Theta* B2^-1 Theta w0_j). Coinciding b_j
        (resp. rho_j) are resolved by diagonalizing Omega2
        (resp. Theta* B2^-1 Theta) inside the group; such modes are flagged
        degenerate. Values of rho below the rank cutoff are set to 0.

        Returns
        -------
        AsymptoticSpectrum
        """
        split = cls.decompose_loss_subspace(can, tol)
        scale = max(op_norm(can.omega), op_norm(can.b_mat))
        zero_floor = max(can.omega.shape[0] * np.finfo(float).eps, tol.rank) \
            * scale

        def snapped(value: float) -> float:
            return 0.0 if abs(value) <= zero_floor else float(value)

        high_loss = []
        b_values = split.b_values
        for group in group_close(b_values, cls._GROUP_TOL * b_values[0]):
            rotation = np.eye(len(group), dtype=complex)
            if len(group) > 1:
                block = split.omega2[np.ix_(group, group)]
                _, rotation = sl.eigh((block + block.conj().T) / 2.0)
                logger.warning("high-loss coefficient b=%.6g has "
                               "multiplicity %d; first-order data flagged",
                               b_values[group[0]], len(group))
            vectors = split.range_basis[:, group] @ rotation
            for w0 in vectors.T:
                high_loss.append(HighLossMode(
                    b=float(inner(w0, can.b_mat @ w0).real),
                    rho=snapped(inner(w0, can.omega @ w0).real),
                    w0=w0, degenerate=len(group) > 1))

        low_loss = []
        if split.kernel_basis.shape[1]:
            coupling = split.theta.conj().T @ np.diag(1.0 / b_values) \
                @ split.theta
            coupling = (coupling + coupling.conj().T) / 2.0
            omega1 = (split.omega1 + split.omega1.conj().T) / 2.0
            rhos, vectors = sl.eigh(omega1)
            for group in group_close(rhos, max(cls._GROUP_TOL * scale,
                                               zero_floor)):
                rotation = np.eye(len(group), dtype=complex)
                if len(group) > 1:
                    _, rotation = sl.eigh(coupling[np.ix_(group, group)])
                local = vectors[:, group] @ rotation
                for z in local.T:
                    d = float(inner(z, coupling @ z).real)
                    low_loss.append(LowLossMode(
                        rho=snapped(inner(z, omega1 @ z).real),
                        d=max(d, 0.0) if d > -1e-12 * scale else d,
                        w0=split.kernel_basis @ z,
                        degenerate=len(group) > 1 and abs(rhos[group[0]])
                        > zero_floor))
        low_loss.sort(key=lambda m: m.rho)
        kappa = sum(1 for m in low_loss if m.rho == 0.0)
        return AsymptoticSpectrum(high_loss, low_loss, kappa)

    @classmethod
    def predict_eigenvalues(cls, asym: AsymptoticSpectrum,
                            beta: float) -> list[complex]:
        """-i b_j beta + rho_j for high-loss, rho_j - i d_j / beta for
        low-loss modes (in this order)."""
        assert isinstance(asym, AsymptoticSpectrum)
        if beta <= 0.0:
            raise PreconditionError("asymptotic predictions need beta > 0")
        return [m.prediction(beta) for m in asym.high_loss] \
            + [m.prediction(beta) for m in asym.low_loss]

    @classmethod
    def predict_q_factors(cls, asym: AsymptoticSpectrum,
                          beta: float) -> list[QPrediction]:
        """Leading-order quality factors.

        High-loss: |rho| / (2 b beta). Low-loss: |rho| beta / (2 d) when
        d != 0, inf when d = 0 and rho != 0, 0 when rho = 0.
        """
        if beta <= 0.0:
            raise PreconditionError("asymptotic predictions need beta > 0")
        predictions = [QPrediction(0.5 * abs(m.rho) / (m.b * beta),
                                   QTrend.vanishing)
                       for m in asym.high_loss]
        for mode in asym.low_loss:
            if mode.rho == 0.0:
                predictions.append(QPrediction(0.0, QTrend.vanishing))
            elif mode.d == 0.0:
                predictions.append(QPrediction(float("inf"), QTrend.infinite))
            else:
                predictions.append(QPrediction(
                    0.5 * abs(mode.rho) * beta / mode.d, QTrend.growing))
        return predictions

    @classmethod
    def thresholds(cls, sys: LagrangianSystem, can: CanonicalSystem,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> Thresholds:
        """omega_max, omega_min, b_min and beta_star = 2 omega_max / b_min.

        Raises
        ------
        UnsupportedRegimeError
            If theta != 0.
        InvariantViolation
            If omega_max or b_min disagree with |Omega| and the spectrum of B
            taken from ``can``.
        """
        cls._require_no_gyroscopy(sys)
        frequencies_sq = np.clip(sl.eigh(sys.eta, sys.alpha,
                                         eigvals_only=True), 0.0, None)
        losses = sl.eigh(sys.r_mat, sys.alpha, eigvals_only=True)
        positive_freq = frequencies_sq[frequencies_sq > tol.rank_threshold(
            frequencies_sq, sys.n)]
        positive_loss = losses[losses > tol.rank_threshold(np.abs(losses),
                                                           sys.n)]
        if positive_loss.size == 0:
            raise InvariantViolation("alpha^-1 R has no positive eigenvalue")

        omega_max = float(np.sqrt(frequencies_sq.max()))
        omega_min = float(np.sqrt(positive_freq.min())) \
            if positive_freq.size else None
        b_min = float(positive_loss.min())
        omega_norm = op_norm(can.omega)
        b_operator = sl.eigvalsh(can.b_mat)
        b_operator = b_operator[b_operator > tol.rank_threshold(
            np.abs(b_operator), b_operator.size)]
        b_min_operator = float(b_operator.min())

        loss_scale = max(float(losses.max()), 1.0)
        if abs(omega_norm - omega_max) > 1e-9 * max(omega_max, 1.0) \
                or abs(b_min_operator - b_min) > 1e-9 * loss_scale:
            raise InvariantViolation(
                f"threshold cross-check failed: omega_max {omega_max:.12g} vs "
                f"|Omega| {omega_norm:.12g}, b_min {b_min:.12g} vs "
                f"{b_min_operator:.12g}")
        return Thresholds(omega_max=omega_max, omega_min=omega_min,
                          b_min=b_min, beta_star=2.0 * omega_max / b_min,
                          omega_norm=omega_norm,
                          b_min_operator=b_min_operator)

    @classmethod
    def fundamental_inequalities(cls, sys: LagrangianSystem, thr: Thresholds,
                                 zeta: complex, q: np.ndarray, beta: float,
                                 tol: Tolerances = DEFAULT_TOLERANCES
                                 ) -> InequalityReport:
        """Frequency and damping inequalities on one pencil eigenpair.

        Always: sqrt((q, eta q)/(q, alpha q)) <= omega_max, and >= omega_min
        when eta is invertible; (q, R q)/(q, alpha q) >= b_min when R is
        invertible. Oscillatory modes: -Im zeta = (beta/2) (q,Rq)/(q,alpha q),
        |zeta| = sqrt((q,eta q)/(q,alpha q)), -Im zeta < |zeta| and T = V.
        Overdamping certificates: -Im zeta >= omega_max, or |zeta| < omega_min
        with eta invertible, imply Re zeta = 0.

        Raises
        ------
        PreconditionError
            If (zeta, q) is not a pencil eigenpair to tolerance.
        """
        cls._require_no_gyroscopy(sys)
        zeta = complex(zeta)
        q = np.asarray(q, dtype=complex)
        residual = PencilService.pencil_residual(sys, PencilEig(zeta, q),
                                                 beta)
        if residual > tol.pencil:
            raise PreconditionError(f"not a pencil eigenpair: relative "
                                    f"residual {residual:.3e}")

        kinetic = inner(q, sys.alpha @ q).real
        frequency = np.sqrt(max(inner(q, sys.eta @ q).real, 0.0) / kinetic)
        loss_ratio = inner(q, sys.r_mat @ q).real / kinetic
        scale = max(1.0, thr.omega_max, beta * loss_ratio, abs(zeta))
        slack = tol.pencil * scale
        eta_invertible = numerical_rank(sys.eta, tol) == sys.n
        r_invertible = numerical_rank(sys.r_mat, tol) == sys.n

        checks = [Check("frequency upper bound",
                        frequency <= thr.omega_max + slack,
                        thr.omega_max - frequency)]
        if eta_invertible and thr.omega_min is not None:
            checks.append(Check("frequency lower bound",
                                frequency >= thr.omega_min - slack,
                                frequency - thr.omega_min))
        if r_invertible:
            checks.append(Check("loss lower bound",
                                loss_ratio >= thr.b_min - slack,
                                loss_ratio - thr.b_min))

        oscillatory = not SpectralService.is_overdamped(zeta, tol)
        if oscillatory:
            damping = -zeta.imag
            damping_gap = abs(damping - 0.5 * beta * loss_ratio)
            modulus_gap = abs(abs(zeta) - frequency)
            checks.extend([
                Check("damping quotient", damping_gap <= slack, damping_gap),
                Check("modulus quotient", modulus_gap <= slack, modulus_gap),
                Check("damping below modulus", damping < abs(zeta) + slack,
                      abs(zeta) - damping)])
            energies = SystemService.energies(sys, State(q, -1.0j * zeta * q),
                                              beta=beta)
            gap = abs(energies.kinetic - energies.potential)
            size = abs(energies.kinetic) + abs(energies.potential)
            checks.append(Check("equipartition", gap <= tol.pencil * size,
                                gap))

        certified = False
        if -zeta.imag >= thr.omega_max - slack:
            holds = abs(zeta.real) <= tol.overdamped * max(1.0, abs(zeta))
            checks.append(Check("overdamping certificate (damping)", holds,
                                abs(zeta.real)))
            certified = certified or holds
        if eta_invertible and thr.omega_min is not None \
                and abs(zeta) < thr.omega_min - slack:
            holds = abs(zeta.real) <= tol.overdamped * max(1.0, abs(zeta))
            checks.append(Check("overdamping certificate (modulus)", holds,
                                abs(zeta.real)))
            certified = certified or holds
        return InequalityReport(checks=tuple(checks), oscillatory=oscillatory,
                                certified_overdamped=certified)

    @classmethod
    def classify_overdamping(cls, sys: LagrangianSystem, can: CanonicalSystem,
                             beta: float,
                             tol: Tolerances = DEFAULT_TOLERANCES
                             ) -> OverdampingReport:
        """Per-mode overdamping flags, counts, regime and checked claims.

        Claims: complete overdamping (N_R = N, beta >= beta_star), overdamped
        high-loss cluster (N_R < N, beta > beta_star), kappa = N_R and the
        large-loss counts 2 N_R / 2N - 2 N_R (nondegenerate systems with
        beta >= tol.asymptotic_factor * max(beta_star, 1)).

        Returns
        -------
        OverdampingReport

        Raises
        ------
        UnsupportedRegimeError
            If theta != 0.
        """
        cls._require_no_gyroscopy(sys)
        thr = cls.thresholds(sys, can, tol)
        ms = SpectralService.modes(can, beta, tol)
        n, n_r = sys.n, SystemService.loss_fraction(sys, tol).n_r
        nondegenerate = SystemService.is_nondegenerate(sys, tol)
        asym = cls.asymptotic_spectrum(can, tol)
        overdamped = len(ms.overdamped())
        oscillatory = len(ms) - overdamped
        above = beta >= thr.beta_star * (1.0 - 1e-12)
        warnings = []

        claims = [Claim("complete overdamping",
                        applicable=n_r == n and above,
                        holds=overdamped == 2 * n if n_r == n and above
                        else None,
                        detail=f"{overdamped}/{2 * n} overdamped")]

        high_loss_applicable = n_r < n and beta > thr.beta_star
        high = ms.of_class(ModeClass.sigma1)
        high_holds = None
        if high_loss_applicable:
            high_holds = len(high) == n_r and all(m.overdamped for m in high)
        claims.append(Claim("high-loss modes overdamped",
                            applicable=high_loss_applicable, holds=high_holds,
                            detail=f"{sum(m.overdamped for m in high)}/"
                                   f"{len(high)} high-loss overdamped"))

        if not nondegenerate:
            warnings.append("Ker eta and Ker R intersect; kappa and "
                            "large-loss count claims suppressed")
            logger.warning("beta=%g: nondegeneracy violated, large-loss "
                           "claims suppressed", beta)
        claims.append(Claim("kappa equals N_R", applicable=nondegenerate,
                            holds=asym.kappa == n_r if nondegenerate else None,
                            detail=f"kappa={asym.kappa}, N_R={n_r}"))

        large = beta >= tol.asymptotic_factor * max(thr.beta_star, 1.0)
        counts_applicable = nondegenerate and large
        claims.append(Claim(
            "large-loss counts", applicable=counts_applicable,
            holds=(overdamped == 2 * n_r and oscillatory == 2 * n - 2 * n_r)
            if counts_applicable else None,
            detail=f"overdamped {overdamped} (expected {2 * n_r}), "
                   f"oscillatory {oscillatory} (expected {2 * n - 2 * n_r})"))

        if asym.degenerate:
            warnings.append("degenerate first-order coefficients; asymptotic "
                            "classification flagged")
        marginal = [k for k, m in enumerate(ms) if m.marginal]
        if marginal:
            warnings.append(f"modes {marginal} are near critical damping")

        if not above:
            regime = Regime.below_threshold
        elif overdamped == len(ms):
            regime = Regime.complete
        else:
            regime = Regime.selective
        logger.info("beta=%g: regime %s, %d overdamped, %d oscillatory", beta,
                    regime, overdamped, oscillatory)

        modes = tuple({"index": k, "zeta": m.zeta, "q_factor": m.q_factor,
                       "class": str(m.mode_class), "flags": str(m.flags),
                       "overdamped": m.overdamped, "marginal": m.marginal}
                      for k, m in enumerate(ms))
        return OverdampingReport(
            beta=float(beta), regime=str(regime), n=n, n_r=n_r,
            kappa=asym.kappa, nondegenerate=nondegenerate,
            overdamped_count=overdamped, oscillatory_count=oscillatory,
            thresholds=thr.as_dict(), modes=modes, claims=tuple(claims),
            warnings=tuple(warnings))

    @classmethod
    def oscillatory_q_growth(cls, sys: LagrangianSystem, can: CanonicalSystem,
                             beta_grid: list[float],
                             tol: Tolerances = DEFAULT_TOLERANCES
                             ) -> QGrowthReport:
        """Quality factors of the modes still oscillating at the end of the
        grid, tracked across the grid.

        Each tracked Q must be nondecreasing up to a 1% drop, or infinite.
        The log-log slope of Q(beta) is fitted when all values are finite.

        Raises
        ------
        DegenerateFitError
            If the grid has fewer than 2 points.
        PreconditionError
            If R is invertible, the system is degenerate or the grid starts
            below beta_star.
        TrackingError
            If eigenvalues collide along the grid.
        """
        cls._require_no_gyroscopy(sys)
        betas = np.sort(np.asarray(beta_grid, dtype=float))
        if betas.size < 2:
            raise DegenerateFitError("the Q trend needs at least two loss "
                                     "parameters")
        n_r = SystemService.loss_fraction(sys, tol).n_r
        if n_r == sys.n:
            raise PreconditionError("R is invertible; no low-loss mode stays "
                                    "oscillatory")
        if not SystemService.is_nondegenerate(sys, tol):
            raise PreconditionError("Ker eta and Ker R intersect")
        thr = cls.thresholds(sys, can, tol)
        if betas[0] <= thr.beta_star:
            raise PreconditionError(f"grid starts at {betas[0]:g}, below "
                                    f"beta_star = {thr.beta_star:.6g}")

        tracked = cls.track_modes(can, betas, tol, strict=True)
        last = tracked.zetas[-1]
        columns = [j for j, zeta in enumerate(last)
                   if not SpectralService.is_overdamped(complex(zeta), tol)]

        scale = op_norm(CanonicalService.system_operator(can, betas[-1]))
        q_values, nondecreasing, slopes = [], [], []
        for j in columns:
            series = [SpectralService.quality_factor(complex(z), tol, scale)
                      for z in tracked.zetas[:, j]]
            finite = np.isfinite(series)
            ok = all(not np.isfinite(later) or later >= (1.0
                     - cls._Q_MONOTONE_TOL) * earlier
                     for earlier, later in zip(series, series[1:]))
            slope = None
            if finite.all() and min(series) > 0.0:
                slope = float(np.polyfit(np.log(betas), np.log(series), 1)[0])
            q_values.append(tuple(series))
            nondecreasing.append(bool(ok))
            slopes.append(slope)
        return QGrowthReport(betas=tuple(float(b) for b in betas),
                             q_values=tuple(q_values),
                             nondecreasing=tuple(nondecreasing),
                             slopes=tuple(slopes))

    @classmethod
    def track_modes(cls, can: CanonicalSystem, beta_grid: list[float],
                    tol: Tolerances = DEFAULT_TOLERANCES,
                    strict: bool = False) -> TrackedModes:
        """Continue all 2N eigenvalues of A(beta) along a monotone grid.

        Each step predicts zeta + dbeta * dzeta/dbeta with
        dzeta/dbeta = -i (v, B w) / (v, w) from left and right eigenvectors,
        then assigns the new eigenvalues to the predictions by minimal total
        distance. An assignment is ambiguous when a best match is not
        clearly closer than the second best; the step is then halved up to
        ``_MAX_HALVINGS`` times before the columns are flagged as colliding.

        Parameters
        ----------
        can: CanonicalSystem
        beta_grid: list[float]
            Strictly monotone loss parameters.
        strict: bool (default False)
            Raise TrackingError on a collision instead of flagging it.

        Returns
        -------
        TrackedModes
        """
        betas = np.asarray(beta_grid, dtype=float)
        steps = np.diff(betas)
        if betas.size == 0 or not (np.all(steps > 0) or np.all(steps < 0)):
            raise PreconditionError("the loss parameter grid must be "
                                    "strictly monotone")

        values, right, left = cls._eig_with_left(can, betas[0])
        order = sorted(range(values.size), key=lambda k: (
            -round(-values[k].imag, 9), round(values[k].real, 9)))
        values, right, left = values[order], right[:, order], left[:, order]

        rows = [values.copy()]
        collisions = []
        refinements = 0
        for beta_from, beta_to in zip(betas, betas[1:]):
            state = (values, right, left)
            current, halvings = beta_from, 0
            while current != beta_to:
                step_to = beta_to if halvings == 0 \
                    else current + (beta_to - current) / 2 ** halvings
                new_state, ambiguous = cls._track_step(can, state, current,
                                                       step_to)
                if ambiguous and halvings < cls._MAX_HALVINGS:
                    halvings += 1
                    refinements += 1
                    continue
                if ambiguous:
                    message = f"eigenvalue collision near beta={step_to:.6g} " \
                              f"in tracked modes {sorted(ambiguous)}"
                    if strict:
                        raise TrackingError(message)
                    logger.warning(message)
                    collisions.append((float(beta_to),
                                       tuple(sorted(ambiguous))))
                state, current = new_state, step_to
                halvings = max(halvings - 1, 0)
            values, right, left = state
            rows.append(values.copy())
        logger.debug("tracked %d modes over %d points with %d refinements",
                     rows[0].size, betas.size, refinements)
        return TrackedModes(betas, np.vstack(rows), collisions, refinements)

    @classmethod
    def asymptotic_error_orders(cls, can: CanonicalSystem,
                                betas: list[float],
                                tol: Tolerances = DEFAULT_TOLERANCES
                                ) -> ErrorOrders:
        """Fitted exponents p of |zeta_j(beta) - prediction_j| ~ beta^p.

        Errors at the rounding level of A(beta) are dropped; an exponent
        with fewer than two usable points is None.

        Raises
        ------
        DegenerateFitError
            If fewer than two loss parameters are given.
        """
        betas = np.sort(np.asarray(betas, dtype=float))
        if betas.size < 2:
            raise DegenerateFitError("error orders need at least two loss "
                                     "parameters")
        asym = cls.asymptotic_spectrum(can, tol)
        n_r = asym.n_r
        high, low_re, low_im = [], [], []
        floors = []
        for beta in betas:
            a = CanonicalService.system_operator(can, beta)
            computed = SpectralService.eigensolve(a, tol).values
            predicted = np.array(cls.predict_eigenvalues(asym, beta))
            cost = np.abs(predicted[:, None] - computed[None, :])
            rows, cols = linear_sum_assignment(cost)
            matched = np.empty_like(predicted)
            matched[rows] = computed[cols]
            errors = matched - predicted
            high.append(np.abs(errors[:n_r]))
            low_re.append(np.abs(errors[n_r:].real))
            low_im.append(np.abs(errors[n_r:].imag))
            floors.append(100.0 * np.finfo(float).eps * op_norm(a))

        def exponent(series: np.ndarray) -> float | None:
            usable = series > np.asarray(floors)
            if usable.sum() < 2:
                return None
            return float(np.polyfit(np.log(betas[usable]),
                                    np.log(series[usable]), 1)[0])

        high, low_re, low_im = (np.array(x) for x in (high, low_re, low_im))
        return ErrorOrders(
            high_loss=tuple(exponent(high[:, j]) for j in range(n_r)),
            low_loss_real=tuple(exponent(low_re[:, j])
                                for j in range(low_re.shape[1])),
            low_loss_imag=tuple(exponent(low_im[:, j])
                                for j in range(low_im.shape[1])))

    @classmethod
    def _track_step(cls, can, state, beta_from, beta_to):
        """One predictor/assignment step; returns the reordered state and
        the set of ambiguous columns."""
        values, right, left = state
        b_mat = can.b_mat
        slopes = np.zeros_like(values)
        for k in range(values.size):
            overlap = inner(left[:, k], right[:, k])
            if abs(overlap) > 1e-8:
                slopes[k] = -1.0j * inner(left[:, k], b_mat @ right[:, k]) \
                    / overlap
        predicted = values + (beta_to - beta_from) * slopes

        new_values, new_right, new_left = cls._eig_with_left(can, beta_to)
        cost = np.abs(predicted[:, None] - new_values[None, :])
        rows, cols = linear_sum_assignment(cost)
        floor = 1e-9 * max(1.0, float(np.max(np.abs(new_values))))
        ambiguous = set()
        for k, j in zip(rows, cols):
            others = np.delete(cost[k], j)
            if others.size == 0:
                continue
            second = float(np.min(others))
            if second > floor and cost[k, j] > cls._AMBIGUITY_RATIO * second:
                ambiguous.add(int(k))
        order = np.empty(values.size, dtype=int)
        order[rows] = cols
        return (new_values[order], new_right[:, order],
                new_left[:, order]), ambiguous

    @classmethod
    def _eig_with_left(cls, can, beta):
        a = CanonicalService.system_operator(can, beta)
        values, left, right = sl.eig(a, left=True, right=True)
        return values, right, left

    @classmethod
    def _require_no_gyroscopy(cls, sys: LagrangianSystem) -> None:
        if sys.is_gyroscopic:
            raise UnsupportedRegimeError(
                "overdamping analysis covers systems without gyroscopy "
                "(theta = 0) only; gyroscopic overdamping is out of scope")
