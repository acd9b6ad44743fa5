"""Service layer for time integration, energy balance and virial
diagnostics."""

import logging
from collections.abc import Callable

import numpy as np
import scipy.linalg as sl
from scipy.integrate import solve_ivp, trapezoid

from lossmodes.errors import (DegenerateFitError, InapplicableTheoremError,
                              IntegratorError, PreconditionError,
                              SamplingError, StructuralError)
from lossmodes.models.components.tolerances import DEFAULT_TOLERANCES, Tolerances
from lossmodes.models.modes import PencilEig
from lossmodes.models.reports import TimeAverageReport, VirialReport
from lossmodes.models.system import LagrangianSystem, State
from lossmodes.models.trajectory import Trajectory
from lossmodes.services.linalg import inner, op_norm
from lossmodes.services.pencil_service import PencilService
from lossmodes.services.spectral_service import SpectralService
from lossmodes.services.system_service import SystemService


logger = logging.getLogger(__name__)

ForceFunction = Callable[[float], np.ndarray]


class DynamicsService:
    METHOD = "DOP853"
    MAX_INTEGRATION_STEPS = 2_000_000
    # Fewest samples per characteristic period for finite differencing.
    _SAMPLES_PER_PERIOD = 5
    # Relative tolerance of the equipartition flag and the virial identity.
    _VIRIAL_TOL = 1e-8

    @classmethod
    def integrate(cls, sys: LagrangianSystem, beta: float, initial: State,
                  t_end: float, dt_max: float,
                  force_fn: ForceFunction | None = None,
                  sample_dt: float | None = None,
                  tol: Tolerances = DEFAULT_TOLERANCES,
                  max_steps: int | None = None) -> Trajectory:
        """Integrate alpha Q'' + (2 theta + beta R) Q' + eta Q = F(t).

        The first-order form y = [Q; Q'] is advanced with an explicit
        adaptive Runge-Kutta method (``METHOD``) and sampled on a uniform grid.

        Parameters
        ----------
        sys: LagrangianSystem
        beta: float
        initial: State
            Complex initial data (Q(0), Q'(0)).
        t_end: float
            Final time, > 0.
        dt_max: float
            Largest internal step.
        force_fn: ForceFunction | None (default None)
            t -> F(t); None means unforced.
        sample_dt: float | None (default None)
            Sample spacing; defaults to ``dt_max``.
        tol: Tolerances
            ``integrator_rtol``/``integrator_atol`` set the error control.
        max_steps: int | None (default None)
            Refuse runs whose estimated step count exceeds this.

        Returns
        -------
        Trajectory

        Raises
        ------
        IntegratorError
            If the run is estimated too stiff up front or the integrator
            aborts.
        """
        assert isinstance(sys, LagrangianSystem)
        assert isinstance(initial, State)
        if t_end <= 0.0 or dt_max <= 0.0:
            raise PreconditionError("t_end and dt_max must be positive")
        if initial.n != sys.n:
            raise StructuralError(f"initial state has {initial.n} degrees of "
                                  f"freedom, the system {sys.n}")
        max_steps = max_steps or cls.MAX_INTEGRATION_STEPS
        sample_dt = sample_dt or dt_max

        alpha_inv = SystemService.alpha_inverse(sys)
        n = sys.n
        generator = np.block([
            [np.zeros((n, n)), np.eye(n)],
            [-alpha_inv @ sys.eta, -alpha_inv @ sys.damping_matrix(beta)]])

        rate = beta * op_norm(alpha_inv @ sys.r_mat) \
            + np.sqrt(op_norm(alpha_inv @ sys.eta)) \
            + 2.0 * op_norm(alpha_inv @ sys.theta)
        estimate = t_end * max(1.0 / dt_max, rate)
        if estimate > max_steps:
            raise IntegratorError(
                f"about {estimate:.3g} steps needed (limit {max_steps}); the "
                f"problem is stiff at beta={beta:g}; try t_end <= "
                f"{max_steps / max(1.0 / dt_max, rate):.3g} or rely on the "
                f"spectral analysis")

        def rhs(t, y):
            dy = generator @ y
            if force_fn is not None:
                dy[n:] += alpha_inv @ np.asarray(force_fn(t), dtype=complex)
            return dy

        count = int(np.ceil(t_end / sample_dt - 1e-9)) + 1
        times = np.linspace(0.0, t_end, count)
        sol = solve_ivp(rhs, (0.0, t_end), initial.as_vector(),
                        method=cls.METHOD, t_eval=times, max_step=dt_max,
                        rtol=tol.integrator_rtol, atol=tol.integrator_atol)
        if not sol.success:
            raise IntegratorError(f"integration aborted: {sol.message}; try "
                                  f"a smaller t_end or dt_max")
        logger.debug("integrated %d samples with %d evaluations", count,
                     sol.nfev)

        states, energies, virial = [], [], []
        for t, y in zip(sol.t, sol.y.T):
            s = State.from_vector(y)
            force = None if force_fn is None else force_fn(t)
            states.append(s)
            energies.append(SystemService.energies(sys, s, force, beta))
            virial.append(inner(sys.alpha @ s.qdot_vec, s.q_vec))
        return Trajectory(sol.t, states, energies, np.array(virial), beta)

    @classmethod
    def energy_balance_residual(cls, sys: LagrangianSystem, traj: Trajectory,
                                force_fn: ForceFunction | None = None
                                ) -> float:
        """max |dH/dt + 2R - Re(Q', F)| over interior samples, normalized.

        dH/dt is a fourth-order central difference; the normalization is
        max |H| / (t_end - t_0) plus the largest dissipated power and work
        rate.

        Raises
        ------
        SamplingError
            If the samples are too few, not uniform or coarser than a fifth of
            the shortest characteristic period.
        """
        cls._check_sampling(sys, traj)
        h = traj.times[1] - traj.times[0]
        total = traj.column("total")
        dissipated = traj.column("dissipated_power")
        if force_fn is None:
            work = np.zeros_like(total)
        else:
            work = np.array([inner(s.qdot_vec, np.asarray(force_fn(t),
                                                          dtype=complex)).real
                             for t, s in zip(traj.times, traj.states)])
        derivative = cls._central_difference(total, h)
        expected = (-dissipated + work)[2:-2]
        span = traj.times[-1] - traj.times[0]
        scale = float(np.max(np.abs(total))) / span \
            + float(np.max(np.abs(dissipated))) + float(np.max(np.abs(work)))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(derivative - expected))) / scale

    @classmethod
    def virial_check(cls, sys: LagrangianSystem, zeta: complex, q: np.ndarray,
                     beta: float,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> VirialReport:
        """T = V - (Im zeta / Re zeta)^2 Re(Q', theta Q) for an eigenmode.

        Evaluated at Q = q, Q' = -i zeta q. For Re zeta = 0 the residual is
        |Re(Q', theta Q)| (zero unless zeta = 0 is the other branch).

        Raises
        ------
        PreconditionError
            If (zeta, q) is not a pencil eigenpair to tolerance.
        """
        zeta = complex(zeta)
        q = np.asarray(q, dtype=complex)
        residual = PencilService.pencil_residual(sys, PencilEig(zeta, q),
                                                 beta)
        if residual > tol.pencil:
            raise PreconditionError(f"not a pencil eigenpair: relative "
                                    f"residual {residual:.3e}")
        s = cls.eigenmode_state(zeta, q)
        e = SystemService.energies(sys, s, beta=beta)
        theta_moment = inner(s.qdot_vec, sys.theta @ s.q_vec).real
        size = abs(e.kinetic) + abs(e.potential)
        gap = abs(e.kinetic - e.potential)
        gap_rel = gap / size if size > 0.0 else 0.0

        rhs = None
        if SpectralService.is_overdamped(zeta, tol):
            value = 0.0 if zeta == 0 else abs(theta_moment)
        else:
            rhs = e.potential - (zeta.imag / zeta.real) ** 2 * theta_moment
            value = abs(e.kinetic - rhs)
        equipartition = not sys.is_gyroscopic and rhs is not None \
            and gap <= cls._VIRIAL_TOL * size
        return VirialReport(lhs=e.kinetic, rhs=rhs,
                            residual=value / size if size > 0.0 else value,
                            equipartition=bool(equipartition),
                            theta_moment=theta_moment,
                            equipartition_gap=gap_rel)

    @classmethod
    def time_average_virial(cls, traj: Trajectory,
                            t_window: float | None = None
                            ) -> TimeAverageReport:
        """Windowed averages <L>, <T> - <V> and <dG/dt>/2 of a conservative
        motion, and the pointwise residual of L = Re dG/dt / 2.

        Raises
        ------
        InapplicableTheoremError
            If the trajectory has losses.
        SamplingError
            If the window holds fewer than five samples.
        """
        assert isinstance(traj, Trajectory)
        if traj.beta > 0.0:
            raise InapplicableTheoremError("the time-average virial theorem "
                                           "needs a conservative motion "
                                           "(beta = 0)")
        t_window = t_window or traj.times[-1] - traj.times[0]
        inside = traj.times - traj.times[0] <= t_window * (1.0 + 1e-12)
        if inside.sum() < 5:
            raise SamplingError("fewer than five samples in the averaging "
                                "window")
        times = traj.times[inside]
        kinetic = traj.column("kinetic")[inside]
        potential = traj.column("potential")[inside]
        lagrangian = kinetic - potential
        virial = traj.virial[inside].real
        window = times[-1] - times[0]

        def average(values: np.ndarray) -> float:
            return float(trapezoid(values, times)) / window

        h = times[1] - times[0]
        derivative = cls._central_difference(virial, h)
        size = float(np.max(np.abs(kinetic) + np.abs(potential)))
        pointwise = float(np.max(np.abs(lagrangian[2:-2] - 0.5 * derivative)))
        return TimeAverageReport(
            avg_lagrangian=average(lagrangian),
            avg_t_minus_v=average(kinetic) - average(potential),
            avg_dg_dt=0.5 * (virial[-1] - virial[0]) / window,
            pointwise_residual=pointwise / size if size > 0.0 else pointwise,
            window=float(window))

    @classmethod
    def eigenmode_state(cls, zeta: complex, q: np.ndarray) -> State:
        """Initial data Q = q, Q' = -i zeta q of the mode q e^{-i zeta t}."""
        q = np.asarray(q, dtype=complex)
        return State(q, -1.0j * complex(zeta) * q)

    @classmethod
    def decay_rate(cls, traj: Trajectory) -> float:
        """-d log H / dt by a least-squares line (equals -2 Im zeta for a
        single eigenmode)."""
        total = traj.column("total")
        usable = total > 0.0
        if usable.sum() < 2:
            raise DegenerateFitError("the decay fit needs two samples with "
                                     "positive energy")
        slope = np.polyfit(traj.times[usable], np.log(total[usable]), 1)[0]
        return float(-slope)

    @classmethod
    def energy_quality_factor(cls, traj: Trajectory, zeta: complex) -> float:
        """|Re zeta| times stored energy over dissipated power, both
        integrated along the trajectory."""
        stored = trapezoid(traj.column("total"), traj.times)
        dissipated = trapezoid(traj.column("dissipated_power"), traj.times)
        if dissipated <= 0.0:
            return float("inf")
        return float(abs(complex(zeta).real) * stored / dissipated)

    @classmethod
    def _central_difference(cls, values: np.ndarray, h: float) -> np.ndarray:
        """Fourth-order central first derivative at samples 2..n-3."""
        return (values[:-4] - 8.0 * values[1:-3] + 8.0 * values[3:-1]
                - values[4:]) / (12.0 * h)

    @classmethod
    def _check_sampling(cls, sys: LagrangianSystem, traj: Trajectory) -> None:
        times = traj.times
        if times.size < 5:
            raise SamplingError(f"{times.size} samples; finite differencing "
                                f"needs at least 5")
        steps = np.diff(times)
        if np.max(np.abs(steps - steps[0])) > 1e-9 * max(steps[0], 1e-300) \
                * times.size:
            raise SamplingError("samples are not uniformly spaced")
        alpha_inv = SystemService.alpha_inverse(sys)
        n = sys.n
        generator = np.block([
            [np.zeros((n, n)), np.eye(n)],
            [-alpha_inv @ sys.eta,
             -alpha_inv @ sys.damping_matrix(traj.beta)]])
        fastest = float(np.max(np.abs(sl.eigvals(generator))))
        if fastest > 0.0 and steps[0] > 2.0 * np.pi / fastest \
                / cls._SAMPLES_PER_PERIOD:
            raise SamplingError(f"sample spacing {steps[0]:g} exceeds a "
                                f"fifth of the period {2.0 * np.pi / fastest:.4g}")
