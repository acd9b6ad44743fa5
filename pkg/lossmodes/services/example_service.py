"""Service layer for the worked example systems and seeded random
instances."""

import logging

import numpy as np
import scipy.linalg as sl

from lossmodes.errors import ParameterError
from lossmodes.models.circuit import CircuitParams
from lossmodes.models.system import LagrangianSystem
from lossmodes.services.system_service import SystemService


logger = logging.getLogger(__name__)


class ExampleService:
    EXAMPLES = ("circuit", "oscillator", "random")
    # Attempts of the nondegenerate random generator.
    _MAX_ATTEMPTS = 100

    @classmethod
    def build_circuit(cls, p: CircuitParams) -> LagrangianSystem:
        """Lagrangian system of the two-loop circuit.

        alpha = diag(l1, l2), theta = 0, R = diag(0, ell), beta = r2 / ell
        and eta = [[1/c1 + 1/c12, -1/c12], [-1/c12, 1/c2 + 1/c12]].
        """
        assert isinstance(p, CircuitParams)
        coupling = 0.0 if np.isinf(p.c12) else 1.0 / p.c12
        eta = np.array([[1.0 / p.c1 + coupling, -coupling],
                        [-coupling, 1.0 / p.c2 + coupling]])
        return LagrangianSystem(alpha=np.diag([p.l1, p.l2]),
                                theta=np.zeros((2, 2)), eta=eta,
                                r_mat=np.diag([0.0, p.ell]), beta=p.beta,
                                label="circuit")

    @classmethod
    def build_damped_oscillator(cls, beta: float = 0.0) -> LagrangianSystem:
        """Unit mass on a unit spring with viscous damping beta."""
        if beta < 0.0:
            raise ParameterError(f"beta must be nonnegative, got {beta}")
        one = np.ones((1, 1))
        return LagrangianSystem(alpha=one, theta=np.zeros((1, 1)), eta=one,
                                r_mat=one, beta=beta, label="oscillator")

    @classmethod
    def random_system(cls, n: int, n_r: int, gyro: bool = False,
                      seed: int | None = None, nondegenerate: bool = False,
                      eta_rank: int | None = None,
                      beta: float = 1.0) -> LagrangianSystem:
        """Seeded random system.

        alpha = G^T G + n I, eta = H^T H with H of ``eta_rank`` rows,
        R a PSD matrix of exact rank ``n_r`` and theta a random skew matrix
        when ``gyro``. With ``nondegenerate`` instances whose Ker eta and
        Ker R intersect are redrawn. Whether Ker eta and Ker R meet only in 0
        is logged at debug level either way.

        Parameters
        ----------
        n: int
        n_r: int
            1 <= n_r <= n.
        gyro: bool (default False)
        seed: int | None (default None)
        nondegenerate: bool (default False)
        eta_rank: int | None (default None)
            Rank of eta, n when None.
        beta: float (default 1.0)

        Returns
        -------
        LagrangianSystem

        Raises
        ------
        ParameterError
            For infeasible sizes or ranks.
        """
        eta_rank = n if eta_rank is None else eta_rank
        if n < 1 or not 1 <= n_r <= n:
            raise ParameterError(f"need n >= 1 and 1 <= n_r <= n, got "
                                 f"n={n}, n_r={n_r}")
        if not 0 <= eta_rank <= n:
            raise ParameterError(f"eta_rank must lie in [0, {n}], got "
                                 f"{eta_rank}")
        if nondegenerate and eta_rank + n_r < n:
            raise ParameterError(f"Ker eta and Ker R must intersect when "
                                 f"rank eta + rank R = {eta_rank + n_r} < {n}")

        rng = np.random.default_rng(seed)
        for attempt in range(cls._MAX_ATTEMPTS):
            g = rng.standard_normal((n, n))
            alpha = g.T @ g + n * np.eye(n)
            h = rng.standard_normal((eta_rank, n))
            eta = h.T @ h
            r_mat = cls._exact_rank_psd(rng.standard_normal((n_r, n)), n_r)
            theta = np.zeros((n, n))
            if gyro:
                s = rng.standard_normal((n, n))
                theta = (s - s.T) / 2.0
            sys = LagrangianSystem(alpha, theta, eta, r_mat, beta=beta,
                                   label=f"random-{seed}")
            independent = SystemService.is_nondegenerate(sys)
            if not nondegenerate or independent:
                logger.debug("random system n=%d, n_r=%d after %d attempt(s), "
                             "nondegenerate=%s", n, n_r, attempt + 1,
                             independent)
                return sys
        raise ParameterError(f"no nondegenerate instance in "
                             f"{cls._MAX_ATTEMPTS} attempts")

    @classmethod
    def random_dissipative_matrix(cls, n: int, rank: int,
                                  seed: int | None = None,
                                  ratio: float = 3.0) -> np.ndarray:
        """M = H0 - i P with Hermitian H0 (|H0| = 1) and P >= 0 of the given
        rank whose smallest nonzero eigenvalue is ``ratio`` |Re M|.

        ratio > 2 satisfies the dichotomy hypothesis.
        """
        if not 1 <= rank <= n:
            raise ParameterError(f"need 1 <= rank <= n, got rank={rank}, "
                                 f"n={n}")
        if ratio <= 0.0:
            raise ParameterError(f"ratio must be positive, got {ratio}")
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((n, n)) + 1.0j * rng.standard_normal((n, n))
        h0 = (x + x.conj().T) / 2.0
        h0 = h0 / np.linalg.norm(h0, 2)
        y = rng.standard_normal((n, rank)) + 1.0j * rng.standard_normal(
            (n, rank))
        basis, _ = np.linalg.qr(y)
        gammas = ratio * (1.0 + rng.uniform(0.0, 1.0, rank))
        gammas[0] = ratio
        p = (basis * gammas) @ basis.conj().T
        return h0 - 1.0j * p

    @classmethod
    def example_system(cls, name: str, beta: float | None = None,
                       seed: int | None = None, n: int = 3, n_r: int = 1,
                       gyro: bool = False) -> LagrangianSystem:
        """Named example used by the command line.

        Parameters
        ----------
        name: str
            One of ``EXAMPLES``.
        beta: float | None (default None)
            Loss parameter; the example default when None.
        """
        match name:
            case "circuit":
                params = CircuitParams() if beta is None \
                    else CircuitParams(r2=beta)
                return cls.build_circuit(params)
            case "oscillator":
                return cls.build_damped_oscillator(0.0 if beta is None
                                                   else beta)
            case "random":
                return cls.random_system(n, n_r, gyro=gyro, seed=seed,
                                         beta=1.0 if beta is None else beta)
            case _:
                raise ParameterError(f"unknown example {name!r}; choose from "
                                     f"{', '.join(cls.EXAMPLES)}")

    @classmethod
    def _exact_rank_psd(cls, factors: np.ndarray, rank: int) -> np.ndarray:
        """F^T F with all but the ``rank`` largest eigenvalues set to 0."""
        values, vectors = sl.eigh(factors.T @ factors)
        values[:-rank] = 0.0
        matrix = (vectors * values) @ vectors.T
        return (matrix + matrix.T) / 2.0
