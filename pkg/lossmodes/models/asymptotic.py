"""Datamodels for the large-loss asymptotics and the overdamping
thresholds."""


from __future__ import annotations
from dataclasses import dataclass
from typing import Any

import numpy as np

from lossmodes.models.components.enums import QTrend


def _optional(value: float | None) -> float | str | None:
    if value is None:
        return None
    return "inf" if value == float("inf") else float(value)


class LossSubspace:
    """Blocks of Omega in the splitting H = Ran B + Ker B.

    With U_B, U_K orthonormal bases of Ran B and Ker B:
    B2 = U_B* B U_B, Omega2 = U_B* Omega U_B, Theta = U_B* Omega U_K and
    Omega1 = U_K* Omega U_K.

    Available Properties
    --------------------
    - b_values
    - range_basis
    - kernel_basis
    - b2
    - omega2
    - theta
    - omega1
    """

    def __init__(self, b_values: np.ndarray, range_basis: np.ndarray,
                 kernel_basis: np.ndarray, b2: np.ndarray, omega2: np.ndarray,
                 theta: np.ndarray, omega1: np.ndarray):
        assert range_basis.shape[1] == b_values.shape[0]
        self.__b_values = np.array(b_values, dtype=float)
        self.__range_basis = np.array(range_basis, dtype=complex)
        self.__kernel_basis = np.array(kernel_basis, dtype=complex)
        self.__b2 = np.array(b2, dtype=complex)
        self.__omega2 = np.array(omega2, dtype=complex)
        self.__theta = np.array(theta, dtype=complex)
        self.__omega1 = np.array(omega1, dtype=complex)

    def __str__(self):
        return f"LossSubspace(dim Ran B={self.n_r}, " \
               f"dim Ker B={self.__kernel_basis.shape[1]})"

    @property
    def n_r(self) -> int:
        """Get dim Ran B = rank R."""
        return int(self.__b_values.shape[0])

    @property
    def b_values(self) -> np.ndarray:
        """Get the nonzero eigenvalues of B, descending."""
        return self.__b_values

    @property
    def range_basis(self) -> np.ndarray:
        """Get U_B, columns are eigenvectors of B for ``b_values``."""
        return self.__range_basis

    @property
    def kernel_basis(self) -> np.ndarray:
        """Get U_K, an orthonormal basis of Ker B."""
        return self.__kernel_basis

    @property
    def b2(self) -> np.ndarray:
        return self.__b2

    @property
    def omega2(self) -> np.ndarray:
        return self.__omega2

    @property
    def theta(self) -> np.ndarray:
        return self.__theta

    @property
    def omega1(self) -> np.ndarray:
        return self.__omega1

    def reassembly_residual(self, omega: np.ndarray) -> float:
        """|U [[Omega2, Theta], [Theta*, Omega1]] U* - Omega| / |Omega|."""
        basis = np.hstack([self.__range_basis, self.__kernel_basis])
        blocks = np.block([[self.__omega2, self.__theta],
                           [self.__theta.conj().T, self.__omega1]])
        scale = max(float(np.linalg.norm(omega, 2)), 1e-300)
        return float(np.linalg.norm(basis @ blocks @ basis.conj().T - omega,
                                    2)) / scale


@dataclass(frozen=True)
class HighLossMode:
    """zeta ~ -i b beta + rho, w -> w0 in Ran B."""
    b: float
    rho: float
    w0: np.ndarray
    degenerate: bool = False

    def prediction(self, beta: float) -> complex:
        return complex(self.rho, -self.b * beta)

    def as_dict(self) -> dict[str, Any]:
        return {"b": self.b, "rho": self.rho, "degenerate": self.degenerate}


@dataclass(frozen=True)
class LowLossMode:
    """zeta ~ rho - i d / beta, w -> w0 in Ker B."""
    rho: float
    d: float
    w0: np.ndarray
    degenerate: bool = False

    def prediction(self, beta: float) -> complex:
        return complex(self.rho, -self.d / beta)

    def as_dict(self) -> dict[str, Any]:
        return {"rho": self.rho, "d": self.d, "degenerate": self.degenerate}


class AsymptoticSpectrum:
    """First-order large-loss data of A(beta) = Omega - i beta B.

    Available Properties
    --------------------
    - n_r
    - high_loss
    - low_loss
    - kappa
    - degenerate
    """

    def __init__(self, high_loss: list[HighLossMode],
                 low_loss: list[LowLossMode], kappa: int):
        self.__high_loss = tuple(high_loss)
        self.__low_loss = tuple(low_loss)
        self.__kappa = int(kappa)

    def __str__(self):
        return f"AsymptoticSpectrum(N_R={self.n_r}, " \
               f"low-loss={len(self.__low_loss)}, kappa={self.__kappa})"

    def __len__(self):
        return len(self.__high_loss) + len(self.__low_loss)

    @property
    def n_r(self) -> int:
        """Get the number of high-loss modes, N_R."""
        return len(self.__high_loss)

    @property
    def high_loss(self) -> tuple[HighLossMode, ...]:
        """Get the high-loss data sorted by b descending."""
        return self.__high_loss

    @property
    def low_loss(self) -> tuple[LowLossMode, ...]:
        """Get the low-loss data sorted by rho ascending."""
        return self.__low_loss

    @property
    def kappa(self) -> int:
        """Get dim Ker Omega1, the number of low-loss modes with rho = 0."""
        return self.__kappa

    @property
    def degenerate(self) -> bool:
        """True if any first-order group had to be resolved."""
        return any(m.degenerate for m in self.__high_loss) \
            or any(m.degenerate for m in self.__low_loss)

    def limiting_vectors(self) -> np.ndarray:
        """Columns w0_j, high-loss first."""
        return np.column_stack([m.w0 for m in self.__high_loss]
                               + [m.w0 for m in self.__low_loss])

    def gram_residual(self) -> float:
        """|W0* W0 - I| for the limiting eigenvectors."""
        w0 = self.limiting_vectors()
        return float(np.linalg.norm(w0.conj().T @ w0 - np.eye(w0.shape[1]),
                                    2))

    def as_dict(self) -> dict[str, Any]:
        return {"n_r": self.n_r, "kappa": self.__kappa,
                "high_loss": [m.as_dict() for m in self.__high_loss],
                "low_loss": [m.as_dict() for m in self.__low_loss]}


@dataclass(frozen=True)
class QPrediction:
    """Predicted quality factor of one mode at a given beta."""
    value: float
    trend: QTrend

    def as_dict(self) -> dict[str, Any]:
        return {"value": _optional(self.value), "trend": str(self.trend)}


@dataclass(frozen=True)
class Thresholds:
    """Overdamping thresholds of a system without gyroscopy.

    omega_max^2 and omega_min^2 are the extreme (nonzero) eigenvalues of
    alpha^-1 eta, b_min is the smallest nonzero eigenvalue of alpha^-1 R and
    beta_star = 2 omega_max / b_min. omega_norm and b_min_operator hold the
    same quantities read off Omega and B.
    """
    omega_max: float
    omega_min: float | None
    b_min: float
    beta_star: float
    omega_norm: float
    b_min_operator: float

    def as_dict(self) -> dict[str, Any]:
        return {"omega_max": self.omega_max,
                "omega_min": _optional(self.omega_min),
                "b_min": self.b_min, "beta_star": self.beta_star}


class TrackedModes:
    """Eigenvalues continued across a loss parameter grid.

    Column j of ``zetas`` follows one eigenvalue, starting from the mode
    order of the first grid point.

    Available Properties
    --------------------
    - betas
    - zetas
    - collisions
    - refinements
    """

    def __init__(self, betas: np.ndarray, zetas: np.ndarray,
                 collisions: list[tuple[float, tuple[int, ...]]],
                 refinements: int):
        assert zetas.shape[0] == betas.shape[0]
        self.__betas = np.array(betas, dtype=float)
        self.__zetas = np.array(zetas, dtype=complex)
        self.__collisions = list(collisions)
        self.__refinements = int(refinements)

    def __str__(self):
        return f"TrackedModes({self.__zetas.shape[1]} modes over " \
               f"{self.__betas.size} points, " \
               f"{len(self.__collisions)} collisions)"

    @property
    def betas(self) -> np.ndarray:
        return self.__betas

    @property
    def zetas(self) -> np.ndarray:
        """Get the (grid size) x (2N) array of tracked eigenvalues."""
        return self.__zetas

    @property
    def collisions(self) -> list[tuple[float, tuple[int, ...]]]:
        """Get (beta, tracked columns) where the assignment was ambiguous."""
        return list(self.__collisions)

    @property
    def refinements(self) -> int:
        """Get the number of step halvings used."""
        return self.__refinements

    def flagged(self, index: int) -> set[int]:
        """Columns flagged by a collision at grid point ``index``."""
        beta = self.__betas[index]
        return {column for at, columns in self.__collisions if at == beta
                for column in columns}
