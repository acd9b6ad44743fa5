"""Lagrangian system datamodel."""


from __future__ import annotations
from dataclasses import dataclass
from typing import Any

import numpy as np

from lossmodes.errors import DataError, StructuralError, SystemParseError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


def as_real_matrix(value: Any, name: str) -> np.ndarray:
    """Convert nested lists to a finite real square matrix.

    Raises
    ------
    StructuralError
        If the value is not a square 2D array.
    DataError
        If an entry is not a finite real number.
    """
    try:
        matrix = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise DataError(f"{name}: entries must be real numbers ({e})") from e
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise StructuralError(f"{name}: expected a square matrix, "
                              f"got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DataError(f"{name}: contains non-finite entries")
    return matrix


class LagrangianSystem:
    """A linear dissipative Lagrangian system.

    The dynamics are alpha Q'' + (2 theta + beta R) Q' + eta Q = F.

    Available Properties
    --------------------
    - n
    - alpha
    - theta
    - eta
    - r_mat
    - beta
    - label
    - is_gyroscopic
    """

    def __init__(self, alpha: Any, theta: Any, eta: Any, r_mat: Any,
                 beta: float = 0.0, label: str | None = None):
        """
        Parameters
        ----------
        alpha: array_like
            Kinetic form, N x N.
        theta: array_like
            Gyroscopic form, N x N.
        eta: array_like
            Potential form, N x N.
        r_mat: array_like
            Rayleigh form, N x N.
        beta: float (default 0.0)
            Loss parameter.
        label: str | None (default None)
            Free-form name carried into reports.

        Raises
        ------
        StructuralError
            Matrices of different or non-square shapes.
        DataError
            Non-finite entries or a non-finite loss parameter.
        """
        alpha = as_real_matrix(alpha, "alpha")
        theta = as_real_matrix(theta, "theta")
        eta = as_real_matrix(eta, "eta")
        r_mat = as_real_matrix(r_mat, "R")
        shapes = {"alpha": alpha.shape, "theta": theta.shape,
                  "eta": eta.shape, "R": r_mat.shape}
        if len(set(shapes.values())) != 1:
            raise StructuralError(f"dimension mismatch: {shapes}")
        if alpha.shape[0] < 1:
            raise StructuralError("a system needs at least one degree of "
                                  "freedom")
        try:
            beta = float(beta)
        except (TypeError, ValueError) as e:
            raise DataError(f"beta must be a real number ({e})") from e
        if not np.isfinite(beta):
            raise DataError("beta must be finite")

        self.__alpha = _frozen(alpha)
        self.__theta = _frozen(theta)
        self.__eta = _frozen(eta)
        self.__r_mat = _frozen(r_mat)
        self.__beta = beta
        self.__label = label

    def __str__(self):
        """Short description of the system."""
        name = self.label or "unnamed system"
        return f"{name}: N={self.n}, beta={self.beta:g}, " \
               f"gyroscopic={self.is_gyroscopic}"

    def __repr__(self):
        return f"LagrangianSystem(label={self.label!r}, n={self.n}, " \
               f"beta={self.beta!r})"

    @property
    def n(self) -> int:
        """Get the number of degrees of freedom N."""
        return int(self.__alpha.shape[0])

    @property
    def alpha(self) -> np.ndarray:
        """Get the kinetic form alpha."""
        return self.__alpha

    @property
    def theta(self) -> np.ndarray:
        """Get the gyroscopic form theta."""
        return self.__theta

    @property
    def eta(self) -> np.ndarray:
        """Get the potential form eta."""
        return self.__eta

    @property
    def r_mat(self) -> np.ndarray:
        """Get the Rayleigh form R."""
        return self.__r_mat

    @property
    def beta(self) -> float:
        """Get the loss parameter beta."""
        return self.__beta

    @property
    def label(self) -> str | None:
        """Get the label of the system, if any."""
        return self.__label

    @property
    def is_gyroscopic(self) -> bool:
        """True if theta has a nonzero entry."""
        return bool(np.any(self.__theta != 0.0))

    def with_beta(self, beta: float) -> LagrangianSystem:
        """Copy of the system with another loss parameter."""
        return LagrangianSystem(self.__alpha, self.__theta, self.__eta,
                                self.__r_mat, beta, self.__label)

    def damping_matrix(self, beta: float | None = None) -> np.ndarray:
        """Velocity coefficient 2 theta + beta R."""
        beta = self.__beta if beta is None else beta
        return 2.0 * self.__theta + beta * self.__r_mat

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LagrangianSystem:
        """Build a system from the JSON system schema.

        Parameters
        ----------
        data: dict[str, Any]
            Object with keys "alpha", "theta", "eta", "R", "beta" and an
            optional "label".

        Returns
        -------
        LagrangianSystem

        Raises
        ------
        SystemParseError
            If the object is not a mapping or a key is missing.
        """
        if not isinstance(data, dict):
            raise SystemParseError("system definition must be a JSON object")
        missing = [key for key in ("alpha", "theta", "eta", "R", "beta")
                   if key not in data]
        if missing:
            raise SystemParseError(f"missing keys: {', '.join(missing)}")
        label = data.get("label")
        if label is not None and not isinstance(label, str):
            raise SystemParseError("label must be a string")
        return cls(data["alpha"], data["theta"], data["eta"], data["R"],
                   data["beta"], label)

    def as_dict(self) -> dict[str, Any]:
        """Get the system in the JSON system schema."""
        data = {"alpha": self.__alpha.tolist(),
                "theta": self.__theta.tolist(),
                "eta": self.__eta.tolist(),
                "R": self.__r_mat.tolist(),
                "beta": self.__beta}
        if self.__label is not None:
            data["label"] = self.__label
        return data


class State:
    """Coordinates and velocities of a (possibly complex) state.

    Available Properties
    --------------------
    - q_vec
    - qdot_vec
    - n
    """

    def __init__(self, q_vec: Any, qdot_vec: Any):
        q_vec = np.atleast_1d(np.asarray(q_vec, dtype=complex))
        qdot_vec = np.atleast_1d(np.asarray(qdot_vec, dtype=complex))
        if q_vec.ndim != 1 or q_vec.shape != qdot_vec.shape:
            raise StructuralError("coordinates and velocities must be vectors "
                                  f"of equal length, got {q_vec.shape} and "
                                  f"{qdot_vec.shape}")
        if not (np.all(np.isfinite(q_vec)) and np.all(np.isfinite(qdot_vec))):
            raise DataError("state contains non-finite entries")
        self.__q_vec = _frozen(q_vec)
        self.__qdot_vec = _frozen(qdot_vec)

    def __str__(self):
        return f"State(Q={self.__q_vec}, Qdot={self.__qdot_vec})"

    @property
    def q_vec(self) -> np.ndarray:
        """Get the coordinates Q."""
        return self.__q_vec

    @property
    def qdot_vec(self) -> np.ndarray:
        """Get the velocities Q'."""
        return self.__qdot_vec

    @property
    def n(self) -> int:
        """Get the number of coordinates."""
        return int(self.__q_vec.shape[0])

    @classmethod
    def zero(cls, n: int) -> State:
        """The rest state of an n-dimensional system."""
        return cls(np.zeros(n), np.zeros(n))

    def as_vector(self) -> np.ndarray:
        """Stacked first-order state [Q; Q']."""
        return np.concatenate([self.__q_vec, self.__qdot_vec])

    @classmethod
    def from_vector(cls, y: np.ndarray) -> State:
        """Inverse of ``as_vector``."""
        n = y.shape[0] // 2
        return cls(y[:n], y[n:])

    def real_part(self) -> State:
        return State(self.__q_vec.real, self.__qdot_vec.real)

    def imag_part(self) -> State:
        return State(self.__q_vec.imag, self.__qdot_vec.imag)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energetic quantities of a state.

    kinetic: T = (Q', alpha Q')/2 + Re(Q', theta Q)/2
    potential: V = (Q, eta Q)/2 - Re(Q', theta Q)/2
    total: H = T + V
    dissipated_power: 2R(Q') = beta (Q', R Q')
    work_rate: Re(Q', F)
    """
    kinetic: float
    potential: float
    total: float
    dissipated_power: float
    work_rate: float

    @property
    def lagrangian(self) -> float:
        """L = T - V."""
        return self.kinetic - self.potential

    def as_dict(self) -> dict[str, float]:
        return {"kinetic": self.kinetic, "potential": self.potential,
                "total": self.total,
                "dissipated_power": self.dissipated_power,
                "work_rate": self.work_rate}
