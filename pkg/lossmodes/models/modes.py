"""Eigenmode datamodels."""


from __future__ import annotations
from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np

from lossmodes.models.components.enums import ModeClass, ModeFlags


def _complex_dict(z: complex) -> dict[str, float]:
    return {"re": float(z.real), "im": float(z.imag)}


def _extended(value: float) -> float | str:
    return "inf" if value == float("inf") else float(value)


@dataclass(frozen=True)
class PencilEig:
    """A solution of C(zeta, beta) q = 0 with q != 0."""
    zeta: complex
    q_vec: np.ndarray

    def as_dict(self) -> dict[str, Any]:
        return {"zeta": _complex_dict(self.zeta),
                "q": [_complex_dict(x) for x in self.q_vec]}


@dataclass(frozen=True)
class Eigensystem:
    """Raw output of the dense eigensolver.

    values: eigenvalues, vectors: unit eigenvectors as columns,
    residuals: |a w - zeta w| per pair.
    """
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    matrix_norm: float

    def __len__(self):
        return int(self.values.shape[0])


@dataclass(frozen=True)
class Mode:
    """One eigenmode of A(beta)."""
    zeta: complex
    w: np.ndarray
    residual: float
    mode_class: ModeClass
    flags: ModeFlags
    q_factor: float

    @property
    def overdamped(self) -> bool:
        return bool(self.flags & ModeFlags.overdamped)

    @property
    def marginal(self) -> bool:
        return bool(self.flags & ModeFlags.marginal)

    def as_row(self) -> dict[str, Any]:
        """Flat row for mode tables."""
        return {"re_zeta": float(self.zeta.real),
                "im_zeta": float(self.zeta.imag),
                "q_factor": self.q_factor,
                "class": str(self.mode_class),
                "overdamped": self.overdamped,
                "marginal": self.marginal,
                "residual": self.residual}

    def as_dict(self) -> dict[str, Any]:
        row = self.as_row()
        row["q_factor"] = _extended(self.q_factor)
        return row


class ModeSet:
    """Eigenmodes of A(beta) for one loss parameter.

    Modes are ordered by damping -Im zeta descending, then Re zeta
    ascending; eigenmode selectors index into this order (0-based).

    Available Properties
    --------------------
    - beta
    - operator
    - modes
    - zetas
    - dichotomy_holds
    """

    def __init__(self, beta: float, operator: np.ndarray, modes: list[Mode],
                 dichotomy_holds: bool = False):
        assert isinstance(modes, list)
        assert operator.shape == (len(modes), len(modes))
        self.__beta = float(beta)
        self.__operator = np.array(operator, copy=True)
        self.__operator.setflags(write=False)
        self.__modes = sorted(modes, key=self.sort_key)
        self.__dichotomy_holds = bool(dichotomy_holds)

    @staticmethod
    def sort_key(mode: Mode) -> tuple[float, float]:
        z = mode.zeta
        return (-round(-z.imag, 9), round(z.real, 9))

    def __str__(self):
        rows = [f"{m.zeta.real:+.6g}{m.zeta.imag:+.6g}i  Q={m.q_factor:.4g}"
                f"  {m.mode_class}  {m.flags}" for m in self.__modes]
        return f"ModeSet(beta={self.__beta:g})\n" + "\n".join(rows)

    def __len__(self):
        return len(self.__modes)

    def __iter__(self) -> Iterator[Mode]:
        return iter(self.__modes)

    def __getitem__(self, index: int) -> Mode:
        return self.__modes[index]

    @property
    def beta(self) -> float:
        """Get the loss parameter of the operator."""
        return self.__beta

    @property
    def operator(self) -> np.ndarray:
        """Get the operator A(beta) the modes belong to."""
        return self.__operator

    @property
    def modes(self) -> list[Mode]:
        """Get the modes in selector order."""
        return list(self.__modes)

    @property
    def zetas(self) -> np.ndarray:
        """Get the eigenvalues in selector order."""
        return np.array([m.zeta for m in self.__modes], dtype=complex)

    @property
    def dichotomy_holds(self) -> bool:
        """True if the modes carry sigma0/sigma1 classes."""
        return self.__dichotomy_holds

    def overdamped(self) -> list[Mode]:
        return [m for m in self.__modes if m.overdamped]

    def oscillatory(self) -> list[Mode]:
        return [m for m in self.__modes if not m.overdamped]

    def of_class(self, mode_class: ModeClass) -> list[Mode]:
        return [m for m in self.__modes if m.mode_class is mode_class]

    def as_dict(self) -> dict[str, Any]:
        return {"beta": self.__beta,
                "dichotomy_holds": self.__dichotomy_holds,
                "modes": [m.as_dict() for m in self.__modes]}


class DichotomyResult:
    """Splitting of a spectrum into the cluster around the origin and the
    clusters around i*gamma_j.

    Available Properties
    --------------------
    - sigma0
    - sigma1
    - p0
    - p1
    - r0
    - radius
    - gammas
    - ranks
    """

    def __init__(self, matrix: np.ndarray, sigma0: np.ndarray,
                 sigma1: np.ndarray, p0: np.ndarray, p1: np.ndarray,
                 r0: float, radius: float, gammas: np.ndarray,
                 ranks: tuple[int, int]):
        self.__matrix = np.array(matrix, copy=True)
        self.__sigma0 = np.array(sigma0, dtype=complex)
        self.__sigma1 = np.array(sigma1, dtype=complex)
        self.__p0 = np.array(p0, dtype=complex)
        self.__p1 = np.array(p1, dtype=complex)
        self.__r0 = float(r0)
        self.__radius = float(radius)
        self.__gammas = np.array(gammas, dtype=float)
        self.__ranks = ranks

    def __str__(self):
        return f"DichotomyResult(|sigma0|={self.__sigma0.size}, " \
               f"|sigma1|={self.__sigma1.size}, r0={self.__r0:.6g})"

    @property
    def sigma0(self) -> np.ndarray:
        """Get the eigenvalues within |Re M| of the origin."""
        return self.__sigma0

    @property
    def sigma1(self) -> np.ndarray:
        """Get the eigenvalues within |Re M| of some i*gamma_j."""
        return self.__sigma1

    @property
    def p0(self) -> np.ndarray:
        """Get the spectral projector onto the sigma0 invariant subspace."""
        return self.__p0

    @property
    def p1(self) -> np.ndarray:
        """Get the spectral projector onto the sigma1 invariant subspace."""
        return self.__p1

    @property
    def r0(self) -> float:
        """Get the separation radius min|gamma_j| / 2."""
        return self.__r0

    @property
    def radius(self) -> float:
        """Get the disc radius |Re M|."""
        return self.__radius

    @property
    def gammas(self) -> np.ndarray:
        """Get the nonzero eigenvalues of Im M."""
        return self.__gammas

    @property
    def ranks(self) -> tuple[int, int]:
        """Get (rank p1, rank p0)."""
        return self.__ranks

    def projector_residuals(self) -> dict[str, float]:
        """Idempotency, complementarity and invariance residuals."""
        p0, p1, m = self.__p0, self.__p1, self.__matrix
        identity = np.eye(m.shape[0])
        scale = max(float(np.linalg.norm(m, 2)), 1.0)
        return {
            "complement": float(np.linalg.norm(p0 + p1 - identity, 2)),
            "orthogonal": float(np.linalg.norm(p0 @ p1, 2)),
            "idempotent_p0": float(np.linalg.norm(p0 @ p0 - p0, 2)),
            "idempotent_p1": float(np.linalg.norm(p1 @ p1 - p1, 2)),
            "invariance_p0": float(np.linalg.norm(m @ p0 - p0 @ m @ p0, 2))
            / scale,
            "invariance_p1": float(np.linalg.norm(m @ p1 - p1 @ m @ p1, 2))
            / scale,
        }

    def as_dict(self) -> dict[str, Any]:
        return {"sigma0": [_complex_dict(z) for z in self.__sigma0],
                "sigma1": [_complex_dict(z) for z in self.__sigma1],
                "r0": self.__r0, "radius": self.__radius,
                "gammas": self.__gammas.tolist(),
                "rank_p1": self.__ranks[0], "rank_p0": self.__ranks[1],
                "projector_residuals": self.projector_residuals()}
