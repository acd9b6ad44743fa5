"""Canonical dissipative form of a Lagrangian system."""


from __future__ import annotations
from typing import Any

import numpy as np


class CanonicalSystem:
    """Blocks of the canonical form v' = -i A(beta) v + f.

    A(beta) = Omega - i beta B with Omega = i K J K^T and
    B = diag(K_p R K_p, 0), where K = [[K_p, -K_p theta], [0, K_q]],
    K_p = sqrt(alpha)^-1 and K_q = sqrt(eta).

    Available Properties
    --------------------
    - n
    - k_p
    - k_q
    - sqrt_alpha
    - k_block
    - j_mat
    - phi
    - r_tilde
    - omega_p
    - omega
    - b_mat
    - alpha_condition
    - factorization_residual
    """

    def __init__(self, k_p: np.ndarray, k_q: np.ndarray,
                 sqrt_alpha: np.ndarray, k_block: np.ndarray,
                 phi: np.ndarray, r_tilde: np.ndarray, omega_p: np.ndarray,
                 omega: np.ndarray, b_mat: np.ndarray,
                 alpha_condition: float, factorization_residual: float):
        n = k_p.shape[0]
        assert omega.shape == (2 * n, 2 * n)
        assert b_mat.shape == (2 * n, 2 * n)
        self.__k_p = self.__frozen(k_p)
        self.__k_q = self.__frozen(k_q)
        self.__sqrt_alpha = self.__frozen(sqrt_alpha)
        self.__k_block = self.__frozen(k_block)
        self.__phi = self.__frozen(phi)
        self.__r_tilde = self.__frozen(r_tilde)
        self.__omega_p = self.__frozen(omega_p)
        self.__omega = self.__frozen(omega)
        self.__b_mat = self.__frozen(b_mat)
        self.__alpha_condition = float(alpha_condition)
        self.__factorization_residual = float(factorization_residual)

    @staticmethod
    def __frozen(array: np.ndarray) -> np.ndarray:
        array = np.array(array, copy=True)
        array.setflags(write=False)
        return array

    def __str__(self):
        return f"CanonicalSystem(N={self.n}, " \
               f"|Omega|={np.linalg.norm(self.__omega, 2):.6g}, " \
               f"rank B={np.linalg.matrix_rank(self.__b_mat)})"

    @property
    def n(self) -> int:
        """Get the number of degrees of freedom N (the operator is 2N x 2N)."""
        return int(self.__k_p.shape[0])

    @property
    def k_p(self) -> np.ndarray:
        """Get K_p = sqrt(alpha)^-1."""
        return self.__k_p

    @property
    def k_q(self) -> np.ndarray:
        """Get K_q = sqrt(eta)."""
        return self.__k_q

    @property
    def sqrt_alpha(self) -> np.ndarray:
        """Get sqrt(alpha), the inverse of K_p."""
        return self.__sqrt_alpha

    @property
    def k_block(self) -> np.ndarray:
        """Get K = [[K_p, -K_p theta], [0, K_q]]."""
        return self.__k_block

    @property
    def j_mat(self) -> np.ndarray:
        """Get the symplectic matrix J = [[0, -1], [1, 0]]."""
        n = self.n
        return np.block([[np.zeros((n, n)), -np.eye(n)],
                         [np.eye(n), np.zeros((n, n))]])

    @property
    def phi(self) -> np.ndarray:
        """Get Phi = K_q K_p."""
        return self.__phi

    @property
    def r_tilde(self) -> np.ndarray:
        """Get R~ = K_p R K_p."""
        return self.__r_tilde

    @property
    def omega_p(self) -> np.ndarray:
        """Get the gyroscopic block Omega_p = -2i K_p theta K_p."""
        return self.__omega_p

    @property
    def omega(self) -> np.ndarray:
        """Get the Hermitian part Omega of the system operator."""
        return self.__omega

    @property
    def b_mat(self) -> np.ndarray:
        """Get the loss operator B = diag(R~, 0)."""
        return self.__b_mat

    @property
    def alpha_condition(self) -> float:
        """Get the condition number of alpha (reported, not capped)."""
        return self.__alpha_condition

    @property
    def factorization_residual(self) -> float:
        """Get |K^T K - M_H| / |M_H|."""
        return self.__factorization_residual

    def as_dict(self) -> dict[str, Any]:
        """Real and imaginary parts of the blocks, for reports."""
        return {"n": self.n,
                "omega_re": self.__omega.real.tolist(),
                "omega_im": self.__omega.imag.tolist(),
                "b": self.__b_mat.tolist(),
                "alpha_condition": self.__alpha_condition,
                "factorization_residual": self.__factorization_residual}
