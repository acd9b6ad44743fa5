"""Small dense linear algebra helpers shared by the services."""


import numpy as np
import scipy.linalg as sl

from lossmodes.models.components.tolerances import (DEFAULT_TOLERANCES,
                                                    Tolerances)


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hermitian inner product (a, b) = a* b, conjugate on the left."""
    return complex(np.vdot(a, b))


def op_norm(m: np.ndarray) -> float:
    """Operator 2-norm (largest singular value)."""
    if m.size == 0:
        return 0.0
    return float(sl.norm(m, 2))


def hermitian_parts(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split m = Re m + i Im m into Hermitian real and imaginary parts."""
    m_star = m.conj().T
    return (m + m_star) / 2.0, (m - m_star) / 2.0j


def numerical_rank(m: np.ndarray,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Rank counting singular values above the shared rank cutoff."""
    if m.size == 0:
        return 0
    s = sl.svdvals(m)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_threshold(s, max(m.shape))))


def range_and_kernel(h: np.ndarray,
                     tol: Tolerances = DEFAULT_TOLERANCES
                     ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal eigenbases of Ran h and Ker h for Hermitian PSD h.

    Returns
    -------
    tuple[np.ndarray, np.ndarray, np.ndarray]
        Nonzero eigenvalues (descending), basis of the range (columns, same
        order), basis of the kernel.
    """
    values, vectors = sl.eigh(h)
    cutoff = tol.rank_threshold(np.abs(values), h.shape[0])
    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]
    nonzero = values > cutoff
    return values[nonzero], vectors[:, nonzero], vectors[:, ~nonzero]


def group_close(values: np.ndarray, atol: float) -> list[list[int]]:
    """Group indices of sorted values whose neighbours differ by <= atol."""
    groups: list[list[int]] = []
    for index, value in enumerate(values):
        if groups and abs(value - values[groups[-1][-1]]) <= atol:
            groups[-1].append(index)
        else:
            groups.append([index])
    return groups


def greedy_match(x: np.ndarray, y: np.ndarray
                 ) -> tuple[list[tuple[int, int]], float]:
    """Match two multisets of complex numbers by repeated nearest pairs.

    Ties are broken by the lexicographic order of (Re, Im) of the first set.

    Returns
    -------
    tuple[list[tuple[int, int]], float]
        Matched index pairs and the largest matched distance (inf when the
        sizes differ).
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        return [], float("inf")
    if x.size == 0:
        return [], 0.0
    distance = np.abs(x[:, None] - y[None, :])
    lexi = np.lexsort((x.imag, x.real))
    rank_of = np.empty_like(lexi)
    rank_of[lexi] = np.arange(lexi.size)
    candidates = sorted(((distance[i, j], rank_of[i], i, j)
                         for i in range(x.size) for j in range(y.size)))
    used_x: set[int] = set()
    used_y: set[int] = set()
    pairs: list[tuple[int, int]] = []
    worst = 0.0
    for d, _, i, j in candidates:
        if i in used_x or j in used_y:
            continue
        used_x.add(i)
        used_y.add(j)
        pairs.append((i, j))
        worst = max(worst, float(d))
        if len(pairs) == x.size:
            break
    return pairs, worst


def relative_difference(a: complex, b: complex, floor: float = 0.0) -> float:
    """|a - b| / (|a| + |b| + floor), zero when both vanish."""
    denominator = abs(a) + abs(b) + floor
    if denominator == 0.0:
        return 0.0
    return abs(a - b) / denominator
