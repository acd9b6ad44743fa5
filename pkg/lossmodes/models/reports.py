"""Report records returned by the checking operations.

Reports are plain frozen records; every one of them can be rendered with
``as_dict()`` for the JSON output of the CLI.
"""


from __future__ import annotations
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np


def jsonable(value: Any) -> Any:
    """Convert complex numbers, fractions and tuples for JSON output."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and value != value:
        return None
    if isinstance(value, float) and value in (float("inf"), float("-inf")):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


@dataclass(frozen=True)
class Check:
    """A named pass/fail check with the numeric margin that decided it."""
    name: str
    passed: bool
    margin: float
    detail: str = ""

    def as_dict(self) -> dict[str, Any]:
        return jsonable(asdict(self))


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of ``SystemService.validate_system``."""
    checks: tuple[Check, ...]
    alpha_condition: float

    @property
    def overall(self) -> bool:
        """True iff every check passed."""
        return all(check.passed for check in self.checks)

    def failed(self) -> list[Check]:
        return [check for check in self.checks if not check.passed]

    def check(self, name: str) -> Check:
        """Look a check up by its name."""
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def as_dict(self) -> dict[str, Any]:
        return {"overall": self.overall,
                "alpha_condition": jsonable(self.alpha_condition),
                "checks": [check.as_dict() for check in self.checks]}


@dataclass(frozen=True)
class LossFraction:
    """Rank of R and the loss fraction delta_R = N_R / N."""
    n_r: int
    delta_r: Fraction

    @property
    def two_component(self) -> bool:
        """True for a composite with lossy and lossless parts."""
        return 0 < self.delta_r < 1

    def as_dict(self) -> dict[str, Any]:
        return {"n_r": self.n_r, "delta_r": str(self.delta_r),
                "two_component": self.two_component}


@dataclass(frozen=True)
class EquivalenceResiduals:
    """Normalized residuals between canonical and Lagrangian energetics."""
    energy: float
    dissipation: float
    work: float

    def worst(self) -> float:
        return max(self.energy, self.dissipation, self.work)

    def as_dict(self) -> dict[str, Any]:
        return jsonable(asdict(self))


@dataclass(frozen=True)
class DeterminantComparison:
    """det(zeta - A(beta)) against det C(zeta, beta) / det alpha."""
    lhs: complex
    rhs: complex
    relerr: float

    def as_dict(self) -> dict[str, Any]:
        return jsonable(asdict(self))


@dataclass(frozen=True)
class SchurReport:
    """Aitken factorization and block determinant identities."""
    factorization_residual: float | None
    determinant_relerr: float | None
    commuting: bool
    commuting_relerr: float | None
    limit_relerrs: tuple[float, ...] = ()

    @property
    def passed(self) -> bool:
        values = [self.factorization_residual, self.determinant_relerr,
                  self.commuting_relerr, *self.limit_relerrs]
        return all(value is None or value <= 1e-8 for value in values)

    def as_dict(self) -> dict[str, Any]:
        data = jsonable(asdict(self))
        data["passed"] = self.passed
        return data


@dataclass(frozen=True)
class SymmetryReport:
    """Spectral symmetry sigma = -conj(sigma) of A(beta)."""
    multiset_mismatch: float
    pairing_residual: float
    origin_mismatch: float | None
    max_imag_at_zero: float | None
    passed: bool

    def as_dict(self) -> dict[str, Any]:
        return jsonable(asdict(self))


@dataclass(frozen=True)
class DiscBound:
    """Disc containment data for one eigenvalue."""
    zeta: complex
    distance: float
    gamma: float
    contained: bool
    imag_bounded: bool
    lower_bound_holds: bool


@dataclass(frozen=True)
class BoundsReport:
    """Eigenvalue bounds in terms of Re M and Im M."""
    re_norm: float
    im_norm: float
    bounds: tuple[DiscBound, ...]

    @property
    def passed(self) -> bool:
        return all(b.contained and b.imag_bounded and b.lower_bound_holds
                   for b in self.bounds)

    def as_dict(self) -> dict[str, Any]:
        return {"re_norm": self.re_norm, "im_norm": self.im_norm,
                "passed": self.passed,
                "bounds": [jsonable(asdict(b)) for b in self.bounds]}


@dataclass(frozen=True)
class DampingSplitReport:
    """Damping bands of the two clusters and the high-loss Q bound."""
    low_band_edge: float
    high_band_edge: float
    q_bound: float
    max_low_damping: float
    min_high_damping: float
    max_high_q: float

    def as_dict(self) -> dict[str, Any]:
        return jsonable(asdict(self))


@dataclass(frozen=True)
class InequalityReport:
    """Fundamental inequalities evaluated on one pencil eigenpair."""
    checks: tuple[Check, ...]
    oscillatory: bool
    certified_overdamped: bool

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def as_dict(self) -> dict[str, Any]:
        return {"passed": self.passed, "oscillatory": self.oscillatory,
                "certified_overdamped": self.certified_overdamped,
                "checks": [check.as_dict() for check in self.checks]}


@dataclass(frozen=True)
class VirialReport:
    """Virial identity T = V - (Im z / Re z)^2 Re(Q', theta Q) at t = 0."""
    lhs: float
    rhs: float | None
    residual: float
    equipartition: bool
    theta_moment: float
    equipartition_gap: float

    def as_dict(self) -> dict[str, Any]:
        return jsonable(asdict(self))


@dataclass(frozen=True)
class TimeAverageReport:
    """Windowed averages of the classical virial theorem."""
    avg_lagrangian: float
    avg_t_minus_v: float
    avg_dg_dt: float
    pointwise_residual: float
    window: float

    def as_dict(self) -> dict[str, Any]:
        return jsonable(asdict(self))


@dataclass(frozen=True)
class QGrowthReport:
    """Quality factors of the oscillatory low-loss modes across a grid."""
    betas: tuple[float, ...]
    q_values: tuple[tuple[float, ...], ...]
    nondecreasing: tuple[bool, ...]
    slopes: tuple[float | None, ...]

    @property
    def passed(self) -> bool:
        return all(self.nondecreasing)

    def as_dict(self) -> dict[str, Any]:
        data = jsonable(asdict(self))
        data["passed"] = self.passed
        return data


@dataclass(frozen=True)
class ErrorOrders:
    """Fitted exponents p in |zeta - prediction| ~ beta^p."""
    high_loss: tuple[float, ...]
    low_loss_real: tuple[float | None, ...]
    low_loss_imag: tuple[float | None, ...]

    def as_dict(self) -> dict[str, Any]:
        return jsonable(asdict(self))


@dataclass(frozen=True)
class Claim:
    """A theorem-backed claim checked on computed data."""
    name: str
    applicable: bool
    holds: bool | None
    detail: str = ""

    def as_dict(self) -> dict[str, Any]:
        return jsonable(asdict(self))


@dataclass(frozen=True)
class OverdampingReport:
    """Per-mode overdamping flags, counts and the regime decision."""
    beta: float
    regime: str
    n: int
    n_r: int
    kappa: int
    nondegenerate: bool
    overdamped_count: int
    oscillatory_count: int
    thresholds: dict[str, Any]
    modes: tuple[dict[str, Any], ...]
    claims: tuple[Claim, ...]
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def claims_hold(self) -> bool:
        return all(claim.holds is not False for claim in self.claims
                   if claim.applicable)

    def as_dict(self) -> dict[str, Any]:
        data = {"beta": self.beta, "regime": self.regime, "n": self.n,
                "n_r": self.n_r, "kappa": self.kappa,
                "nondegenerate": self.nondegenerate,
                "overdamped": self.overdamped_count,
                "oscillatory": self.oscillatory_count,
                "thresholds": self.thresholds,
                "modes": list(self.modes),
                "claims": [claim.as_dict() for claim in self.claims],
                "claims_hold": self.claims_hold,
                "warnings": list(self.warnings)}
        return jsonable(data)
