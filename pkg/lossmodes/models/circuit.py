"""Parameters of the two-loop circuit example."""


from __future__ import annotations
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from lossmodes.errors import ParameterError


@dataclass(frozen=True)
class CircuitParams:
    """Two inductive loops coupled through a shared capacitance.

    l1, l2: inductances; c1, c2: loop capacitances; c12: coupling
    capacitance (inf removes the coupling); r2: resistance in loop 2;
    ell: resistance scale. The loss parameter is beta = r2 / ell.
    """
    l1: float = 1.0
    l2: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c12: float = 1.0
    r2: float = 1.0
    ell: float = 1.0

    def __post_init__(self):
        for name in ("l1", "l2", "c1", "c2", "c12", "ell"):
            value = getattr(self, name)
            if not value > 0.0 or np.isnan(value):
                raise ParameterError(f"{name} must be positive, got {value}")
        if not self.r2 >= 0.0 or not np.isfinite(self.r2):
            raise ParameterError(f"r2 must be nonnegative, got {self.r2}")

    @property
    def beta(self) -> float:
        """Get the induced loss parameter r2 / ell."""
        return self.r2 / self.ell

    def as_dict(self) -> dict[str, Any]:
        data = asdict(self)
        if np.isinf(self.c12):
            data["c12"] = "inf"
        return data
