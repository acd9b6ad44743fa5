"""Numerical tolerances shared by the services."""


from __future__ import annotations
from collections.abc import Mapping
from dataclasses import dataclass, fields, replace

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Tolerances used across the analysis.

    Every field maps to an application config key ``TOL_<NAME>``, e.g.
    ``overdamped`` is read from ``TOL_OVERDAMPED``.
    """
    validation: float = 1e-10
    residual: float = 1e-8
    pencil: float = 1e-8
    match: float = 1e-7
    overdamped: float = 1e-7
    imag: float = 1e-8
    integrator_rtol: float = 1e-10
    integrator_atol: float = 1e-12
    asymptotic_factor: float = 10.0
    rank: float = 1e-10

    @classmethod
    def from_mapping(cls, config: Mapping[str, object]) -> Tolerances:
        """Build tolerances from a config mapping (e.g. ``app.config``).

        Parameters
        ----------
        config: Mapping[str, object]
            Mapping holding ``TOL_*`` keys. Missing keys keep their defaults.

        Returns
        -------
        Tolerances
        """
        values = {}
        for field in fields(cls):
            key = f"TOL_{field.name.upper()}"
            if key in config:
                values[field.name] = float(config[key])
        return cls(**values)

    @classmethod
    def config_keys(cls) -> list[str]:
        """All config keys understood by ``from_mapping``."""
        return [f"TOL_{field.name.upper()}" for field in fields(cls)]

    def with_overrides(self, **overrides: float) -> Tolerances:
        """Copy with some tolerances replaced."""
        return replace(self, **overrides)

    def rank_threshold(self, singular_values: np.ndarray, n: int) -> float:
        """Numerical rank cutoff relative to the largest singular value.

        The machine-precision cutoff max(n, 1)*eps is raised to ``rank`` so
        that zeros smeared by a congruence with a moderately conditioned
        kinetic form still count as zeros.
        """
        if singular_values.size == 0:
            return 0.0
        relative = max(max(n, 1) * np.finfo(float).eps, self.rank)
        return relative * float(np.max(singular_values))

    def as_dict(self) -> dict[str, float]:
        return {field.name: getattr(self, field.name) for field in fields(self)}


DEFAULT_TOLERANCES = Tolerances()
