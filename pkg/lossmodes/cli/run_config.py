"""Run configuration of a CLI invocation: option parsing and system
loading."""


from __future__ import annotations
import json
from collections.abc import Mapping
from dataclasses import dataclass, field

import click
import numpy as np

from lossmodes.errors import SystemParseError
from lossmodes.models.components.tolerances import Tolerances
from lossmodes.models.system import LagrangianSystem
from lossmodes.services.example_service import ExampleService


@dataclass(frozen=True)
class BetaGrid:
    """Loss parameter grid ``start:stop:count[:log]``."""
    start: float
    stop: float
    count: int
    log: bool = False

    def values(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunConfig:
    """Everything one command needs besides the command itself.

    ``source`` is an example name when ``from_example`` is set, otherwise a
    path to a JSON system definition.
    """
    command: str
    source: str
    from_example: bool
    beta: float | None = None
    beta_grid: BetaGrid | None = None
    output_format: str = "json"
    output_path: str | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int | None = None
    n: int = 3
    n_r: int = 1
    gyro: bool = False

    def load_system(self) -> LagrangianSystem:
        """Build the example or read the JSON file, applying ``--beta``.

        Raises
        ------
        SystemParseError
            If the file cannot be read or is not valid JSON.
        """
        if self.from_example:
            return ExampleService.example_system(self.source, self.beta,
                                                 seed=self.seed, n=self.n,
                                                 n_r=self.n_r, gyro=self.gyro)
        try:
            with open(self.source) as f:
                data = json.load(f)
        except OSError as e:
            raise SystemParseError(f"cannot read {self.source}: "
                                   f"{e.strerror}") from e
        except json.JSONDecodeError as e:
            raise SystemParseError(f"{self.source}: invalid JSON at line "
                                   f"{e.lineno}, column {e.colno}: "
                                   f"{e.msg}") from e
        sys = LagrangianSystem.from_dict(data)
        return sys if self.beta is None else sys.with_beta(self.beta)


def parse_beta_grid(text: str | None) -> BetaGrid | None:
    """Parse ``A:B:N[:log]``.

    Raises
    ------
    click.BadParameter
        For malformed grids, start >= stop, N < 2 or a log grid with A <= 0.
    """
    if text is None:
        return None
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise click.BadParameter(f"expected A:B:N[:log], got {text!r}",
                                 param_hint="--beta-grid")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--beta-grid") from e
    log = len(parts) == 4
    if not start < stop or count < 2:
        raise click.BadParameter("need start < stop and at least 2 points",
                                 param_hint="--beta-grid")
    if start < 0.0 or (log and start <= 0.0):
        raise click.BadParameter("loss parameters must be nonnegative "
                                 "(positive on a log grid)",
                                 param_hint="--beta-grid")
    return BetaGrid(start, stop, count, log)


def parse_tolerances(config: Mapping[str, object],
                     overrides: tuple[str, ...]) -> Tolerances:
    """Tolerances from the app config with ``--tol KEY=VAL`` overrides.

    ``overdamped=1e-6`` overrides the config key ``TOL_OVERDAMPED``.

    Raises
    ------
    click.BadParameter
        For unknown keys or non-numeric values.
    """
    known = Tolerances.config_keys()
    merged = {key: config[key] for key in known if key in config}
    for item in overrides:
        key, sep, value = item.partition("=")
        config_key = f"TOL_{key.strip().upper()}"
        if not sep or config_key not in known:
            raise click.BadParameter(
                f"unknown tolerance {key!r}; choose from "
                f"{', '.join(k[4:].lower() for k in known)}",
                param_hint="--tol")
        try:
            merged[config_key] = float(value)
        except ValueError as e:
            raise click.BadParameter(f"{key}: {e}", param_hint="--tol") from e
    return Tolerances.from_mapping(merged)


def parse_vector(text: str | None, name: str) -> np.ndarray | None:
    """Comma separated reals or ``re+imj`` complex numbers."""
    if text is None:
        return None
    try:
        return np.array([complex(x.strip().replace(" ", ""))
                         for x in text.split(",")], dtype=complex)
    except ValueError as e:
        raise click.BadParameter(f"expected comma separated numbers, got "
                                 f"{text!r}", param_hint=name) from e
