"""Report emission for the CLI: JSON objects and pandas CSV tables."""


import json
from typing import Any

import click
import pandas as pd

from lossmodes.models.reports import jsonable


def write_json(data: dict[str, Any], schema_version: str,
               out_path: str | None) -> None:
    """Write a report object tagged with ``schema_version``."""
    payload = {"schema_version": schema_version, **jsonable(data)}
    _write(json.dumps(payload, indent=2) + "\n", out_path)


def write_csv(frame: pd.DataFrame, out_path: str | None,
              footer: dict[str, Any] | None = None) -> None:
    """Write a table; ``footer`` items become trailing ``# key=value``
    comment lines."""
    text = frame.to_csv(index=False)
    for key, value in (footer or {}).items():
        text += f"# {key}={value}\n"
    _write(text, out_path)


def _write(text: str, out_path: str | None) -> None:
    if out_path is None:
        click.echo(text, nl=False)
        return
    with open(out_path, "w") as f:
        f.write(text)
