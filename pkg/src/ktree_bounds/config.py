"""
Settings for ktree-bounds, read from a YAML file and the environment.
"""

import os
from pathlib import Path
from typing import Optional, Union

import yaml
from pydantic import BaseModel, Field

from .errors import ParameterError
from .params import DEFAULT_PRECISION_BITS
from .solver import DEFAULT_MEMORY_CAP

__all__ = [
    "KTreeSettings",
    "PRECISION_ENV_VAR",
    "load_settings",
    "save_settings",
]

PRECISION_ENV_VAR = "KTREE_PRECISION_BITS"


class KTreeSettings(BaseModel):
    """Defaults used when a command does not override them."""
    precision_bits: int = Field(
        default=DEFAULT_PRECISION_BITS, ge=64, description="Working precision of bound arithmetic"
    )
    memory_cap: int = Field(
        default=DEFAULT_MEMORY_CAP, ge=1, description="Max list elements held by one solver run"
    )
    n_max: int = Field(default=1 << 40, ge=1, description="Upper end of list-size searches")
    trials: int = Field(default=1000, ge=1, description="Monte-Carlo trials per parameter set")
    seed: int = Field(default=0, ge=0, description="Master seed")
    parallelism: int = Field(default=1, ge=1, description="Worker processes for trials")
    decimal_digits: int = Field(default=30, ge=1, description="Significant digits in output")
    log_level: str = Field(default="WARNING", description="loguru level for the CLI sink")


def load_settings(path: Optional[Union[str, Path]] = None) -> KTreeSettings:
    """Load settings from ``path`` (missing file means defaults), then apply the environment."""
    data = {}
    if path is not None:
        path = Path(path)
        if path.exists():
            with open(path, "r") as f:
                data = yaml.safe_load(f) or {}
            if not isinstance(data, dict):
                raise ParameterError(f"{path} does not hold a mapping")

    raw = os.environ.get(PRECISION_ENV_VAR)
    if raw is not None:
        try:
            data["precision_bits"] = int(raw.strip())
        except ValueError as exc:
            raise ParameterError(f"{PRECISION_ENV_VAR} must be an integer, got {raw!r}") from exc

    return KTreeSettings(**data)


def save_settings(path: Union[str, Path], settings: KTreeSettings) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.safe_dump(settings.model_dump(mode="json"), f, default_flow_style=False, sort_keys=False)
