import os
from typing import Dict, List, Mapping, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ValidationError, field_validator

from src.api_types import ConfigError
from src.utils.project_structure import find_project_root

ENV_PREFIX = "RRT_"


class Settings(BaseModel):
    debug_log: Optional[str] = None
    verbose: bool = False
    tol_gap: float = 1e-7
    tol_feas: float = 1e-8
    max_iters: int = 200
    step_fraction: float = 0.98

    @field_validator("debug_log")
    @classmethod
    def debug_log_blank_is_none(cls, v: Optional[str]) -> Optional[str]:
        if v is None:
            return None
        stripped = v.strip()
        return stripped if stripped else None

    @field_validator("tol_gap", "tol_feas")
    @classmethod
    def tolerance_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("tolerance must be positive")
        return v

    @field_validator("max_iters")
    @classmethod
    def max_iters_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("max_iters must be at least 1")
        return v

    @field_validator("step_fraction")
    @classmethod
    def step_fraction_open_unit(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("step_fraction must lie in (0, 1)")
        return v


def _prefixed(values: Mapping[str, Optional[str]]) -> Dict[str, str]:
    fields = Settings.model_fields
    out = {}
    for key, value in values.items():
        if value is None or not key.startswith(ENV_PREFIX):
            continue
        name = key[len(ENV_PREFIX):].lower()
        if name in fields:
            out[name] = value
    return out


def load_settings(overrides: Optional[Mapping[str, object]] = None, environ: Optional[Mapping[str, str]] = None) -> Settings:
    """
    Defaults < project `.env` < environment < `overrides` (CLI flags; None
    values are ignored).
    """
    merged: Dict[str, object] = {}
    project_root = find_project_root()
    if project_root is not None:
        env_path = os.path.join(project_root, ".env")
        if os.path.isfile(env_path):
            merged.update(_prefixed(dotenv_values(env_path)))
    merged.update(_prefixed(os.environ if environ is None else environ))
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})

    try:
        return Settings(**merged)
    except ValidationError as exc:
        errors: List[str] = []
        for err in exc.errors():
            loc = err.get("loc", ["field"])[0]
            msg = err.get("msg", "")
            errors.append(f"{loc}: {msg}")
        raise ConfigError("Invalid settings", errors)
