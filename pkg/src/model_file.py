"""
Text format of a trained network: one `key=value` line per field, parsed with
python-dotenv. Matrices are flattened row-major, space-separated, printed with
17 significant digits so that a load/save cycle reproduces the bytes.
"""

from dataclasses import dataclass
from io import StringIO
from typing import IO, List, Optional

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from src.api_types import DataError
from src.datasets import format_float
from src.interval_core import Activation
from src.reach import ShallowNet

FORMAT_VERSION = 1
KEY_ORDER = (
    "format_version",
    "dims",
    "hidden_activation",
    "output_activation",
    "meta_seed",
    "meta_method",
    "meta_delta",
    "meta_gamma",
    "W1",
    "b1",
    "W2",
    "b2",
)


class ModelMeta(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: str = "elm"
    seed: Optional[int] = None
    delta: Optional[List[float]] = None
    gamma: Optional[float] = None

    @field_validator("method")
    @classmethod
    def method_is_known(cls, v: str) -> str:
        if v not in ("elm", "robust"):
            raise ValueError("method must be 'elm' or 'robust'")
        return v


@dataclass(frozen=True, eq=False)
class ModelFile:
    net: ShallowNet
    meta: ModelMeta


def _floats(values) -> str:
    return " ".join(format_float(v) for v in np.asarray(values, dtype=float).ravel())


def dumps(model: ModelFile) -> str:
    net, meta = model.net, model.meta
    n0, n1, n2 = net.dims
    fields = {
        "format_version": str(FORMAT_VERSION),
        "dims": f"{n0} {n1} {n2}",
        "hidden_activation": net.hidden_activation.value,
        "output_activation": net.output_activation.value,
        "meta_seed": "" if meta.seed is None else str(meta.seed),
        "meta_method": meta.method,
        "meta_delta": "" if meta.delta is None else _floats(meta.delta),
        "meta_gamma": "" if meta.gamma is None else format_float(meta.gamma),
        "W1": _floats(net.W1),
        "b1": _floats(net.b1),
        "W2": _floats(net.W2),
        "b2": _floats(net.b2),
    }
    return "".join(f"{key}={fields[key]}\n" for key in KEY_ORDER)


def save_model(stream: IO[str], model: ModelFile) -> None:
    stream.write(dumps(model))


def _parse_floats(values: dict, key: str, count: int) -> np.ndarray:
    try:
        out = np.array([float(v) for v in values[key].split()])
    except ValueError:
        raise DataError(f"model file field '{key}' is not numeric")
    if out.shape[0] != count:
        raise DataError(f"model file field '{key}' has {out.shape[0]} values, expected {count}")
    return out


def loads(text: str) -> ModelFile:
    values = dotenv_values(stream=StringIO(text), interpolate=False)
    missing = [key for key in KEY_ORDER if values.get(key) is None]
    if missing:
        raise DataError("model file is missing fields", missing=missing)
    if values["format_version"].strip() != str(FORMAT_VERSION):
        raise DataError(f"Unsupported model format_version '{values['format_version']}'")
    try:
        n0, n1, n2 = (int(v) for v in values["dims"].split())
        hidden = Activation(values["hidden_activation"].strip())
        output = Activation(values["output_activation"].strip())
    except ValueError as exc:
        raise DataError(f"model file header is malformed: {exc}")

    net = ShallowNet(
        W1=_parse_floats(values, "W1", n1 * n0).reshape(n1, n0),
        b1=_parse_floats(values, "b1", n1),
        W2=_parse_floats(values, "W2", n2 * n1).reshape(n2, n1),
        b2=_parse_floats(values, "b2", n2),
        hidden_activation=hidden,
        output_activation=output,
    )
    try:
        meta = ModelMeta(
            method=values["meta_method"].strip(),
            seed=values["meta_seed"].strip() or None,
            delta=values["meta_delta"].split() or None,
            gamma=values["meta_gamma"].strip() or None,
        )
    except ValidationError as exc:
        errors = [f"{err.get('loc', ['field'])[0]}: {err.get('msg', '')}" for err in exc.errors()]
        raise DataError("model file metadata is invalid", errors=errors)
    return ModelFile(net, meta)


def load_model(stream: IO[str]) -> ModelFile:
    return loads(stream.read())
