"""
Two-joint planar arm: forward kinematics and the angular working zones used
as the benchmark dataset.
"""

import math
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.api_types import DataError
from src.datasets import Dataset
from src.elm import make_generator

TWO_PI = 2.0 * math.pi
NORMAL_BAND = (5.0 * math.pi / 12.0, 7.0 * math.pi / 12.0)
BUFFER_BAND = (math.pi / 3.0, 2.0 * math.pi / 3.0)
SAMPLE_BATCH = 4096


class ArmGeometry(BaseModel):
    model_config = ConfigDict(frozen=True)

    l1: float = Field(1.0, gt=0)
    l2: float = Field(1.0, gt=0)


class Zone(str, Enum):
    NORMAL = "normal"
    BUFFERING = "buffering"
    FORBIDDEN = "forbidden"

    @classmethod
    def names(cls) -> Tuple[str, ...]:
        return tuple(z.value for z in cls)


def forward_kinematics(g: ArmGeometry, theta1, theta2):
    """End-effector (x, y); scalars or arrays of matching shape."""
    x = g.l1 * np.cos(theta1) + g.l2 * np.cos(theta1 + theta2)
    y = g.l1 * np.sin(theta1) + g.l2 * np.sin(theta1 + theta2)
    if np.ndim(x) == 0:
        return float(x), float(y)
    return x, y


def _in_band(theta, band) -> np.ndarray:
    return (band[0] <= theta) & (theta <= band[1])


def zone_codes(theta1, theta2) -> np.ndarray:
    """0 normal, 1 buffering, 2 forbidden; angles are reduced mod 2π."""
    t1 = np.mod(np.asarray(theta1, dtype=float), TWO_PI)
    t2 = np.mod(np.asarray(theta2, dtype=float), TWO_PI)
    normal = _in_band(t1, NORMAL_BAND) & _in_band(t2, NORMAL_BAND)
    outer = _in_band(t1, BUFFER_BAND) & _in_band(t2, BUFFER_BAND)
    return np.where(normal, 0, np.where(outer, 1, 2))


_ZONES = (Zone.NORMAL, Zone.BUFFERING, Zone.FORBIDDEN)


def classify_zone(theta1: float, theta2: float) -> Zone:
    return _ZONES[int(zone_codes(theta1, theta2))]


def _draw(rng: np.random.Generator, zone: Zone, count: int) -> np.ndarray:
    if zone is Zone.NORMAL:
        return rng.uniform(*NORMAL_BAND, size=(count, 2))
    if zone is Zone.BUFFERING:
        return rng.uniform(*BUFFER_BAND, size=(count, 2))
    return rng.uniform(0.0, TWO_PI, size=(count, 2))


def sample_angles(zone: Zone, N: int, seed: int) -> np.ndarray:
    """N×2 angles uniform over the zone, by rejection from its bounding square."""
    zone = Zone(zone)
    if N < 1:
        raise DataError("sample count must be at least 1", n=N)
    rng = make_generator(seed)
    code = _ZONES.index(zone)
    accepted = []
    total = 0
    while total < N:
        batch = _draw(rng, zone, SAMPLE_BATCH)
        batch = batch[zone_codes(batch[:, 0], batch[:, 1]) == code]
        accepted.append(batch)
        total += batch.shape[0]
    return np.vstack(accepted)[:N]


def sample_dataset(g: ArmGeometry, zone: Zone, N: int, seed: int) -> Dataset:
    U = sample_angles(zone, N, seed)
    x, y = forward_kinematics(g, U[:, 0], U[:, 1])
    return Dataset(U, np.column_stack([x, y]))
