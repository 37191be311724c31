"""
Extreme Learning Machine baseline: random fixed hidden layer, least-squares
output layer. Its solution is also the warm start of robust training.
"""

from typing import Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.api_types import DataError, DimensionError, IntervalError
from src.interval_core import Activation, Interval
from src.reach import ShallowNet

DEFAULT_WEIGHT_RANGE = (-1.0, 1.0)
DEFAULT_RIDGE = 1e-10


class ElmConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_hidden: int = Field(10, ge=1)
    activation: Activation = Activation.SIGMOID
    weight_range: Tuple[float, float] = DEFAULT_WEIGHT_RANGE
    seed: int = Field(0, ge=0, lt=2**64)
    ridge: float = Field(DEFAULT_RIDGE, ge=0.0)

    @field_validator("weight_range")
    @classmethod
    def weight_range_is_interval(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        try:
            interval = Interval(*v)
        except IntervalError as exc:
            raise ValueError(str(exc)) from exc
        return (interval.lo, interval.hi)

    @property
    def weight_interval(self) -> Interval:
        return Interval(*self.weight_range)


def make_generator(seed: int) -> np.random.Generator:
    # PCG64 is fixed by name so that sampling sequences replay across platforms
    return np.random.Generator(np.random.PCG64(seed))


def init_random(cfg: ElmConfig, n0: int, n2: int) -> ShallowNet:
    if n0 < 1 or n2 < 1:
        raise DimensionError("init_random layer widths", "n0, n2 >= 1", (n0, n2))
    rng = make_generator(cfg.seed)
    lo, hi = cfg.weight_range
    W1 = rng.uniform(lo, hi, size=(cfg.n_hidden, n0))
    b1 = rng.uniform(lo, hi, size=cfg.n_hidden)
    return ShallowNet(
        W1=W1,
        b1=b1,
        W2=np.zeros((n2, cfg.n_hidden)),
        b2=np.zeros(n2),
        hidden_activation=cfg.activation,
        output_activation=Activation.IDENTITY,
    )


def point_features(net: ShallowNet, U) -> np.ndarray:
    """H(U): column i is φ₁(W1 u_i + b1); shape n1×N."""
    return net.hidden(U)


def train_least_squares(H, Y, ridge: float = DEFAULT_RIDGE) -> np.ndarray:
    """
    W2 (n2×n1) minimizing ‖W2·H − Yᵀ‖²_F + ridge·‖W2‖²_F. The ridge term enters as
    extra rows of the stacked system; ridge = 0 is the minimum-norm solution
    from the SVD-based driver.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if ridge < 0:
        raise DataError("ridge must be nonnegative", ridge=ridge)
    n1, N = H.shape
    if N == 0 or Y.size == 0:
        raise DataError("train_least_squares needs at least one sample")
    if Y.shape[0] != N:
        raise DimensionError("train_least_squares targets rows", N, Y.shape[0])
    if not (np.all(np.isfinite(H)) and np.all(np.isfinite(Y))):
        raise DataError("train_least_squares input has non-finite entries")

    A = H.T
    B = Y
    if ridge > 0:
        A = np.vstack([A, np.sqrt(ridge) * np.eye(n1)])
        B = np.vstack([B, np.zeros((n1, Y.shape[1]))])
    solution, _, _, _ = scipy.linalg.lstsq(A, B, lapack_driver="gelsd")
    return solution.T


def least_squares_objective(W2, H, Y, ridge: float = 0.0) -> float:
    residual = np.asarray(W2) @ H - np.asarray(Y).T
    return float(np.sum(residual**2) + ridge * np.sum(np.asarray(W2) ** 2))


def fit_elm(cfg: ElmConfig, U, Y) -> ShallowNet:
    """Algorithm baseline end to end: random hidden layer, then the output solve."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    net = init_random(cfg, U.shape[1], Y.shape[1])
    W2 = train_least_squares(point_features(net, U), Y, cfg.ridge)
    return net.with_output_weights(W2)


def mse(net: ShallowNet, U, Y) -> float:
    U = np.atleast_2d(np.asarray(U, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    N = U.shape[0]
    if N == 0:
        raise DataError("mse needs at least one sample")
    n2 = net.dims[2]
    if Y.shape != (N, n2):
        raise DimensionError("mse targets", (N, n2), Y.shape)
    residual = net.forward(U) - Y
    return float(np.sum(residual**2) / (N * n2))
