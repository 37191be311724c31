"""
Closed real intervals, interval vectors and interval matrices, with the
sign-split affine map and monotone activations that every reachability bound
is built from.

Vectors and matrices keep their bounds as two read-only numpy arrays (`lo`,
`hi`); scalar `Interval` views are produced on demand. Endpoints are plain
floating point, no outward rounding.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy.special import expit

from src.api_types import DimensionError, IntervalError


class Activation(str, Enum):
    SIGMOID = "sigmoid"
    TANH = "tanh"
    RELU = "relu"
    IDENTITY = "identity"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self is Activation.SIGMOID:
            return expit(x)
        if self is Activation.TANH:
            return np.tanh(x)
        if self is Activation.RELU:
            return np.maximum(x, 0.0)
        return x.copy()

    @classmethod
    def names(cls) -> Tuple[str, ...]:
        return tuple(a.value for a in cls)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_bounds(lo: np.ndarray, hi: np.ndarray) -> None:
    if lo.shape != hi.shape:
        raise DimensionError("interval bounds", lo.shape, hi.shape)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise IntervalError("Interval endpoints must be finite")
    if np.any(lo > hi):
        raise IntervalError("Interval lower bound exceeds upper bound")


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise IntervalError(f"Interval endpoints must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise IntervalError(f"Interval lower bound exceeds upper bound: [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, v: float) -> "Interval":
        return cls(v, v)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def center(self) -> float:
        return (self.lo + self.hi) / 2

    @property
    def radius(self) -> float:
        return (self.hi - self.lo) / 2

    def contains(self, v: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= v <= self.hi + slack

    def issubset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi


@dataclass(frozen=True, eq=False)
class IntervalVector:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = _frozen(self.lo), _frozen(self.hi)
        if lo.ndim != 1:
            raise DimensionError("IntervalVector", "1-D bounds", lo.shape)
        _check_bounds(lo, hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_intervals(cls, entries: Iterable[Interval]) -> "IntervalVector":
        entries = list(entries)
        return cls([e.lo for e in entries], [e.hi for e in entries])

    @classmethod
    def point(cls, v: Sequence[float]) -> "IntervalVector":
        return cls(v, v)

    @classmethod
    def box(cls, center: Sequence[float], radius) -> "IntervalVector":
        center = np.asarray(center, dtype=float)
        radius = np.broadcast_to(np.asarray(radius, dtype=float), center.shape)
        if np.any(radius < 0):
            raise IntervalError("Box radius must be nonnegative")
        return cls(center - radius, center + radius)

    def __len__(self) -> int:
        return self.lo.shape[0]

    def __getitem__(self, i: int) -> Interval:
        return Interval(self.lo[i], self.hi[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalVector):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    @property
    def entries(self) -> Tuple[Interval, ...]:
        return tuple(self)

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2

    @property
    def radius(self) -> np.ndarray:
        return (self.hi - self.lo) / 2

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, v, slack: float = 0.0) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.all(self.lo - slack <= v) and np.all(v <= self.hi + slack))

    def issubset(self, other: "IntervalVector") -> bool:
        return bool(np.all(other.lo <= self.lo) and np.all(self.hi <= other.hi))


@dataclass(frozen=True, eq=False)
class IntervalMatrix:
    """Entrywise-interval matrix; `entries` and `vec()` are row-major."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = _frozen(self.lo), _frozen(self.hi)
        if lo.ndim != 2 or lo.shape[0] < 1 or lo.shape[1] < 1:
            raise DimensionError("IntervalMatrix", "non-empty 2-D bounds", lo.shape)
        _check_bounds(lo, hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Interval]]) -> "IntervalMatrix":
        return cls([[e.lo for e in row] for row in rows], [[e.hi for e in row] for row in rows])

    @property
    def rows(self) -> int:
        return self.lo.shape[0]

    @property
    def cols(self) -> int:
        return self.lo.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.lo.shape

    def entry(self, i: int, j: int) -> Interval:
        return Interval(self.lo[i, j], self.hi[i, j])

    @property
    def entries(self) -> Tuple[Interval, ...]:
        return tuple(Interval(lo, hi) for lo, hi in zip(self.lo.ravel(), self.hi.ravel()))

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2

    @property
    def radius(self) -> np.ndarray:
        return (self.hi - self.lo) / 2

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    def column(self, i: int) -> IntervalVector:
        return IntervalVector(self.lo[:, i], self.hi[:, i])

    def vec(self) -> IntervalVector:
        return IntervalVector(self.lo.ravel(), self.hi.ravel())

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalMatrix):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)


def signed_term_bounds(w: float, x: Interval) -> Interval:
    if w >= 0:
        return Interval(w * x.lo, w * x.hi)
    return Interval(w * x.hi, w * x.lo)


def apply_activation(a: Activation, x: Interval) -> Interval:
    return Interval(float(a(x.lo)), float(a(x.hi)))


def apply_activation_vector(a: Activation, x: IntervalVector) -> IntervalVector:
    return IntervalVector(a(x.lo), a(x.hi))


def affine_bounds(W: np.ndarray, b: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Array form of the sign-split affine map. `lo`/`hi` are (n,) or (n, N) with one
    box per column; returns bounds of W·x + b of matching layout.
    """
    W_pos = np.maximum(W, 0.0)
    W_neg = np.minimum(W, 0.0)
    b = b.reshape((-1,) + (1,) * (lo.ndim - 1))
    out_lo = W_pos @ lo + W_neg @ hi + b
    out_hi = W_pos @ hi + W_neg @ lo + b
    return out_lo, out_hi


def interval_affine(W, b, x: IntervalVector) -> IntervalVector:
    W = np.atleast_2d(np.asarray(W, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if W.shape[1] != len(x):
        raise DimensionError("interval_affine (W columns vs |x|)", (W.shape[0], len(x)), W.shape)
    if b.shape[0] != W.shape[0]:
        raise DimensionError("interval_affine (b rows vs W rows)", (W.shape[0],), b.shape)
    lo, hi = affine_bounds(W, b, x.lo, x.hi)
    return IntervalVector(lo, hi)


def corner_inputs(W, x: IntervalVector) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per output row i, the box corners attaining the lower and upper bound of
    interval_affine: rows of the returned (n_out, n_in) arrays.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    positive = W >= 0
    low_corner = np.where(positive, x.lo, x.hi)
    high_corner = np.where(positive, x.hi, x.lo)
    return low_corner, high_corner
