"""
Interval reachability of one-hidden-layer networks.

Each layer maps a box through the sign-split affine bound and then through its
monotone activation endpoint-wise. Every per-layer bound is exact; composing
the two layers over-approximates the true reach set.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.api_types import DataError, DimensionError
from src.interval_core import (
    Activation,
    IntervalMatrix,
    IntervalVector,
    affine_bounds,
    apply_activation_vector,
    interval_affine,
)


def _frozen(a, ndim: int, what: str) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if ndim == 2:
        arr = np.atleast_2d(arr)
    if arr.ndim != ndim:
        raise DimensionError(what, f"{ndim}-D array", arr.shape)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{what} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ShallowNet:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    hidden_activation: Activation = Activation.SIGMOID
    output_activation: Activation = Activation.IDENTITY

    def __post_init__(self):
        W1 = _frozen(self.W1, 2, "W1")
        b1 = _frozen(self.b1, 1, "b1")
        W2 = _frozen(self.W2, 2, "W2")
        b2 = _frozen(self.b2, 1, "b2")
        n1, n0 = W1.shape
        n2 = W2.shape[0]
        if n0 < 1 or n1 < 1 or n2 < 1:
            raise DimensionError("ShallowNet layer widths", "all >= 1", (n0, n1, n2))
        if b1.shape != (n1,):
            raise DimensionError("ShallowNet b1", (n1,), b1.shape)
        if W2.shape[1] != n1:
            raise DimensionError("ShallowNet W2", (n2, n1), W2.shape)
        if b2.shape != (n2,):
            raise DimensionError("ShallowNet b2", (n2,), b2.shape)
        object.__setattr__(self, "W1", W1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "W2", W2)
        object.__setattr__(self, "b2", b2)
        object.__setattr__(self, "hidden_activation", Activation(self.hidden_activation))
        object.__setattr__(self, "output_activation", Activation(self.output_activation))

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.W1.shape[1], self.W1.shape[0], self.W2.shape[0]

    @property
    def is_elm(self) -> bool:
        return self.output_activation is Activation.IDENTITY and not np.any(self.b2)

    def hidden(self, U) -> np.ndarray:
        """Hidden features of the rows of U, one column per sample (n1×N)."""
        U = self._check_inputs(U)
        return self.hidden_activation(self.W1 @ U.T + self.b1[:, None])

    def forward(self, U) -> np.ndarray:
        """Φ(U) for the rows of U, returned as N×n2."""
        Hf = self.hidden(U)
        out = self.output_activation(self.W2 @ Hf + self.b2[:, None])
        return out.T

    def with_output_weights(self, W2) -> "ShallowNet":
        return ShallowNet(self.W1, self.b1, W2, self.b2, self.hidden_activation, self.output_activation)

    def _check_inputs(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        if U.ndim == 1 and U.size == 0:
            U = U.reshape(0, self.dims[0])
        U = np.atleast_2d(U)
        if U.shape[1] != self.dims[0]:
            raise DimensionError("network input columns", self.dims[0], U.shape[1])
        return U


@dataclass(frozen=True, eq=False)
class UncertainDataset:
    """Samples u_i (rows of `centers`) perturbed into boxes [u_i − δ_i, u_i + δ_i]."""

    centers: np.ndarray
    deltas: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        centers = _frozen(self.centers, 2, "centers")
        deltas = _frozen(self.deltas, 2, "deltas")
        targets = _frozen(self.targets, 2, "targets")
        if deltas.shape != centers.shape:
            raise DimensionError("UncertainDataset deltas", centers.shape, deltas.shape)
        if targets.shape[0] != centers.shape[0]:
            raise DimensionError("UncertainDataset targets rows", centers.shape[0], targets.shape[0])
        if np.any(deltas < 0):
            raise DataError("UncertainDataset deltas must be nonnegative")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "deltas", deltas)
        object.__setattr__(self, "targets", targets)

    @classmethod
    def uniform(cls, U, Y, delta) -> "UncertainDataset":
        """`delta` is a scalar or a per-column vector of length n0."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        delta = np.asarray(delta, dtype=float)
        if delta.ndim == 1 and delta.shape[0] != U.shape[1]:
            raise DimensionError("per-column deltas", U.shape[1], delta.shape[0])
        return cls(U, np.broadcast_to(delta, U.shape), Y)

    def __len__(self) -> int:
        return self.centers.shape[0]

    @property
    def lower(self) -> np.ndarray:
        return self.centers - self.deltas

    @property
    def upper(self) -> np.ndarray:
        return self.centers + self.deltas

    def box(self, i: int) -> IntervalVector:
        return IntervalVector(self.lower[i], self.upper[i])


def layer_reach(W, b, a: Activation, x: IntervalVector) -> IntervalVector:
    return apply_activation_vector(Activation(a), interval_affine(W, b, x))


def network_reach(net: ShallowNet, x0: IntervalVector) -> Tuple[IntervalVector, IntervalVector]:
    if len(x0) != net.dims[0]:
        raise DimensionError("network_reach input box", net.dims[0], len(x0))
    x1 = layer_reach(net.W1, net.b1, net.hidden_activation, x0)
    x2 = layer_reach(net.W2, net.b2, net.output_activation, x1)
    return x1, x2


def _check_data(net: ShallowNet, data: UncertainDataset) -> None:
    n0, _, n2 = net.dims
    if data.centers.shape[1] != n0:
        raise DimensionError("dataset input columns", n0, data.centers.shape[1])
    if data.targets.shape[1] != n2:
        raise DimensionError("dataset target columns", n2, data.targets.shape[1])


def _hidden_bounds(net: ShallowNet, data: UncertainDataset) -> Tuple[np.ndarray, np.ndarray]:
    # all samples at once: column i of the (n1, N) result is the box of sample i
    lo, hi = affine_bounds(net.W1, net.b1, data.lower.T, data.upper.T)
    a = net.hidden_activation
    return a(lo), a(hi)


def hidden_interval_matrix(net: ShallowNet, data: UncertainDataset) -> IntervalMatrix:
    """H(𝒰) as an n1×N interval matrix, column i bounding h over the box of sample i."""
    n0 = net.dims[0]
    if data.centers.shape[1] != n0:
        raise DimensionError("dataset input columns", n0, data.centers.shape[1])
    if len(data) == 0:
        raise DataError("hidden_interval_matrix needs at least one sample")
    lo, hi = _hidden_bounds(net, data)
    return IntervalMatrix(lo, hi)


@dataclass(frozen=True, eq=False)
class ReachBoxes:
    centers: np.ndarray
    radii: np.ndarray

    def __len__(self) -> int:
        return self.centers.shape[0]


def reach_boxes(net: ShallowNet, data: UncertainDataset) -> ReachBoxes:
    """Output boxes 𝒳(2) of every sample, as N×n2 centers and radii."""
    _check_data(net, data)
    h_lo, h_hi = _hidden_bounds(net, data)
    lo, hi = affine_bounds(net.W2, net.b2, h_lo, h_hi)
    a = net.output_activation
    lo, hi = a(lo), a(hi)
    return ReachBoxes(((lo + hi) / 2).T, ((hi - lo) / 2).T)


def output_radius(net: ShallowNet, data: UncertainDataset, boxes: Optional[ReachBoxes] = None) -> float:
    """Largest Euclidean norm of a per-sample output radius vector."""
    if len(data) == 0:
        return 0.0
    boxes = boxes if boxes is not None else reach_boxes(net, data)
    return float(np.max(np.linalg.norm(boxes.radii, axis=1)))
