import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.api_types import DimensionError, IntervalError
from src.interval_core import (
    Activation,
    Interval,
    IntervalMatrix,
    IntervalVector,
    apply_activation,
    corner_inputs,
    interval_affine,
    signed_term_bounds,
)

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


def test_interval_measures():
    x = Interval(-1.0, 3.0)
    assert x.width == 4.0
    assert x.center == 1.0
    assert x.radius == 2.0
    assert Interval.point(2.5).width == 0.0


def test_interval_rejects_inverted_and_infinite():
    with pytest.raises(IntervalError):
        Interval(1.0, 0.0)
    with pytest.raises(IntervalError):
        Interval(0.0, math.inf)
    with pytest.raises(IntervalError):
        IntervalVector([0.0, 2.0], [1.0, 1.0])


def test_interval_vector_box_and_entries():
    box = IntervalVector.box([1.0, -1.0], 0.5)
    assert len(box) == 2
    assert box[0] == Interval(0.5, 1.5)
    assert box.entries[1] == Interval(-1.5, -0.5)
    assert box.contains([1.5, -1.0])
    assert not box.contains([1.6, -1.0])
    assert IntervalVector.box([1.0, -1.0], 0.1).issubset(box)


def test_interval_matrix_is_row_major():
    M = IntervalMatrix([[0, 1], [2, 3]], [[1, 2], [3, 4]])
    assert M.shape == (2, 2)
    assert [e.lo for e in M.entries] == [0, 1, 2, 3]
    assert M.entry(1, 0) == Interval(2, 3)
    assert M.column(1) == IntervalVector([1, 3], [2, 4])
    assert M.vec() == IntervalVector([0, 1, 2, 3], [1, 2, 3, 4])


@given(w=finite, lo=finite, width=st.floats(min_value=0, max_value=1e3))
def test_signed_term_bounds_contains_products(w, lo, width):
    x = Interval(lo, lo + width)
    bound = signed_term_bounds(w, x)
    for v in (x.lo, x.center, x.hi):
        assert bound.contains(w * v, slack=1e-9 * (1 + abs(w * v)))


@pytest.mark.parametrize("activation", list(Activation))
def test_activations_are_monotone(activation):
    xs = np.linspace(-10, 10, 401)
    ys = activation(xs)
    assert np.all(np.diff(ys) >= 0)
    y = apply_activation(activation, Interval(-1.0, 2.0))
    assert y.lo <= y.hi


@settings(deadline=None, max_examples=50)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_interval_affine_is_attained_at_corners(seed):
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(3, 4))
    b = rng.normal(size=3)
    x = IntervalVector.box(rng.normal(size=4), rng.uniform(0, 1, size=4))
    y = interval_affine(W, b, x)
    low, high = corner_inputs(W, x)
    np.testing.assert_allclose(np.einsum("ij,ij->i", W, low) + b, y.lo, atol=1e-12)
    np.testing.assert_allclose(np.einsum("ij,ij->i", W, high) + b, y.hi, atol=1e-12)

    samples = rng.uniform(x.lo, x.hi, size=(200, 4))
    outputs = samples @ W.T + b
    assert np.all(outputs >= y.lo - 1e-9)
    assert np.all(outputs <= y.hi + 1e-9)


def test_interval_affine_dimension_errors():
    x = IntervalVector.point([0.0, 1.0])
    with pytest.raises(DimensionError):
        interval_affine(np.ones((2, 3)), np.zeros(2), x)
    with pytest.raises(DimensionError):
        interval_affine(np.ones((2, 2)), np.zeros(3), x)
