import io

import numpy as np
import pytest

from conftest import random_net
from src.api_types import DataError, DimensionError
from src.datasets import read_column_deltas, read_dataset
from src.interval_core import Activation
from src.model_file import ModelFile, ModelMeta, dumps, loads


def test_save_load_save_is_byte_stable(rng):
    net = random_net(rng, 2, 5, 2, activation=Activation.TANH)
    text = dumps(ModelFile(net, ModelMeta(method="robust", seed=3, delta=[0.01], gamma=1.0 / 3.0)))
    loaded = loads(text)
    assert dumps(loaded) == text
    assert np.array_equal(loaded.net.W1, net.W1)
    assert np.array_equal(loaded.net.W2, net.W2)
    assert loaded.net.hidden_activation is Activation.TANH
    assert loaded.meta.gamma == 1.0 / 3.0
    assert loaded.meta.delta == [0.01]


def test_elm_model_has_empty_gamma(rng):
    text = dumps(ModelFile(random_net(rng, 2, 3, 2), ModelMeta(method="elm", seed=0)))
    assert "meta_gamma=\n" in text
    assert loads(text).meta.gamma is None


def test_unknown_format_version_rejected(rng):
    text = dumps(ModelFile(random_net(rng, 2, 3, 2), ModelMeta()))
    with pytest.raises(DataError):
        loads(text.replace("format_version=1", "format_version=2"))


def test_truncated_model_rejected(rng):
    text = dumps(ModelFile(random_net(rng, 2, 3, 2), ModelMeta()))
    with pytest.raises(DataError):
        loads("\n".join(line for line in text.splitlines() if not line.startswith("b2=")))
    with pytest.raises(DataError):
        loads(text.replace("dims=2 3 2", "dims=2 4 2"))


def test_dataset_csv_errors():
    with pytest.raises(DataError):
        read_dataset(io.StringIO("a,b,c,d\n1,2,3,4\n"))
    with pytest.raises(DataError):
        read_dataset(io.StringIO("theta1,theta2,x,y\n1,2,3\n"))
    with pytest.raises(DataError):
        read_dataset(io.StringIO("theta1,theta2,x,y\n"))


def test_column_delta_file():
    np.testing.assert_array_equal(read_column_deltas(io.StringIO("0.01, 0.02\n"), 2), [0.01, 0.02])
    with pytest.raises(DimensionError):
        read_column_deltas(io.StringIO("0.01\n"), 2)
    with pytest.raises(DataError):
        read_column_deltas(io.StringIO("0.01,-1\n"), 2)
