'''Common fixtures and instance builders for the test files'''

import numpy as np
import pytest

from src.elm import ElmConfig, init_random, make_generator
from src.interval_core import Activation
from src.reach import ShallowNet, UncertainDataset
from src.robotarm import ArmGeometry, Zone, sample_dataset


def random_net(rng, n0, n1, n2, activation=Activation.SIGMOID, output=Activation.IDENTITY):
    return ShallowNet(
        W1=rng.uniform(-2, 2, size=(n1, n0)),
        b1=rng.uniform(-1, 1, size=n1),
        W2=rng.uniform(-2, 2, size=(n2, n1)),
        b2=rng.uniform(-1, 1, size=n2),
        hidden_activation=activation,
        output_activation=output,
    )


def tiny_instance(seed, N=2, n0=1, n1=2, n2=1, delta=0.1):
    '''Random ELM-initialized net and an uncertain dataset with m = N*n1 deviations'''
    rng = make_generator(1000 + seed)
    U = rng.uniform(-1, 1, size=(N, n0))
    Y = rng.uniform(-1, 1, size=(N, n2))
    net = init_random(ElmConfig(n_hidden=n1, seed=seed), n0, n2)
    return net, UncertainDataset.uniform(U, Y, delta)


@pytest.fixture
def rng():
    return make_generator(12345)


@pytest.fixture
def arm_data():
    return sample_dataset(ArmGeometry(), Zone.NORMAL, 30, 3)
