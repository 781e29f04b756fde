import random
from fractions import Fraction as F

import pytest

from plreach.core import EQ, LE, LT, ReachInstance, make_layer, make_network, make_spec
from plreach.generate import GenConfig, generate


def single(act, w=1, b=0):
    """One input, one node."""
    return make_network(1, [([[w]], [b], [act])])


def relu_pair():
    """relu(x) - relu(-x), which is x."""
    return make_network(1, [([[1], [-1]], [0, 0], ["relu", "relu"]), ([[1, -1]], [0], ["id"])])


def reach(net, in_rows=(), out_rows=()):
    return ReachInstance(net, make_spec(net.input_dim, in_rows), make_spec(net.output_dim, out_rows))


def small_instance(seed, comparators=(LE, EQ), activations=("relu", "id"), planted=None):
    rng = random.Random(seed)
    return generate(GenConfig(
        seed=seed, input_dim=rng.randint(1, 2), depth=1, width=rng.randint(1, 2),
        activation_set=activations, input_constraints=rng.randint(0, 2),
        output_constraints=rng.randint(1, 2), comparators=comparators,
        planted=rng.random() < 0.4 if planted is None else planted,
    ))


def random_rationals(rng, n, num=20, den=9):
    return [F(rng.randint(-num, num), rng.randint(1, den)) for _ in range(n)]


@pytest.fixture
def rng():
    return random.Random(1234)


__all__ = ["single", "relu_pair", "reach", "small_instance", "random_rationals", "LE", "LT", "EQ",
           "make_layer"]
