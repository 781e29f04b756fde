import pytest

from plreach import formats
from plreach.core import InputError
from plreach.generate import GenConfig, generate, oracle_config
from plreach.solver import Outcome, solve_reach, solve_reach_exhaustive


def test_same_seed_same_bytes():
    for seed in (0, 1, 2**40 + 7):
        cfg = GenConfig(seed=seed, planted=True)
        assert formats.serialize_any("nnr", generate(cfg)) == formats.serialize_any("nnr", generate(cfg))


def test_seeds_differ():
    assert generate(GenConfig(seed=1)) != generate(GenConfig(seed=2))


def test_planted_is_sat():
    for seed in range(40):
        inst = generate(GenConfig(seed=seed, planted=True, comparators=("<=", "<", "=")))
        assert solve_reach(inst).status is Outcome.SAT


def test_default_eight_relu_matches_oracle():
    for seed in range(10):
        inst = generate(GenConfig(seed=seed))
        assert inst.network.num_nodes - inst.network.output_dim == 8
        assert solve_reach(inst).status == solve_reach_exhaustive(inst).status


def test_shape_and_bounds():
    cfg = GenConfig(seed=4, input_dim=3, depth=3, width=2, output_dim=2, max_numerator=2,
                    max_denominator=2, input_constraints=4, output_constraints=3)
    inst = generate(cfg)
    assert [layer.width for layer in inst.network.layers] == [2, 2, 2, 2]
    assert len(inst.input_spec) == 4 and len(inst.output_spec) == 3
    for layer in inst.network.layers:
        for w in [x for row in layer.weights for x in row] + list(layer.bias):
            assert abs(w.numerator) <= 2 and w.denominator <= 2


def test_oracle_config_limits():
    for seed in range(200):
        inst = generate(oracle_config(seed))
        assert inst.network.input_dim <= 3 and inst.network.num_nodes <= 8


@pytest.mark.parametrize("kw", [{"depth": 0}, {"width": 0}, {"input_dim": 0}, {"max_denominator": 0},
                                {"activation_set": ()}, {"comparators": (">",)},
                                {"input_constraints": -1}])
def test_config_validation(kw):
    with pytest.raises(InputError):
        GenConfig(**kw)
