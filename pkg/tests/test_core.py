import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from plreach.core import (
    EQ, LE, LT, InputError, Piece, UnsupportedActivation, absolute, activation, check_spec,
    constraint, custom, evaluate, hard_sigmoid, heaviside, identity, leaky_relu, make_spec,
    rat, relu, sign, trace,
)

from conftest import relu_pair, single

rationals = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 10**4)


class TestActivations:
    def test_relu_clamps(self):
        assert relu()(-3) == 0

    def test_sign_zero(self):
        assert sign()(0) == 0

    def test_leaky_relu(self):
        assert leaky_relu(F(1, 2))(-4) == -2

    def test_heaviside_zero(self):
        assert heaviside()(0) == 1

    def test_sign_and_abs_values(self):
        assert [sign()(v) for v in (-2, 3)] == [-1, 1]
        assert absolute()(F(-5, 3)) == F(5, 3)

    def test_hard_sigmoid_saturates(self):
        h = hard_sigmoid(F(1, 2))
        assert (h(-100), h(F(1, 4)), h(100)) == (-1, F(1, 2), 1)

    @pytest.mark.parametrize("tag,name", [
        ("relu", "relu"), ("leaky_relu(1/3)", "leaky_relu"), ("abs", "abs"), ("id", "id"),
        (" sign ", "sign"), ("hard_sigmoid(1/4)", "hard_sigmoid"),
    ])
    def test_tags(self, tag, name):
        assert activation(tag).name == name

    def test_unknown_tag(self):
        with pytest.raises(InputError):
            activation("swish")

    def test_nonlinear_tag_refuses_exact_eval(self):
        with pytest.raises(UnsupportedActivation):
            activation("sigmoid")(0)

    def test_custom_partition_checks(self):
        with pytest.raises(InputError):
            custom([Piece(None, False, F(0), True, F(0), F(0)),
                    Piece(F(0), True, None, False, F(1), F(0))])  # 0 owned twice
        with pytest.raises(InputError):
            custom([Piece(None, False, F(0), False, F(0), F(0))])  # does not reach +inf

    @pytest.mark.parametrize("act", [
        identity(), relu(), leaky_relu(F(1, 2)), heaviside(), sign(), absolute(), hard_sigmoid(F(1, 3)),
    ])
    def test_exactly_one_piece_matches(self, act):
        rng = random.Random(7)
        points = [F(rng.randint(-1000, 1000), rng.randint(1, 20)) for _ in range(10_000)]
        points += [F(0), F(1), F(-1)]  # breakpoints
        for x in points:
            assert sum(p.contains(x) for p in act.pieces) == 1


class TestEvaluate:
    def test_identity_network(self):
        assert evaluate(single("id"), [7]) == (7,)

    def test_relu_pair_is_identity(self):
        assert evaluate(relu_pair(), [-3]) == (-3,)

    def test_relu_weight_and_bias(self):
        assert evaluate(single("relu", 2, 1), [-1]) == (0,)

    @given(rationals)
    def test_relu_pair_identity_property(self, x):
        assert evaluate(relu_pair(), [x]) == (x,)

    @given(st.lists(rationals, min_size=2, max_size=2))
    def test_outputs_are_fractions(self, x):
        net = relu_pair()
        for v in x:
            out = evaluate(net, [v])
            assert all(type(o) is F for o in out)
            assert out == evaluate(net, [v])

    def test_trace_matches_evaluate(self):
        net = relu_pair()
        assert trace(net, [F(5, 2)])[-1][1] == evaluate(net, [F(5, 2)])

    def test_wrong_arity(self):
        with pytest.raises(InputError):
            evaluate(single("id"), [1, 2])

    def test_floats_rejected(self):
        with pytest.raises(InputError):
            rat(0.5)
        assert rat("3/4") == F(3, 4)


class TestSpecs:
    def test_le_boundary(self):
        assert check_spec(make_spec(1, [([1], LE, 1)]), [1])

    def test_strict_boundary(self):
        assert not check_spec(make_spec(1, [([1], LT, 1)]), [1])

    def test_equality_and_ge(self):
        spec = make_spec(2, [([1, 1], EQ, 1), ([1, 0], ">=", 0)])
        assert check_spec(spec, [F(1, 3), F(2, 3)])
        assert not check_spec(spec, [F(-1, 3), F(4, 3)])

    def test_constraint_flips_gt(self):
        c = constraint([2], ">", 1)
        assert c.cmp == LT and c.coeffs == (-2,) and c.rhs == -1

    def test_bad_comparator(self):
        with pytest.raises(InputError):
            constraint([1], "!=", 0)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            make_spec(2, [([1], LE, 0)])
