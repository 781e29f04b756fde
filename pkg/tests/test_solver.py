import itertools
import random
from fractions import Fraction as F

import pytest

from plreach.core import (
    EQ, LE, LT, UnsupportedActivation, accepts, check_spec, evaluate, make_network,
)
from plreach.generate import GenConfig, generate, oracle_config
from plreach.lp import feasible
from plreach.solver import (
    Outcome, PhaseEncoding, negate, negated_queries, phase_lp, solve_ne, solve_reach,
    solve_reach_exhaustive, solve_vip,
)

from conftest import random_rationals, reach, relu_pair, single


class TestReach:
    def test_relu_cannot_reach_one(self):
        inst = reach(single("relu"), [([1], LE, -1)], [([-1], LE, -1)])
        assert solve_reach(inst).status is Outcome.UNSAT

    def test_relu_reaches_zero(self):
        inst = reach(single("relu"), [([1], LE, -1)], [([1], LE, 0)])
        v = solve_reach(inst)
        assert v.status is Outcome.SAT and v.witness[0] <= -1 and accepts(inst, v.witness)

    def test_strict_output(self):
        inst = reach(single("heaviside"), [], [([1], LT, 1)])
        v = solve_reach(inst)
        assert v.status is Outcome.SAT and v.witness[0] < 0

    def test_pure_id_uses_one_lp(self):
        net = make_network(2, [([[1, 2], [3, -1]], [0, 1], ["id", "id"]), ([[1, 1]], [F(1, 2)], ["id"])])
        for out in ([([1], LE, 0)], [([1], EQ, 100)], [([1], LT, 0), ([-1], LT, 0)]):
            v = solve_reach(reach(net, [], out))
            assert v.stats.lp_calls == 1

    def test_unsupported_activation(self):
        with pytest.raises(UnsupportedActivation):
            solve_reach(reach(single("sigmoid"), [], [([1], LE, 0)]))

    def test_budget(self):
        inst = generate(GenConfig(seed=4, input_dim=2, depth=2, width=4))
        assert solve_reach(inst, budget=0).status is Outcome.EXHAUSTED

    @pytest.mark.parametrize("seed", range(40))
    def test_random_221_nets_match_exhaustive(self, seed):
        inst = generate(GenConfig(seed=seed, input_dim=2, depth=1, width=2, input_constraints=2,
                                  output_constraints=1, comparators=(LE, LT, EQ)))
        assert solve_reach(inst).status == solve_reach_exhaustive(inst).status

    def test_mixed_oracle_suite(self):
        for seed in range(60):
            inst = generate(oracle_config(seed))
            v, o = solve_reach(inst), solve_reach_exhaustive(inst)
            assert v.status == o.status
            if v.status is Outcome.SAT:
                assert accepts(inst, v.witness) and accepts(inst, o.witness)

    def test_threads_agree(self):
        for seed in range(20):
            inst = generate(oracle_config(seed))
            assert solve_reach(inst, threads=3).status == solve_reach(inst).status

    def test_pruning_is_sound(self):
        # an infeasible partial assignment has no Sat completion
        for seed in range(25):
            inst = generate(oracle_config(seed))
            enc = PhaseEncoding(inst)
            counts = enc.piece_counts()
            if not enc.order:
                continue
            first = enc.order[0]
            for k in range(counts[0]):
                if feasible(phase_lp(inst, {first: k})).feasible:
                    continue
                rest = [range(c) for c in counts[1:]]
                for tail in itertools.product(*rest):
                    full = dict(zip(enc.order, (k,) + tail))
                    assert not feasible(enc.problem(full)).feasible


class TestVip:
    unit = [([-1], LE, 0), ([1], LE, 1)]

    def test_holds(self):
        v = solve_vip(reach(single("id"), self.unit, [([-1], LT, 1), ([1], LT, 2)]))
        assert v.status is Outcome.HOLDS

    def test_violated_at_boundary(self):
        inst = reach(single("id"), self.unit, [([1], LT, 1)])
        v = solve_vip(inst)
        assert v.status is Outcome.VIOLATED and v.witness == (1,)

    def test_relu_image_is_zero(self):
        inst = reach(single("relu"), [([1], LE, 0)], [([-1], LT, 1), ([1], LT, 1)])
        assert solve_vip(inst).status is Outcome.HOLDS

    def test_empty_output_spec_holds(self):
        assert solve_vip(reach(single("relu"))).status is Outcome.HOLDS

    def test_negation(self):
        c = negate(reach(single("id"), [], [([1], EQ, 2)]).output_spec.constraints[0])
        assert [r.cmp for r in c] == [LT, LT]

    def test_sampling_falsifier(self):
        rng = random.Random(8)
        for seed in range(40):
            inst = generate(GenConfig(seed=seed, input_dim=1, depth=1, width=2,
                                      activation_set=("relu", "abs", "sign"),
                                      input_constraints=2, output_constraints=2))
            verdict = solve_vip(inst)
            if verdict.status is Outcome.VIOLATED:
                x = verdict.witness
                assert check_spec(inst.input_spec, x)
                assert not check_spec(inst.output_spec, evaluate(inst.network, x))
            for x in random_rationals(rng, 200):
                if check_spec(inst.input_spec, [x]) and not check_spec(
                        inst.output_spec, evaluate(inst.network, [x])):
                    assert verdict.status is Outcome.VIOLATED
                    break

    def test_duality(self):
        for seed in range(20):
            inst = generate(oracle_config(seed))
            holds = solve_vip(inst).status is Outcome.HOLDS
            assert holds == all(solve_reach(q).status is Outcome.UNSAT for q in negated_queries(inst))


class TestNe:
    def test_relu_pair_equivalent_to_id(self):
        assert solve_ne(single("id"), relu_pair()).status is Outcome.EQUIVALENT

    def test_relu_vs_id(self):
        v = solve_ne(single("relu"), single("id"))
        assert v.status is Outcome.DISTINCT and v.witness[0] < 0

    def test_reflexive(self):
        for seed in range(10):
            net = generate(GenConfig(seed=seed, activation_set=("relu", "abs", "sign"))).network
            assert solve_ne(net, net).status is Outcome.EQUIVALENT

    def test_distinguisher_distinguishes(self):
        for seed in range(10):
            n1 = generate(GenConfig(seed=seed, input_dim=2, depth=1, width=2)).network
            n2 = generate(GenConfig(seed=seed + 50, input_dim=2, depth=1, width=2)).network
            v = solve_ne(n1, n2)
            if v.status is Outcome.DISTINCT:
                assert evaluate(n1, v.witness) != evaluate(n2, v.witness)
