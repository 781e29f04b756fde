import random
from fractions import Fraction as F

import numpy as np
import pytest
from scipy.optimize import linprog

from plreach.core import EQ, LE, LT, LinearConstraint, LinearSpec, check_spec, make_spec
from plreach.lp import Status, feasible, feasible_batch, fm_feasible


def random_problem(rng, nvars, nrows, comparators=(LE, LT, EQ), span=4):
    rows = []
    for _ in range(nrows):
        coeffs = tuple(F(rng.randint(-span, span)) for _ in range(nvars))
        rows.append(LinearConstraint(coeffs, rng.choice(comparators), F(rng.randint(-span, span))))
    return LinearSpec(nvars, tuple(rows))


def relax(p):
    return LinearSpec(p.num_vars, tuple(
        LinearConstraint(c.coeffs, LE if c.cmp == LT else c.cmp, c.rhs) for c in p.constraints
    ))


class TestExamples:
    def test_contradictory_bounds(self):
        assert feasible(make_spec(1, [([1], LE, 1), ([-1], LE, -2)])).status is Status.INFEASIBLE

    def test_strict_negative(self):
        v = feasible(make_spec(1, [([1], LT, 0)]))
        assert v.feasible and v.witness[0] < 0

    def test_mixed_system(self):
        p = make_spec(2, [([2, 3], EQ, 5), ([-1, 0], LE, 0), ([0, -1], LE, 0), ([1, 0], LT, 1)])
        v = feasible(p)
        assert v.feasible and check_spec(p, v.witness)

    def test_open_gap_is_infeasible(self):
        assert not feasible(make_spec(1, [([1], LT, 0), ([-1], LT, 0)])).feasible

    def test_touching_closed_is_feasible(self):
        v = feasible(make_spec(1, [([1], LE, 0), ([-1], LE, 0)]))
        assert v.witness == (0,)

    def test_empty_problem(self):
        assert feasible(LinearSpec(3, ())).witness == (0, 0, 0)

    def test_zero_row(self):
        assert not feasible(make_spec(2, [([0, 0], LT, 0)])).feasible
        assert not feasible(make_spec(2, [([0, 0], EQ, 1)])).feasible
        assert feasible(make_spec(2, [([0, 0], LE, 0)])).feasible


class TestBatch:
    def test_statuses(self):
        out = feasible_batch([make_spec(1, [([1], LE, 0)]), make_spec(1, [([1], LT, 0), ([-1], LT, 0)])])
        assert [v.status for v in out] == [Status.FEASIBLE, Status.INFEASIBLE]

    def test_empty(self):
        assert feasible_batch([]) == []

    def test_copies_agree(self):
        p = make_spec(2, [([1, 1], LT, 3), ([1, -1], EQ, F(1, 2))])
        out = feasible_batch([p] * 3, threads=3)
        assert len({v for v in out}) == 1 and out[0].feasible


def test_deterministic_witnesses():
    rng = random.Random(5)
    for _ in range(50):
        p = random_problem(rng, 3, 4)
        assert feasible(p) == feasible(p)


def test_against_fourier_motzkin():
    rng = random.Random(11)
    for _ in range(600):
        p = random_problem(rng, rng.randint(1, 3), rng.randint(1, 6))
        v = feasible(p)
        assert v.feasible == fm_feasible(p)
        if v.feasible:
            assert check_spec(p, v.witness)


def test_strictness_monotone():
    rng = random.Random(3)
    for _ in range(300):
        p = random_problem(rng, rng.randint(1, 4), rng.randint(1, 7))
        if not feasible(relax(p)).feasible:
            assert not feasible(p).feasible


def _scipy_feasible(p):
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for c in p.constraints:
        row = [float(a) for a in c.coeffs]
        if c.cmp == EQ:
            a_eq.append(row)
            b_eq.append(float(c.rhs))
        else:
            a_ub.append(row)
            b_ub.append(float(c.rhs))
    res = linprog(np.zeros(p.num_vars),
                  A_ub=np.array(a_ub) if a_ub else None, b_ub=b_ub or None,
                  A_eq=np.array(a_eq) if a_eq else None, b_eq=b_eq or None,
                  bounds=[(None, None)] * p.num_vars, method="highs")
    assert res.status in (0, 2)
    return res.status == 0


@pytest.mark.parametrize("seed", range(4))
def test_against_reference_lp(seed):
    rng = random.Random(100 + seed)
    for _ in range(25):
        p = random_problem(rng, rng.randint(1, 6), rng.randint(1, 10), comparators=(LE, EQ))
        v = feasible(p)
        assert v.feasible == _scipy_feasible(p)
        if v.feasible:
            assert check_spec(p, v.witness)
