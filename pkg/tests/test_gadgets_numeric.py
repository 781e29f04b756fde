from fractions import Fraction as F

import mpmath
import pytest

from plreach.gadgets.numeric import (
    DPS, DomainError, build_fbar, custom_fn, midpoint_witness, numeric_fn, verify_identity,
)

# tanh-family functions that are non-linear on an interval
FAMILY = ["square", "sigmoid", "tanh", "silu", "algebraic_sigmoid"]


class TestIdentities:
    def test_exp_mul_at_one(self):
        r = verify_identity("exp_mul", points=[(1, 1)])
        assert r.max_rel_err < 1e-45

    def test_arctan_cubic_at_one(self):
        with mpmath.workdps(DPS):
            lhs = mpmath.cot(2 * (mpmath.pi / 2 - mpmath.atan(2)) - mpmath.pi / 4)
            assert abs(lhs - 7) < mpmath.mpf(10) ** -45
        assert verify_identity("arctan_cubic", points=[1]).max_rel_err < 1e-45

    def test_gaussian_at_inverse_e(self):
        with mpmath.workdps(DPS):
            x = mpmath.exp(-1)
            assert abs(mpmath.exp(-4) - x ** 4) < mpmath.mpf(10) ** -45
        assert verify_identity("gaussian_pow4", points=[float(mpmath.exp(-1))]).passed

    @pytest.mark.parametrize("tag", ["exp_mul", "gaussian_pow4", "arctan_cubic"])
    def test_sampled(self, tag):
        r = verify_identity(tag, samples=200)
        assert r.passed and r.max_rel_err <= 1e-9 and r.samples == 200

    def test_cosine_reports_corrected_side(self):
        r = verify_identity("cosine_quad", samples=200)
        assert r.passed and r.rhs == "x^2 - 1"
        assert r.notes["claimed_rhs"] == "2x^2 - 1" and r.notes["claimed_max_rel_err"] > 1e-3

    def test_domain_checked(self):
        with pytest.raises(DomainError):
            verify_identity("gaussian_pow4", points=[2])

    def test_unknown_tag(self):
        with pytest.raises(KeyError):
            verify_identity("nope")

    def test_report_dict(self):
        d = verify_identity("arctan_cubic", samples=5).as_dict()
        assert set(d) >= {"tag", "samples", "max_rel_err", "pass"}

    def test_seeded(self):
        a = verify_identity("exp_mul", samples=20, seed=3)
        b = verify_identity("exp_mul", samples=20, seed=3)
        assert a.points == b.points and a.errors == b.errors


class TestMidpoint:
    def test_square(self):
        w = midpoint_witness(numeric_fn("square"), 0, 1)
        assert (w.c, w.d) == (0, 1) and abs(w.gap - 0.25) < 1e-15

    def test_sigmoid(self):
        w = midpoint_witness(numeric_fn("sigmoid"), 0, 4)
        assert w is not None and w.gap > 0.01

    def test_affine_has_none(self):
        f = custom_fn(lambda x: 2 * x + 3, "affine")
        for depth in range(5):
            assert midpoint_witness(f, 0, 1, depth=depth) is None

    def test_needs_interval(self):
        with pytest.raises(ValueError):
            midpoint_witness(numeric_fn("square"), 1, 1)

    def test_rational_endpoints(self):
        w = midpoint_witness(numeric_fn("tanh"), F(-1, 3), F(5, 2))
        assert isinstance(w.c, F) and F(-1, 3) <= w.c < w.d <= F(5, 2)


class TestFbar:
    def test_square_closed_form(self):
        fbar = build_fbar(numeric_fn("square"), 0, 1)
        for x in (F(0), F(1, 3), F(1, 2), F(3, 4)):
            assert abs(fbar(x) - (mpmath.mpf(x.numerator) / x.denominator) ** 2
                       - (1 - mpmath.mpf(x.numerator) / x.denominator) ** 2 + 1) < 1e-45
        assert abs(fbar(F(1, 2)) + mpmath.mpf(1) / 2) < 1e-45

    @pytest.mark.parametrize("tag", FAMILY + ["exp", "arctan", "gaussian"])
    def test_endpoints_vanish(self, tag):
        f = numeric_fn(tag)
        fbar = build_fbar(f, F(1, 4), F(7, 2))
        eps = mpmath.mpf(10) ** (-DPS + 5)
        assert abs(fbar(0)) < eps and abs(fbar(1)) < eps

    @pytest.mark.parametrize("tag", FAMILY)
    def test_midpoint_bounded_by_gap(self, tag):
        f = numeric_fn(tag)
        w = midpoint_witness(f, 0, 4)
        mid = abs(build_fbar(f, w.c, w.d)(F(1, 2)))
        assert abs(float(mid) - 2 * w.gap) < 1e-12 and mid > 1e-3

    def test_equal_endpoints(self):
        with pytest.raises(ValueError):
            build_fbar(numeric_fn("square"), 1, 1)
