"""Acceptance suite: one check per criterion, one PASS/FAIL line each.

Run under pytest, or directly with ``python tests/test_acceptance.py``.
"""

import math
import random
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import pytest
import sympy

sys.path.insert(0, str(Path(__file__).parent))

from plreach import reductions as R  # noqa: E402
from plreach.core import EQ, LE, LT, accepts, check_spec, evaluate, make_network  # noqa: E402
from plreach.csp import CspBuilder, check_assignment, propagate  # noqa: E402
from plreach.gadgets.encodings import encode_integer  # noqa: E402
from plreach.gadgets.interpret import (  # noqa: E402
    interpret_positive, interpret_unit_interval, numeric_search,
)
from plreach.gadgets.numeric import DPS, build_fbar, midpoint_witness, numeric_fn, verify_identity  # noqa: E402
from plreach.gadgets.polynomial import X_SQUARED, Polynomial, poly_to_square  # noqa: E402
from plreach.generate import GenConfig, generate, oracle_config  # noqa: E402
from plreach.solver import Outcome, solve_ne, solve_reach, solve_reach_exhaustive, solve_vip  # noqa: E402

from conftest import random_rationals, small_instance  # noqa: E402
from csp_suite import instances as csp_instances  # noqa: E402

O = Outcome


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# -- 1, 2: solver ---------------------------------------------------------------------------------


def oracle_equivalence():
    def run():
        bad = []
        for seed in range(200):
            inst = generate(oracle_config(seed))
            if solve_reach(inst).status != solve_reach_exhaustive(inst).status:
                bad.append(seed)
        return bad

    bad, secs = _timed(run)
    return not bad and secs < 60, f"200 instances, {len(bad)} mismatches, {secs:.1f}s (limit 60s)"


def _other_net(seed, dim):
    return generate(GenConfig(seed=seed + 500, input_dim=dim, depth=1, width=2,
                              activation_set=("relu", "id", "abs"))).network


def witness_validity():
    checked = failed = 0
    for seed in range(200):
        inst = generate(oracle_config(seed))
        for v in (solve_reach(inst), solve_reach_exhaustive(inst)):
            if v.status is O.SAT:
                checked += 1
                failed += not accepts(inst, v.witness)
        v = solve_vip(inst)
        if v.status is O.VIOLATED:
            checked += 1
            x = v.witness
            failed += not (check_spec(inst.input_spec, x)
                           and not check_spec(inst.output_spec, evaluate(inst.network, x)))
        n2 = _other_net(seed, inst.network.input_dim)
        v = solve_ne(inst.network, n2)
        if v.status is O.DISTINCT:
            checked += 1
            failed += evaluate(inst.network, v.witness) == evaluate(n2, v.witness)
    return checked > 0 and failed == 0, f"{checked} witnesses re-verified, {failed} invalid"


# -- 3: eliminate_id -------------------------------------------------------------------------------


def _id_relu_net(rng):
    depth = rng.randint(1, 3)
    dims = [rng.randint(1, 3)] + [rng.randint(1, 4) for _ in range(depth)] + [rng.randint(1, 2)]
    layers = []
    for ell, (a, b) in enumerate(zip(dims, dims[1:])):
        last = ell == len(dims) - 2
        acts = ["relu" if last else rng.choice(["id", "relu"]) for _ in range(b)]
        layers.append(([random_rationals(rng, a, 6, 4) for _ in range(b)], random_rationals(rng, b, 6, 4), acts))
    return make_network(dims[0], layers)


def eliminate_id_exact():
    rng = random.Random(3)
    mismatches = over = 0
    for _ in range(100):
        net = _id_relu_net(rng)
        out = R.eliminate_id(net)
        over += out.num_nodes > 2 * net.num_nodes or out.num_edges > 4 * net.num_edges
        over += not out.activation_names() <= {"relu"}
        for _ in range(100):
            x = random_rationals(rng, net.input_dim)
            mismatches += evaluate(out, x) != evaluate(net, x)
    return mismatches == 0 and over == 0, f"100 nets x 100 inputs, {mismatches} mismatches, {over} bound violations"


# -- 4: reduction polarity ------------------------------------------------------------------------


def _pair(seed):
    n1 = small_instance(seed).network
    rng = random.Random(seed + 99)
    if rng.random() < 0.5 and "id" not in [a.name for a in n1.layers[-1].activations]:
        return n1, R.eliminate_id(n1)
    return n1, generate(GenConfig(seed=seed + 7, input_dim=n1.input_dim, depth=1, width=2)).network


def _polarity_checks():
    strict = (LE, LT, EQ)

    def roundtrip(s):
        i = small_instance(s)
        return solve_reach(i).status == solve_reach(R.csp_to_nnr(R.nnr_to_csp(i))).status

    def ne_to_connr(s):
        n1, n2 = _pair(s)
        return (solve_ne(n1, n2).status is O.DISTINCT) == (solve_reach(R.ne_to_connr(n1, n2)).status is O.SAT)

    def cone(s):
        i = small_instance(s, strict)
        return (solve_reach(i).status is O.SAT) == (solve_ne(*R.nnr_to_cone(i)).status is O.DISTINCT)

    def vip_to_connr(s):
        i = small_instance(s, strict)
        qs = R.vip_to_connr(i)
        return (solve_vip(i).status is O.HOLDS) == all(solve_reach(q).status is O.UNSAT for q in qs)

    def covip(variant, comps):
        def check(s):
            i = small_instance(s, comps)
            return (solve_reach(i).status is O.SAT) == (
                solve_vip(R.nnr_to_covip(i, variant)).status is O.VIOLATED)
        return check

    def ne_to_vip(s):
        n1, n2 = _pair(s)
        return (solve_ne(n1, n2).status is O.EQUIVALENT) == (solve_vip(R.ne_to_vip(n1, n2)).status is O.HOLDS)

    def vip_to_ne(s):
        i = small_instance(s, strict)
        return (solve_vip(i).status is O.HOLDS) == (solve_ne(*R.vip_to_ne(i)).status is O.EQUIVALENT)

    return [("csp round trip", roundtrip), ("ne_to_connr", ne_to_connr), ("nnr_to_cone", cone),
            ("vip_to_connr", vip_to_connr), ("nnr_to_covip/heaviside", covip("heaviside", strict)),
            ("nnr_to_covip/relu", covip("relu", (LE, EQ))), ("ne_to_vip", ne_to_vip),
            ("vip_to_ne", vip_to_ne)]


def reduction_polarity():
    def run():
        return {name: sum(not check(s) for s in range(100)) for name, check in _polarity_checks()}

    bad, secs = _timed(run)
    failing = {k: v for k, v in bad.items() if v}
    ok = not failing and secs < 300
    return ok, f"{len(bad)} checks x 100 instances, failures {failing or 'none'}, {secs:.1f}s (limit 300s)"


# -- 5: pure-id fast path ---------------------------------------------------------------------------


def pure_id_one_lp():
    calls = set()
    for seed in range(50):
        rng = random.Random(seed)
        inst = generate(GenConfig(seed=seed, input_dim=rng.randint(1, 3), depth=rng.randint(1, 3),
                                  activation_set=("id",), comparators=(LE, LT, EQ),
                                  planted=rng.random() < 0.5))
        calls.add(solve_reach(inst).stats.lp_calls)
    return calls == {1}, f"50 pure-id instances, LP calls seen {sorted(calls)}"


# -- 6, 7: exact gadgets ----------------------------------------------------------------------------


def integer_encoding():
    rng = random.Random(6)
    ns = [rng.randint(1, 10**6) for _ in range(1000)]
    bad = 0
    for n in ns:
        b = CspBuilder(1)
        b.add(*encode_integer(n, 0, b.fresh))
        csp = b.build()
        full = propagate(csp, {})
        bad += (len(csp.constraints) > 2 * int(math.log2(n)) + 2
                or full is None or full[0] != n or not check_assignment(csp, [full[i] for i in range(csp.num_vars)]))
    return bad == 0, f"1000 sampled n <= 10^6, {bad} failures"


def _sympy_total(combo, p):
    x = sympy.Symbol("x")

    def sym(q):
        return sympy.Rational(q.numerator, q.denominator)

    ps = sum(sym(c) * x ** k for k, c in enumerate(p.coeffs))
    total = sum(sym(c) * x ** k for k, c in enumerate(combo.correction.coeffs))
    for shift, scale in combo.terms:
        total += sym(F(scale)) * ps.subs(x, x + sym(F(shift)))
    return sympy.expand(total - x ** 2)


def poly_square():
    rng = random.Random(7)
    bad = 0
    for _ in range(50):
        deg = rng.randint(2, 5)
        p = Polynomial(tuple(F(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(deg)) + (F(1),))
        combo = poly_to_square(p)
        bad += combo.expand(p) != X_SQUARED or _sympy_total(combo, p) != 0
    return bad == 0, f"50 monic polynomials of degree 2-5, {bad} not expanding to x^2"


# -- 8: identities ------------------------------------------------------------------------------------


def identities():
    parts, ok = [], True
    for tag in ("exp_mul", "gaussian_pow4", "arctan_cubic"):
        r = verify_identity(tag, samples=1000, tol=1e-9)
        ok &= r.passed and r.samples == 1000
        parts.append(f"{tag} {r.max_rel_err:.1e}")
    r = verify_identity("cosine_quad", samples=1000, tol=1e-9)
    ok &= r.passed and r.rhs == "x^2 - 1"
    parts.append(f"cosine_quad rhs={r.rhs} {r.max_rel_err:.1e}")
    return ok, ", ".join(parts)


# -- 9: interpretations ---------------------------------------------------------------------------------


def interpretations():
    wrong = []
    for name, csp, sat, full in csp_instances():
        pi = interpret_positive(csp)
        ui = interpret_unit_interval(pi.csp, 2)
        if full is not None:
            enc = pi.encode(full)
            pos = enc is not None and check_assignment(pi.csp, enc) and pi.decode(enc) == full
            unit = pos and ui.system.holds(ui.encode(enc))
        else:
            pos = numeric_search(pi.csp).found
            unit = ui.search().found
            if not sat:
                assert not numeric_search(csp).found, name
        if (pos, unit) != (sat, sat):
            wrong.append(name)
    return not wrong, f"20 instances through both interpretations, wrong: {wrong or 'none'}"


# -- 10: midpoint witnesses ------------------------------------------------------------------------------


FAMILY = ("square", "sigmoid", "tanh", "silu", "algebraic_sigmoid")


def midpoint_fbar():
    import mpmath

    parts, ok = [], True
    eps = mpmath.mpf(10) ** (-DPS + 5)
    for tag in FAMILY:
        f = numeric_fn(tag)
        w = midpoint_witness(f, 0, 4)
        if w is None:
            ok = False
            parts.append(f"{tag} none")
            continue
        fbar = build_fbar(f, w.c, w.d)
        mid = abs(fbar(F(1, 2)))
        ok &= abs(fbar(0)) < eps and abs(fbar(1)) < eps and mid > 1e-3
        parts.append(f"{tag} |fbar(1/2)|={float(mid):.3g}")
    return ok, ", ".join(parts)


# -- 11: performance --------------------------------------------------------------------------------------


def performance():
    inst = generate(GenConfig(seed=11, input_dim=3, depth=2, width=9, output_dim=2, planted=True))
    assert inst.network.num_nodes == 20 and inst.network.activation_names() == {"relu"}
    v1, secs = _timed(lambda: solve_reach(inst, threads=1))
    v4 = solve_reach(inst, threads=4)
    ok = v1.status is O.SAT and v4.status is v1.status and secs < 10
    return ok, f"20-ReLU planted: {v1.status.value} in {secs:.3f}s (limit 10s), 4 threads: {v4.status.value}"


CRITERIA = [
    (1, "oracle equivalence", oracle_equivalence),
    (2, "witness validity", witness_validity),
    (3, "eliminate_id exactness and bounds", eliminate_id_exact),
    (4, "reduction polarity", reduction_polarity),
    (5, "pure-id fast path", pure_id_one_lp),
    (6, "encode_integer", integer_encoding),
    (7, "poly_to_square", poly_square),
    (8, "identity verification", identities),
    (9, "interpretations", interpretations),
    (10, "midpoint witness and fbar", midpoint_fbar),
    (11, "performance sanity", performance),
]


def _line(num, title, ok, detail):
    return f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"


@pytest.mark.parametrize("num,title,check", CRITERIA, ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(num, title, check, request):
    ok, detail = check()
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    line = _line(num, title, ok, detail)
    if reporter is not None:
        reporter.write_line("")
        reporter.write_line(line)
    else:
        print(line)
    assert ok, line


if __name__ == "__main__":
    failures = 0
    for num, title, check in CRITERIA:
        ok, detail = check()
        failures += not ok
        print(_line(num, title, ok, detail), flush=True)
    sys.exit(1 if failures else 0)
