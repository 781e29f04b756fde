"""High-precision checks of the transcendental multiplication identities and the
midpoint non-linearity witness.  Floating point lives only here; nothing in
this module feeds the exact solver."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Optional

import mpmath

DPS = 50


class DomainError(ValueError):
    pass


def _ctx():
    return mpmath.workdps(DPS)


def mpf(q) -> mpmath.mpf:
    if isinstance(q, Fraction):
        return mpmath.mpf(q.numerator) / q.denominator
    return mpmath.mpf(q)


@dataclass(frozen=True)
class NumericFn:
    tag: str
    fn: Callable = field(compare=False, repr=False)

    def __call__(self, x):
        with _ctx():
            return self.fn(mpf(x))


def _fns() -> dict:
    m = mpmath
    return {
        "exp": m.exp,
        "log": m.log,
        "arctan": m.atan,
        "arccot": lambda x: m.pi / 2 - m.atan(x),
        "cot": m.cot,
        "gaussian": lambda x: m.exp(-x * x),
        "cos": m.cos,
        "arccos": m.acos,
        "sigmoid": lambda x: 1 / (1 + m.exp(-x)),
        "tanh": m.tanh,
        "silu": lambda x: x / (1 + m.exp(-x)),
        "algebraic_sigmoid": lambda x: x / m.sqrt(1 + x * x),
        "square": lambda x: x * x,
    }


def numeric_fn(tag: str) -> NumericFn:
    fns = _fns()
    if tag not in fns:
        raise KeyError(f"unknown function {tag!r}; known: {sorted(fns)}")
    return NumericFn(tag, fns[tag])


def custom_fn(fn: Callable, tag: str = "custom") -> NumericFn:
    return NumericFn(tag, fn)


# -- identity verification --------------------------------------------------------------


@dataclass
class IdentityReport:
    tag: str
    samples: int
    max_rel_err: float
    passed: bool
    lhs: str
    rhs: str
    points: list = field(default_factory=list, repr=False)
    errors: list = field(default_factory=list, repr=False)
    notes: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "tag": self.tag,
            "samples": self.samples,
            "max_rel_err": self.max_rel_err,
            "pass": self.passed,
            "lhs": self.lhs,
            "rhs": self.rhs,
        }
        out.update(self.notes)
        return out


def _rel(a, b):
    scale = max(abs(b), mpmath.mpf(10) ** -30)
    return abs(a - b) / scale


def _arccot(x):
    return mpmath.pi / 2 - mpmath.atan(x)


def _exp_mul(x, y):
    z = x * y
    return mpmath.log(x + 1) + mpmath.log(y + 1), mpmath.log((z + 1) + x + y)


def _gaussian_pow4(x):
    f = lambda t: mpmath.exp(-t * t)  # noqa: E731
    preimage = mpmath.sqrt(-mpmath.log(x))
    return f(2 * preimage), x ** 4


def _arctan_cubic(x):
    return mpmath.cot(2 * _arccot(2 * x) - _arccot(x)), 4 * x ** 3 + 3 * x


def _cosine_quad(x):
    return (mpmath.cos(2 * mpmath.acos(x)) - 1) / 2, x * x - 1


IDENTITIES = {
    # tag: (arity, sampler, domain check, function, lhs text, rhs text)
    "exp_mul": (2, lambda r: r.uniform(1e-3, 10), lambda v: v > 0, _exp_mul,
                "log(x+1) + log(y+1)", "log((xy+1) + x + y)"),
    "gaussian_pow4": (1, lambda r: r.uniform(0.01, 0.99), lambda v: 0 < v < 1, _gaussian_pow4,
                      "f(2 f^-1(x)), f = exp(-t^2)", "x^4"),
    "arctan_cubic": (1, lambda r: r.uniform(1e-3, 10), lambda v: v > 0, _arctan_cubic,
                     "cot(2 arccot(2x) - arccot(x))", "4x^3 + 3x"),
    "cosine_quad": (1, lambda r: r.uniform(-0.99, 0.99), lambda v: -1 < v < 1, _cosine_quad,
                    "(cos(2 arccos x) - 1)/2", "x^2 - 1"),
}


def verify_identity(tag: str, samples: int = 1000, tol: float = 1e-9, seed: int = 0,
                    points: Optional[list] = None) -> IdentityReport:
    """Evaluate both sides of an identity at ``DPS`` digits on sampled points.

    For ``cosine_quad`` the right side checked is x^2 - 1, which is what the
    construction computes; the report also records the error against 2x^2 - 1.
    """
    if tag not in IDENTITIES:
        raise KeyError(f"unknown identity {tag!r}; known: {sorted(IDENTITIES)}")
    arity, sampler, in_domain, fn, lhs_text, rhs_text = IDENTITIES[tag]
    if points is None:
        rng = random.Random(seed)
        points = [tuple(sampler(rng) for _ in range(arity)) for _ in range(samples)]
    else:
        points = [tuple(p) if isinstance(p, (tuple, list)) else (p,) for p in points]
    for p in points:
        if len(p) != arity or not all(in_domain(v) for v in p):
            raise DomainError(f"{tag}: sample {p} outside the identity's domain")
    errors, claimed = [], []
    with _ctx():
        for p in points:
            lhs, rhs = fn(*(mpf(v) for v in p))
            errors.append(float(_rel(lhs, rhs)))
            if tag == "cosine_quad":
                x = mpf(p[0])
                claimed.append(float(_rel(lhs, 2 * x * x - 1)))
    worst = max(errors) if errors else 0.0
    report = IdentityReport(tag, len(points), worst, worst <= tol, lhs_text, rhs_text,
                            points=[p[0] for p in points], errors=errors)
    if tag == "cosine_quad":
        report.notes = {
            "claimed_rhs": "2x^2 - 1",
            "claimed_max_rel_err": max(claimed) if claimed else 0.0,
            "actual_rhs": "x^2 - 1",
        }
    return report


# -- non-linearity witness ------------------------------------------------------------------


@dataclass(frozen=True)
class MidpointWitness:
    c: Fraction
    d: Fraction
    gap: float


def midpoint_witness(f: NumericFn, a, b, depth: int = 8) -> Optional[MidpointWitness]:
    """First dyadic pair c < d in [a, b] with f((c+d)/2) != (f(c)+f(d))/2.

    Levels are scanned breadth-first; within a level, wider pairs come first,
    then smaller left endpoints.  None means every scanned pair looked affine.
    """
    a, b = Fraction(a), Fraction(b)
    if not a < b:
        raise ValueError("need a < b")
    cache = {}

    def val(q):
        if q not in cache:
            cache[q] = f(q)
        return cache[q]

    seen = set()
    with _ctx():
        eps = mpmath.mpf(2) ** (-mpmath.mp.prec)
        for level in range(depth + 1):
            grid = [a + (b - a) * Fraction(i, 2 ** level) for i in range(2 ** level + 1)]
            pairs = [(c, d) for c, d in combinations(grid, 2) if (c, d) not in seen]
            pairs.sort(key=lambda cd: (cd[0] - cd[1], cd[0]))
            for c, d in pairs:
                seen.add((c, d))
                fc, fd, fm = val(c), val(d), val((c + d) / 2)
                gap = abs(fm - (fc + fd) / 2)
                floor = eps * max(1, abs(fc), abs(fd), abs(fm))
                if gap > 10 * floor:
                    return MidpointWitness(c, d, float(gap))
    return None


def build_fbar(f: NumericFn, c, d) -> NumericFn:
    """fbar(x) = fhat(x) + fhat(1-x) - fhat(0) - fhat(1), fhat(t) = f(c + (d-c) t)."""
    c, d = Fraction(c), Fraction(d)
    if c == d:
        raise ValueError("c and d must differ")
    width = d - c

    def fhat(t):
        return f.fn(mpf(c) + mpf(width) * t)

    def fbar(x):
        return fhat(x) + fhat(1 - x) - fhat(mpmath.mpf(0)) - fhat(mpmath.mpf(1))

    return NumericFn(f"fbar[{f.tag}; {c}, {d}]", fbar)
