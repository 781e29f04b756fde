"""Interpretations of real CSPs with multiplication inside the non-negative
reals and inside (0, 1/n], plus a seeded numeric search used as the
satisfiability oracle for instances that exact solving cannot handle."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from ..core import InputError
from ..csp import NONNEG, CspBuilder, CspInstance, FnGraph, Leq, Mul, One, Plus, propagate


@dataclass(frozen=True)
class Interpretation:
    dimension: int
    domain_formula: str
    defining_formulas: dict
    coordinate_map: str

    def __post_init__(self):
        if self.dimension < 1:
            raise InputError("dimension must be at least 1")


POSITIVE = Interpretation(
    dimension=2,
    domain_formula="a*b = 0",
    defining_formulas={
        "One": "a = 1",
        "Plus": "exists e: a+c-e = e' and b+d-e = f'",
        "Mul": "exists e: ac+bd-e = e' and ad+bc-e = f'",
        "Leq": "a + d <= c + b",
    },
    coordinate_map="h(a, b) = a - b",
)

UNIT_INTERVAL = Interpretation(
    dimension=1,
    domain_formula="0 < y <= 1/n",
    defining_formulas={
        "One": "(n+1) y = 1",
        "Plus": "y_v y_w + y_u y_w = y_u y_v + n y_u y_v y_w",
        "Mul": "y_w (1 - n y_u)(1 - n y_v) = y_u y_v (1 - n y_w)",
        "Leq": "y_v <= y_u",
    },
    coordinate_map="h(y) = 1/y - n",
)


def _check_relations(csp: CspInstance) -> None:
    for c in csp.constraints:
        if isinstance(c, FnGraph):
            raise InputError("interpretations take Plus/One/Mul/Leq instances only")


# -- 2-dimensional interpretation in the non-negative reals ----------------------------


@dataclass(frozen=True)
class PositiveInterpretation:
    source: CspInstance
    csp: CspInstance
    pairs: tuple  # source var -> (positive part var, negative part var)
    interpretation: Interpretation = POSITIVE

    def encode(self, values) -> Optional[list]:
        """Extend a source assignment to the interpreted instance."""
        known = {}
        for x, (a, b) in zip(values, self.pairs):
            x = Fraction(x)
            known[a], known[b] = max(x, Fraction(0)), max(-x, Fraction(0))
        full = propagate(self.csp, known)
        if full is None or len(full) != self.csp.num_vars:
            return None
        return [full[i] for i in range(self.csp.num_vars)]

    def decode(self, values) -> list:
        return [values[a] - values[b] for a, b in self.pairs]


def interpret_positive(csp: CspInstance) -> PositiveInterpretation:
    _check_relations(csp)
    bld = CspBuilder(0, NONNEG)
    pairs = tuple((bld.fresh(), bld.fresh()) for _ in range(csp.num_vars))
    zero = bld.zero()
    for a, b in pairs:
        bld.add(Mul(a, b, zero))

    def repaired(lhs_pos, lhs_neg, out):
        # lhs_pos - eps = out_pos and lhs_neg - eps = out_neg
        eps = bld.fresh()
        bld.add(Plus(out[0], eps, lhs_pos), Plus(out[1], eps, lhs_neg))

    def total(x, y):
        s = bld.fresh()
        bld.add(Plus(x, y, s))
        return s

    def product(x, y):
        p = bld.fresh()
        bld.add(Mul(x, y, p))
        return p

    for c in csp.constraints:
        if isinstance(c, One):
            bld.add(One(pairs[c.u][0]))
        elif isinstance(c, Plus):
            (a, b), (cc, d) = pairs[c.u], pairs[c.v]
            repaired(total(a, cc), total(b, d), pairs[c.w])
        elif isinstance(c, Mul):
            (a, b), (cc, d) = pairs[c.u], pairs[c.v]
            pos = total(product(a, cc), product(b, d))
            neg = total(product(a, d), product(b, cc))
            repaired(pos, neg, pairs[c.w])
        elif isinstance(c, Leq):
            (a, b), (cc, d) = pairs[c.u], pairs[c.v]
            bld.add(Leq(total(a, d), total(cc, b)))
    return PositiveInterpretation(csp, bld.build(), pairs)


# -- polynomial systems --------------------------------------------------------------------


@dataclass(frozen=True)
class Poly:
    """Sparse multivariate polynomial: ((coeff, (var, var, ...)), ...)."""

    terms: tuple

    def __call__(self, values):
        total = 0
        for coeff, mono in self.terms:
            t = coeff
            for v in mono:
                t = t * values[v]
            total = total + t
        return total

    def __str__(self):
        parts = []
        for coeff, mono in self.terms:
            m = "*".join(f"y{v}" for v in mono)
            parts.append(f"{coeff}{'*' + m if m else ''}")
        return " + ".join(parts) or "0"


def poly(*terms) -> Poly:
    acc = {}
    for coeff, mono in terms:
        key = tuple(sorted(mono))
        acc[key] = acc.get(key, Fraction(0)) + Fraction(coeff)
    return Poly(tuple((c, m) for m, c in sorted(acc.items()) if c))


@dataclass(frozen=True)
class PolySystem:
    """eqs == 0, ineqs <= 0, lo < or <= y <= hi per coordinate."""

    num_vars: int
    eqs: tuple
    ineqs: tuple = ()
    lo: Optional[Fraction] = Fraction(0)
    lo_open: bool = False
    hi: Optional[Fraction] = None

    def in_box(self, values) -> bool:
        for y in values:
            if self.lo is not None and (y < self.lo or (self.lo_open and y == self.lo)):
                return False
            if self.hi is not None and y > self.hi:
                return False
        return True

    def holds(self, values) -> bool:
        """Exact check for rational points."""
        return (len(values) == self.num_vars and self.in_box(values)
                and all(e(values) == 0 for e in self.eqs)
                and all(g(values) <= 0 for g in self.ineqs))

    def residuals(self, values, relative: bool = False) -> np.ndarray:
        """Equation values and inequality excesses at a float point.

        With ``relative`` each entry is divided by the sum of the absolute
        values of its terms, so points where every term is tiny do not pass
        for solutions.
        """
        return _Compiled.of(self).residuals(np.asarray(values, dtype=float), relative)

    @classmethod
    def from_csp(cls, csp: CspInstance) -> "PolySystem":
        _check_relations(csp)
        eqs, ineqs = [], []
        for c in csp.constraints:
            if isinstance(c, One):
                eqs.append(poly((1, (c.u,)), (-1, ())))
            elif isinstance(c, Plus):
                eqs.append(poly((1, (c.u,)), (1, (c.v,)), (-1, (c.w,))))
            elif isinstance(c, Mul):
                eqs.append(poly((1, (c.u, c.v)), (-1, (c.w,))))
            else:
                ineqs.append(poly((1, (c.u,)), (-1, (c.v,))))
        lo = Fraction(0) if csp.domain == NONNEG else None
        return cls(csp.num_vars, tuple(eqs), tuple(ineqs), lo=lo)


class _Compiled:
    """Float arrays for fast evaluation of every term of a PolySystem."""

    _cache = {}

    def __init__(self, system: PolySystem):
        polys = list(system.eqs) + list(system.ineqs)
        self.m = system.num_vars
        self.n_eqs = len(system.eqs)
        self.rows = len(polys)
        coeffs, owner, monos = [], [], []
        for k, p in enumerate(polys):
            for c, mono in p.terms:
                coeffs.append(float(c))
                owner.append(k)
                monos.append(mono)
        width = max((len(mono) for mono in monos), default=0)
        # index m is a constant 1.0 slot used as padding
        self.monos = np.full((len(monos), max(width, 1)), self.m, dtype=np.intp)
        for t, mono in enumerate(monos):
            self.monos[t, :len(mono)] = mono
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.owner = np.asarray(owner, dtype=np.intp)

    @classmethod
    def of(cls, system: PolySystem) -> "_Compiled":
        key = id(system)
        hit = cls._cache.get(key)
        if hit is None or hit[0] is not system:
            hit = (system, cls(system))
            cls._cache[key] = hit
        return hit[1]

    def _terms(self, y):
        factors = np.append(y, 1.0)[self.monos]
        return factors, self.coeffs * np.prod(factors, axis=1)

    def residuals(self, y: np.ndarray, relative: bool) -> np.ndarray:
        _, terms = self._terms(y)
        r = np.bincount(self.owner, weights=terms, minlength=self.rows)
        r[self.n_eqs:] = np.maximum(r[self.n_eqs:], 0.0)
        if relative:
            size = np.bincount(self.owner, weights=np.abs(terms), minlength=self.rows)
            r = np.divide(r, size, out=np.zeros_like(r), where=size > 0)
        return r

    def jacobian(self, y: np.ndarray, relative: bool) -> np.ndarray:
        factors, terms = self._terms(y)
        width = self.monos.shape[1]
        # d term / d factor p: coefficient times the product of the other factors
        partial = np.empty_like(factors)
        for p in range(width):
            others = np.delete(factors, p, axis=1)
            partial[:, p] = self.coeffs * (np.prod(others, axis=1) if width > 1 else 1.0)
        jr = np.zeros((self.rows, self.m + 1))
        np.add.at(jr, (np.repeat(self.owner, width), self.monos.ravel()), partial.ravel())
        jr = jr[:, :self.m]
        r = np.bincount(self.owner, weights=terms, minlength=self.rows)
        inactive = np.zeros(self.rows, dtype=bool)
        inactive[self.n_eqs:] = r[self.n_eqs:] <= 0
        jr[inactive] = 0.0
        r[inactive] = 0.0
        if not relative:
            return jr
        size = np.bincount(self.owner, weights=np.abs(terms), minlength=self.rows)
        js = np.zeros((self.rows, self.m + 1))
        signed = partial * np.sign(terms)[:, None]
        np.add.at(js, (np.repeat(self.owner, width), self.monos.ravel()), signed.ravel())
        js = js[:, :self.m]
        safe = np.where(size > 0, size, 1.0)
        out = (jr * safe[:, None] - r[:, None] * js) / (safe ** 2)[:, None]
        out[size <= 0] = 0.0
        return out


# -- interpretation in (0, 1/n] ---------------------------------------------------------------


@dataclass(frozen=True)
class UnitIntervalInterpretation:
    source: CspInstance
    system: PolySystem
    n: int
    interpretation: Interpretation = UNIT_INTERVAL

    def encode(self, values) -> list:
        return [1 / (Fraction(x) + self.n) for x in values]

    def decode(self, values) -> list:
        return [1 / Fraction(y) - self.n for y in values]

    def search(self, bound: int = 64, **kwargs) -> "SearchResult":
        """Numeric search restricted to decoded values at most ``bound``.

        Near y = 0 every term is tiny, so residuals are taken relative to the
        term sizes and y stays above 1/(bound + n).
        """
        return numeric_search(self.system, floor=1 / (bound + self.n), relative=True, **kwargs)


def interpret_unit_interval(pos_csp: CspInstance, n: int) -> UnitIntervalInterpretation:
    """Shift the non-negative reals to [n, inf) and invert into (0, 1/n]."""
    if n < 1:
        raise InputError("n must be a positive integer")
    if pos_csp.domain != NONNEG:
        raise InputError("expected an instance over the non-negative reals")
    _check_relations(pos_csp)
    eqs, ineqs = [], []
    for c in pos_csp.constraints:
        if isinstance(c, One):
            eqs.append(poly((n + 1, (c.u,)), (-1, ())))
        elif isinstance(c, Plus):
            u, v, w = c.u, c.v, c.w
            eqs.append(poly((1, (v, w)), (1, (u, w)), (-1, (u, v)), (-n, (u, v, w))))
        elif isinstance(c, Mul):
            u, v, w = c.u, c.v, c.w
            # y_w (1 - n y_u)(1 - n y_v) - y_u y_v (1 - n y_w)
            eqs.append(poly((1, (w,)), (-n, (u, w)), (-n, (v, w)), (n * n, (u, v, w)),
                            (-1, (u, v)), (n, (u, v, w))))
        else:
            ineqs.append(poly((1, (c.v,)), (-1, (c.u,))))
    system = PolySystem(pos_csp.num_vars, tuple(eqs), tuple(ineqs),
                        lo=Fraction(0), lo_open=True, hi=Fraction(1, n))
    return UnitIntervalInterpretation(pos_csp, system, n)


# -- numeric search --------------------------------------------------------------------------


@dataclass
class SearchResult:
    found: bool
    point: Optional[list]
    residual: float
    starts: int = 0
    notes: dict = field(default_factory=dict)


def numeric_search(problem, seed: int = 0, starts: int = 40, tol: float = 1e-9,
                   scale: float = 4.0, floor: Optional[float] = None,
                   relative: bool = False) -> SearchResult:
    """Multi-start bounded least squares on a PolySystem (or a CspInstance).

    ``found`` means some start reached max residual <= tol with every
    coordinate inside the box; an open lower bound must be cleared by tol.
    ``floor`` replaces the lower bound by a closed one.  Failure is evidence
    of infeasibility, not a proof.
    """
    system = problem if isinstance(problem, PolySystem) else PolySystem.from_csp(problem)
    compiled = _Compiled.of(system)
    m = system.num_vars
    if m == 0:
        r = compiled.residuals(np.zeros(0), relative)
        worst = float(np.max(np.abs(r))) if r.size else 0.0
        return SearchResult(worst <= tol, [], worst, 0)
    if floor is not None:
        lo, lo_open = float(floor), False
    else:
        lo = -np.inf if system.lo is None else float(system.lo)
        lo_open = system.lo_open
    hi = np.inf if system.hi is None else float(system.hi)
    rng = random.Random(seed)

    def draw():
        if np.isfinite(lo) and np.isfinite(hi):
            return rng.uniform(lo, hi)
        if np.isfinite(lo):
            return lo + rng.uniform(0, scale)
        return rng.uniform(-scale, scale)

    lo_v, hi_v = np.full(m, lo), np.full(m, hi)

    def solve(x0, fixed):
        """Least squares over the coordinates not in ``fixed`` (a bool mask)."""
        free = ~fixed
        if not free.any():
            return x0

        def expand(z):
            y = x0.copy()
            y[free] = z
            return y

        def fun(z):
            r = compiled.residuals(expand(z), relative)
            return r if r.size else np.zeros(1)

        def jac(z):
            j = compiled.jacobian(expand(z), relative)[:, free]
            return j if j.size else np.zeros((1, int(free.sum())))

        sol = least_squares(fun, x0[free], jac=jac, bounds=(lo_v[free], hi_v[free]),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=500)
        return expand(sol.x)

    def worst_at(y):
        r = compiled.residuals(y, relative)
        return float(np.max(np.abs(r))) if r.size else 0.0

    def inside(y):
        return not lo_open or bool(np.all(y > lo + tol))

    best, best_point = np.inf, None
    no_fix = np.zeros(m, dtype=bool)
    for k in range(starts):
        y = solve(np.array([draw() for _ in range(m)]), no_fix)
        candidates = [y]
        if worst_at(y) < 1e-4:
            # degenerate products (a*b = 0) converge slowly; snap coordinates
            # sitting at a bound onto it and re-solve the rest
            for delta in (1e-9, 1e-7, 1e-5, 1e-3, 1e-2):
                snapped = y.copy()
                at_lo = np.isfinite(lo) & (snapped - lo < delta) & (not lo_open)
                at_hi = np.isfinite(hi) & (hi - snapped < delta)
                snapped[at_lo], snapped[at_hi] = lo, hi
                candidates.append(solve(snapped, at_lo | at_hi))
        for cand in candidates:
            worst = worst_at(cand)
            if worst < best and inside(cand):
                best, best_point = worst, [float(v) for v in cand]
        if best <= tol:
            return SearchResult(True, best_point, best, k + 1)
    return SearchResult(False, best_point, float(best), starts)


__all__ = [
    "Interpretation", "POSITIVE", "UNIT_INTERVAL", "PositiveInterpretation", "interpret_positive",
    "Poly", "poly", "PolySystem", "UnitIntervalInterpretation", "interpret_unit_interval",
    "SearchResult", "numeric_search",
]
