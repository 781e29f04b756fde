"""Univariate rational polynomials and the shift-difference construction that
writes x^2 as a combination of shifted copies of a higher-degree polynomial."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from ..core import InputError, rat


@dataclass(frozen=True)
class Polynomial:
    coeffs: tuple  # index = degree

    def __post_init__(self):
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(rat(v) for v in c))

    @classmethod
    def of(cls, *coeffs) -> "Polynomial":
        return cls(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # zero polynomial: -1

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(tuple(self.coeff(k) + other.coeff(k) for k in range(n)))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1)

    def scale(self, q) -> "Polynomial":
        q = rat(q)
        return Polynomial(tuple(q * c for c in self.coeffs))

    def shift(self, k) -> "Polynomial":
        """p(x + k)"""
        k = rat(k)
        n = len(self.coeffs)
        out = [Fraction(0)] * n
        for i, a in enumerate(self.coeffs):
            if a:
                for j in range(i + 1):
                    out[j] += a * comb(i, j) * k ** (i - j)
        return Polynomial(tuple(out))

    def __call__(self, x):
        acc = 0
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            a = self.coeffs[k]
            if a:
                mono = "" if k == 0 else "x" if k == 1 else f"x^{k}"
                coef = str(a) if (a != 1 or k == 0) else ""
                parts.append(f"{coef}{'*' if coef and mono else ''}{mono}")
        return " + ".join(parts)


X_SQUARED = Polynomial.of(0, 0, 1)


@dataclass(frozen=True)
class SquareCombination:
    """``sum(scale * p(x + shift)) + correction == x^2``."""

    terms: tuple  # ((shift, scale), ...) sorted by shift
    correction: Polynomial

    def expand(self, p: Polynomial) -> Polynomial:
        acc = self.correction
        for k, s in self.terms:
            acc = acc + p.shift(k).scale(s)
        return acc


def _combine(*parts) -> dict:
    out = {}
    for combo, factor in parts:
        for k, s in combo.items():
            out[k] = out.get(k, Fraction(0)) + factor * s
    return {k: s for k, s in out.items() if s}


def _shifted(combo: dict, k: int) -> dict:
    return {shift + k: s for shift, s in combo.items()}


def degree_basis(p: Polynomial) -> list:
    """Monic polynomials of degrees deg(p), ..., 1, each with its combination of
    shifted copies of ``p`` (dict shift -> scale).

    Each level differences the previous one against a shift by the first k =
    1, 2, ... whose top coefficient survives, then divides by that coefficient.
    """
    n = p.degree
    if n < 2:
        raise InputError("x^2 is not definable from a polynomial of degree < 2")
    current = p.scale(1 / p.lead)
    combo = {0: 1 / p.lead}
    basis = [(current, combo)]
    for d in range(n - 1, 0, -1):
        k = 1
        while True:
            diff = current.shift(k) - current
            if diff.coeff(d) != 0:
                break
            k += 1
        lead = diff.coeff(d)
        current = diff.scale(1 / lead)
        combo = _combine((_shifted(combo, k), 1 / lead), (combo, -1 / lead))
        basis.append((current, combo))
    return basis


def poly_to_square(p: Polynomial) -> SquareCombination:
    """Express x^2 through shifts of ``p`` plus a constant correction."""
    target = X_SQUARED
    combo = {}
    for poly, c in degree_basis(p):
        a = target.coeff(poly.degree)
        if a:
            target = target - poly.scale(a)
            combo = _combine((combo, 1), (c, a))
    if target.degree > 0:
        raise AssertionError("basis reduction left a non-constant residual")
    result = SquareCombination(tuple(sorted(combo.items())), target)
    if result.expand(p) != X_SQUARED:
        raise AssertionError("combination does not expand to x^2")
    return result
