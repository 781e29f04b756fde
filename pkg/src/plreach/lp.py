"""Exact feasibility of linear constraint systems over the rationals.

Strict rows ``a.x < b`` are solved as ``a.x <= b - eps`` with ``eps`` a symbolic
positive infinitesimal: right-hand sides are pairs ``(value, eps_coeff)``
compared lexicographically, and the phase-I simplex (Bland's rule) runs over
that ordered field.  A concrete rational ``eps`` is picked afterwards so the
returned witness satisfies every row exactly.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from gmpy2 import mpq

from .core import EQ, LT, LinearSpec, check_spec

ZERO = Fraction(0)
ONE = Fraction(1)
# the simplex runs on GMP rationals; Fraction stays the public type
QZERO = mpq(0)
QONE = mpq(1)

# the exact-lp problem type is the core linear spec
LpProblem = LinearSpec


class Status(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class LpVerdict:
    status: Status
    witness: Optional[tuple] = None

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE


INFEASIBLE = LpVerdict(Status.INFEASIBLE)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _lex_neg(b0, b1) -> bool:
    return b0 < 0 or (b0 == 0 and b1 < 0)


class _Tableau:
    def __init__(self, a, b0, b1, basis, artificial):
        self.a = a  # list of row lists
        self.b0 = b0
        self.b1 = b1
        self.basis = basis
        self.artificial = artificial  # set of artificial column ids
        ncols = len(a[0]) if a else 0
        # reduced costs of the phase-I objective sum(artificials)
        d = [QZERO] * ncols
        for j in artificial:
            d[j] = QONE
        for i, col in enumerate(basis):
            if col in artificial:
                row = a[i]
                for j in range(ncols):
                    if row[j]:
                        d[j] -= row[j]
        self.d = d

    def pivot(self, r, c):
        a = self.a
        prow = a[r]
        piv = prow[c]
        if piv != 1:
            inv = 1 / piv
            for j, v in enumerate(prow):
                if v:
                    prow[j] = v * inv
            self.b0[r] *= inv
            self.b1[r] *= inv
        nz = [j for j, v in enumerate(prow) if v]
        b0r, b1r = self.b0[r], self.b1[r]
        for i, row in enumerate(a):
            if i == r:
                continue
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
                self.b0[i] -= f * b0r
                self.b1[i] -= f * b1r
        f = self.d[c]
        if f:
            for j in nz:
                self.d[j] -= f * prow[j]
        self.basis[r] = c

    def run(self):
        a, basis = self.a, self.basis
        m = len(a)
        while True:
            enter = next((j for j, v in enumerate(self.d) if v < 0), None)
            if enter is None:
                return
            best = None
            for i in range(m):
                v = a[i][enter]
                if v > 0:
                    key = (self.b0[i] / v, self.b1[i] / v, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                # cannot happen in phase I: the objective is bounded below by 0
                raise AssertionError("phase-I objective unbounded")
            self.pivot(best[1], enter)


def _presolve(problem: LpProblem):
    """Eliminate equality rows by substitution.

    Returns ``(rows, eliminated)`` or None if a row reduces to a false
    constant.  ``rows`` are the remaining inequalities as
    ``[coeff dict, cmp, rhs, eps_coeff]``; ``eliminated`` lists
    ``(var, coeff dict, rhs)`` meaning ``sum(coeffs * x) = rhs`` solved for
    ``var``, in elimination order.
    """
    rows = []
    for c in problem.constraints:
        coeffs = {j: mpq(v) for j, v in enumerate(c.coeffs) if v}
        rows.append([coeffs, c.cmp, mpq(c.rhs), -QONE if c.cmp == LT else QZERO])
    eliminated = []
    pending = [r for r in rows if r[1] == EQ]
    rows = [r for r in rows if r[1] != EQ]
    while pending:
        coeffs, _, rhs, _ = pending.pop(0)
        if not coeffs:
            if rhs != 0:
                return None
            continue
        var = max(coeffs)  # later variables are node outputs; keep the inputs
        pivot = coeffs[var]
        eliminated.append((var, coeffs, rhs))
        for r in pending + rows:
            f = r[0].get(var)
            if f is None:
                continue
            f = f / pivot
            target = r[0]
            for j, v in coeffs.items():
                w = target.get(j, QZERO) - f * v
                if w:
                    target[j] = w
                else:
                    target.pop(j, None)
            r[2] -= f * rhs
    kept = []
    for r in rows:
        if r[0]:
            kept.append(r)
        elif _lex_neg(r[2], r[3]):
            return None
    return kept, eliminated


def _simplex(rows, n: int):
    """Phase-I simplex over ``n`` free variables; returns (x0, x1) or None."""
    nslack = len(rows)
    first_slack = 2 * n
    first_art = first_slack + nslack
    a, b0, b1, basis = [], [], [], []
    art_rows = []
    for s, (coeffs, _, rhs, eps) in enumerate(rows, start=first_slack):
        row = [QZERO] * first_art
        for j, v in coeffs.items():
            row[2 * j] = v
            row[2 * j + 1] = -v
        row[s] = QONE
        r0, r1 = rhs, eps
        if _lex_neg(r0, r1):
            row = [-v for v in row]
            r0, r1 = -r0, -r1
        a.append(row)
        b0.append(r0)
        b1.append(r1)
        if row[s] == 1:
            basis.append(s)
        else:
            basis.append(None)
            art_rows.append(len(a) - 1)
    ncols = first_art + len(art_rows)
    for row in a:
        row.extend([QZERO] * len(art_rows))
    for k, i in enumerate(art_rows):
        a[i][first_art + k] = QONE
        basis[i] = first_art + k
    artificial = set(range(first_art, ncols))

    tab = _Tableau(a, b0, b1, basis, artificial)
    if artificial:
        tab.run()
        for i, col in enumerate(tab.basis):
            if col in artificial and (tab.b0[i] != 0 or tab.b1[i] != 0):
                return None

    val0 = [QZERO] * ncols
    val1 = [QZERO] * ncols
    for i, col in enumerate(tab.basis):
        val0[col] = tab.b0[i]
        val1[col] = tab.b1[i]
    x0 = [val0[2 * j] - val0[2 * j + 1] for j in range(n)]
    x1 = [val1[2 * j] - val1[2 * j + 1] for j in range(n)]
    return x0, x1


def _choose_eps(problem: LpProblem, x0, x1) -> Fraction:
    eps = ONE
    for c in problem.constraints:
        if c.cmp == EQ:
            continue
        g0, g1 = c.rhs, ZERO
        for a, v0, v1 in zip(c.coeffs, x0, x1):
            if a:
                g0 -= a * v0
                g1 -= a * v1
        if g1 < 0 and g0 > 0:
            eps = min(eps, g0 / (-g1) / 2)
    return eps


def feasible(problem: LpProblem) -> LpVerdict:
    """Decide feasibility of ``problem``; a rational witness comes with FEASIBLE."""
    n = problem.num_vars
    reduced = _presolve(problem)
    if reduced is None:
        return INFEASIBLE
    rows, eliminated = reduced

    # the simplex only sees variables that survive in some inequality
    live = sorted({j for r in rows for j in r[0]})
    index = {j: k for k, j in enumerate(live)}
    for r in rows:
        r[0] = {index[j]: v for j, v in r[0].items()}
    solved = _simplex(rows, len(live)) if rows else ([], [])
    if solved is None:
        return INFEASIBLE
    x0, x1 = [QZERO] * n, [QZERO] * n
    for j, k in index.items():
        x0[j], x1[j] = solved[0][k], solved[1][k]
    for var, coeffs, rhs in reversed(eliminated):
        v0, v1 = rhs, QZERO
        for j, a in coeffs.items():
            if j != var:
                v0 -= a * x0[j]
                v1 -= a * x1[j]
        x0[var], x1[var] = v0 / coeffs[var], v1 / coeffs[var]

    x0, x1 = [_frac(v) for v in x0], [_frac(v) for v in x1]
    eps = _choose_eps(problem, x0, x1)
    witness = tuple(p + eps * q for p, q in zip(x0, x1))
    if not check_spec(problem, witness):
        raise AssertionError("simplex produced an invalid witness")
    return LpVerdict(Status.FEASIBLE, witness)


def feasible_batch(problems: Sequence[LpProblem], threads: int = 1) -> list:
    if threads > 1 and len(problems) > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(feasible, problems))
    return [feasible(p) for p in problems]


def fm_feasible(problem: LpProblem) -> bool:
    """Fourier-Motzkin elimination; exponential, meant as a cross-check for few vars."""
    rows = []
    for c in problem.constraints:
        strict = c.cmp == LT
        rows.append((list(c.coeffs), c.rhs, strict))
        if c.cmp == EQ:
            rows.append(([-v for v in c.coeffs], -c.rhs, False))
    for k in range(problem.num_vars):
        pos, neg, rest = [], [], []
        for r in rows:
            (pos if r[0][k] > 0 else neg if r[0][k] < 0 else rest).append(r)
        for p in pos:
            for q in neg:
                lp, lq = -q[0][k], p[0][k]
                coeffs = [lp * u + lq * v for u, v in zip(p[0], q[0])]
                rest.append((coeffs, lp * p[1] + lq * q[1], p[2] or q[2]))
        rows = rest
    return all((0 < r[1]) if r[2] else (0 <= r[1]) for r in rows)
