"""Constraint satisfaction instances over the reals with <=, +, =1, * and
activation graphs, plus an exact propagation evaluator."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .core import Activation, InputError, UnsupportedActivation

REALS = "reals"
NONNEG = "nonneg"


@dataclass(frozen=True)
class Leq:
    u: int
    v: int


@dataclass(frozen=True)
class Plus:
    """u + v = w"""

    u: int
    v: int
    w: int


@dataclass(frozen=True)
class One:
    u: int


@dataclass(frozen=True)
class Mul:
    """u * v = w; gadget bookkeeping only, never solved exactly."""

    u: int
    v: int
    w: int


@dataclass(frozen=True)
class FnGraph:
    """v = act(u)"""

    act: Activation
    u: int
    v: int


Constraint = Union[Leq, Plus, One, Mul, FnGraph]


def variables(c: Constraint) -> tuple:
    if isinstance(c, FnGraph):
        return (c.u, c.v)
    if isinstance(c, One):
        return (c.u,)
    if isinstance(c, Leq):
        return (c.u, c.v)
    return (c.u, c.v, c.w)


@dataclass(frozen=True)
class CspInstance:
    num_vars: int
    constraints: tuple
    domain: str = REALS

    def __post_init__(self):
        if self.domain not in (REALS, NONNEG):
            raise InputError(f"unknown domain {self.domain!r}")
        for c in self.constraints:
            for v in variables(c):
                if not 0 <= v < self.num_vars:
                    raise InputError(f"variable {v} out of range in {c}")

    @property
    def size(self) -> int:
        return self.num_vars + len(self.constraints)

    def relations(self) -> set:
        return {type(c).__name__ for c in self.constraints}


class CspBuilder:
    """Accumulates variables and constraints; ``zero``/``one`` are shared constants."""

    def __init__(self, num_vars: int = 0, domain: str = REALS):
        self.num_vars = num_vars
        self.constraints = []
        self.domain = domain
        self._zero = None
        self._one = None

    def fresh(self) -> int:
        self.num_vars += 1
        return self.num_vars - 1

    def add(self, *cs: Constraint) -> None:
        self.constraints.extend(cs)

    def zero(self) -> int:
        if self._zero is None:
            self._zero = self.fresh()
            self.add(Plus(self._zero, self._zero, self._zero))
        return self._zero

    def one(self) -> int:
        if self._one is None:
            self._one = self.fresh()
            self.add(One(self._one))
        return self._one

    def build(self) -> CspInstance:
        return CspInstance(self.num_vars, tuple(self.constraints), self.domain)


def exact_apply(act: Activation, x: Fraction) -> Fraction:
    if act.piecewise_linear:
        return act(x)
    if act.name == "square":
        return x * x
    raise UnsupportedActivation(f"{act.tag} has no exact rational evaluation")


def holds(c: Constraint, val) -> bool:
    if isinstance(c, Leq):
        return val[c.u] <= val[c.v]
    if isinstance(c, Plus):
        return val[c.u] + val[c.v] == val[c.w]
    if isinstance(c, One):
        return val[c.u] == 1
    if isinstance(c, Mul):
        return val[c.u] * val[c.v] == val[c.w]
    return exact_apply(c.act, val[c.u]) == val[c.v]


def check_assignment(csp: CspInstance, values) -> bool:
    if len(values) != csp.num_vars:
        raise InputError("assignment has the wrong length")
    if csp.domain == NONNEG and any(v < 0 for v in values):
        return False
    return all(holds(c, values) for c in csp.constraints)


def propagate(csp: CspInstance, known: dict) -> Optional[dict]:
    """Forward-solve functional constraints from ``known`` values.

    Each derived value is forced by the constraint that produced it, so when
    every variable gets a value and all constraints hold, the assignment is the
    unique one extending ``known``.  Returns None on a contradiction; the
    result may be partial if the constraints do not determine everything.
    """
    val = {k: Fraction(v) for k, v in known.items()}

    def put(var, x):
        if var in val:
            return val[var] == x
        val[var] = x
        return True

    changed = True
    while changed:
        changed = False
        for c in csp.constraints:
            before = len(val)
            if isinstance(c, One):
                ok = put(c.u, Fraction(1))
            elif isinstance(c, Plus):
                u, v, w = (val.get(x) for x in (c.u, c.v, c.w))
                ok = True
                if c.u == c.v == c.w:
                    ok = put(c.u, Fraction(0))
                elif u is not None and v is not None:
                    ok = put(c.w, u + v)
                elif c.u == c.v and w is not None:
                    ok = put(c.u, w / 2)
                elif u is not None and w is not None:
                    ok = put(c.v, w - u)
                elif v is not None and w is not None:
                    ok = put(c.u, w - v)
            elif isinstance(c, Mul):
                u, v = val.get(c.u), val.get(c.v)
                ok = put(c.w, u * v) if u is not None and v is not None else True
            elif isinstance(c, FnGraph):
                u = val.get(c.u)
                ok = put(c.v, exact_apply(c.act, u)) if u is not None else True
            else:
                ok = True
            if not ok:
                return None
            changed |= len(val) != before
    full = len(val) == csp.num_vars
    if full and not check_assignment(csp, [val[i] for i in range(csp.num_vars)]):
        return None
    return val
