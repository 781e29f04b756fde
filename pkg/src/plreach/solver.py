"""Reachability (NNR), interval property (VIP) and equivalence (NE) for
piecewise-linear networks.

The search fixes one linear piece per activation node, layer by layer, and
asks the exact LP whether the partially linearised network still admits a
valid input.  A node with a single piece (``id``) never branches; its linear
relation is part of every LP.  Unassigned nodes contribute nothing, so an
infeasible partial LP rules out every completion.
"""

from __future__ import annotations

import enum
import itertools
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import lp
from .core import (
    EQ, LE, LT, InputError, LinearConstraint, LinearSpec, Network, ReachInstance,
    UnsupportedActivation, accepts, check_spec, evaluate,
)
from .netops import stack

ZERO = Fraction(0)
ONE = Fraction(1)


class Outcome(str, enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    HOLDS = "holds"
    VIOLATED = "violated"
    EQUIVALENT = "equivalent"
    DISTINCT = "distinct"
    EXHAUSTED = "budget_exhausted"


@dataclass
class Stats:
    lp_calls: int = 0
    nodes_expanded: int = 0

    def as_dict(self) -> dict:
        return {"lp_calls": self.lp_calls, "nodes_expanded": self.nodes_expanded}


@dataclass(frozen=True)
class Verdict:
    status: Outcome
    witness: Optional[tuple] = None
    stats: Stats = field(default_factory=Stats, compare=False)


VipVerdict = Verdict
NeVerdict = Verdict


class BudgetExhausted(Exception):
    pass


class _Counter:
    """Shared, lock-protected statistics and node budget."""

    def __init__(self, budget: Optional[int]):
        self.stats = Stats()
        self.budget = budget
        self.lock = threading.Lock()
        self.stop = threading.Event()

    def expand(self):
        with self.lock:
            if self.budget is not None and self.stats.nodes_expanded >= self.budget:
                raise BudgetExhausted
            self.stats.nodes_expanded += 1

    def solve(self, problem):
        with self.lock:
            self.stats.lp_calls += 1
        return lp.feasible(problem)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("PLREACH_THREADS", "1")))
    except ValueError:
        return 1


def check_supported(net: Network) -> None:
    for ell, i, act in net.nodes():
        if not act.piecewise_linear:
            raise UnsupportedActivation(
                f"node ({ell}, {i}) uses {act.tag}, which is not piecewise linear"
            )


class PhaseEncoding:
    """LP encoding of a reach instance under a (partial) phase assignment.

    Variables are the inputs followed by one output variable per node.
    """

    def __init__(self, inst: ReachInstance):
        check_supported(inst.network)
        self.inst = inst
        net = inst.network
        self.n = net.input_dim
        self.offsets = []
        off = self.n
        for layer in net.layers:
            self.offsets.append(off)
            off += layer.width
        self.num_vars = off
        self._rows = {}
        self.order = []  # branching nodes, layer-major, more pieces first
        base = []
        for ell, layer in enumerate(net.layers):
            branching = [i for i, a in enumerate(layer.activations) if len(a.pieces) > 1]
            branching.sort(key=lambda i: -len(layer.activations[i].pieces))
            self.order += [(ell, i) for i in branching]
            for i, act in enumerate(layer.activations):
                if len(act.pieces) == 1:
                    base += self.node_rows(ell, i, 0)
        for c in inst.input_spec.constraints:
            base.append(self._embed(c, range(self.n)))
        out_vars = range(self.offsets[-1], self.offsets[-1] + net.output_dim)
        for c in inst.output_spec.constraints:
            base.append(self._embed(c, out_vars))
        self.base = base

    def _embed(self, c: LinearConstraint, var_ids) -> LinearConstraint:
        coeffs = [ZERO] * self.num_vars
        for v, a in zip(var_ids, c.coeffs):
            coeffs[v] += a
        return LinearConstraint(tuple(coeffs), c.cmp, c.rhs)

    def _prev_vars(self, ell):
        if ell == 0:
            return range(self.n)
        width = self.inst.network.layers[ell - 1].width
        return range(self.offsets[ell - 1], self.offsets[ell - 1] + width)

    def node_rows(self, ell: int, i: int, k: int) -> list:
        """Rows forcing node (ell, i) into piece k: domain of s, then y = slope*s + b."""
        key = (ell, i, k)
        if key not in self._rows:
            self._rows[key] = self._node_rows(ell, i, k)
        return self._rows[key]

    def _node_rows(self, ell: int, i: int, k: int) -> list:
        layer = self.inst.network.layers[ell]
        piece = layer.activations[i].pieces[k]
        w, b = layer.weights[i], layer.bias[i]
        prev = self._prev_vars(ell)
        y = self.offsets[ell] + i

        def row(scale, extra=None):
            coeffs = [ZERO] * self.num_vars
            for v, a in zip(prev, w):
                coeffs[v] += scale * a
            if extra is not None:
                coeffs[extra[0]] += extra[1]
            return coeffs

        rows = []
        if piece.lo is not None and piece.hi is not None and piece.lo == piece.hi:
            rows.append(LinearConstraint(tuple(row(ONE)), EQ, piece.lo - b))
        else:
            if piece.lo is not None:  # s >= lo  <=>  -w.y <= b - lo
                rows.append(LinearConstraint(tuple(row(-ONE)), LE if piece.lo_closed else LT, b - piece.lo))
            if piece.hi is not None:  # s <= hi  <=>  w.y <= hi - b
                rows.append(LinearConstraint(tuple(row(ONE)), LE if piece.hi_closed else LT, piece.hi - b))
        # y - slope*(w.prev) = slope*b + intercept
        rows.append(LinearConstraint(tuple(row(-piece.slope, (y, ONE))), EQ, piece.slope * b + piece.intercept))
        return rows

    def problem(self, assignment: dict) -> LinearSpec:
        rows = list(self.base)
        for (ell, i), k in assignment.items():
            rows += self.node_rows(ell, i, k)
        return LinearSpec(self.num_vars, tuple(rows))

    def piece_counts(self) -> list:
        net = self.inst.network
        return [len(net.layers[ell].activations[i].pieces) for ell, i in self.order]

    def constants(self, assignment: dict, upto: int) -> list:
        """Per layer below ``upto``: node values that are constant under
        ``assignment`` (None where the value still depends on the input)."""
        net = self.inst.network
        out, prev = [], [None] * self.n
        for ell in range(upto):
            layer = net.layers[ell]
            vals = []
            for i, act in enumerate(layer.activations):
                k = 0 if len(act.pieces) == 1 else assignment.get((ell, i))
                if k is not None and act.pieces[k].slope == 0:
                    vals.append(act.pieces[k].intercept)
                    continue
                s = self._constant_pre(layer, i, prev)
                vals.append(None if s is None else act(s))
            out.append(vals)
            prev = vals
        return out

    @staticmethod
    def _constant_pre(layer, i, prev):
        s = layer.bias[i]
        for a, v in zip(layer.weights[i], prev):
            if a:
                if v is None:
                    return None
                s += a * v
        return s

    def extend(self, point, key, assignment: dict) -> Optional[list]:
        """``point`` with node ``key`` set from its pre-activation, if that lies in the assigned piece."""
        ell, i = key
        layer = self.inst.network.layers[ell]
        piece = layer.activations[i].pieces[assignment[key]]
        s = layer.bias[i]
        for a, v in zip(layer.weights[i], self._prev_vars(ell)):
            if a:
                s += a * point[v]
        if not piece.contains(s):
            return None
        out = list(point)
        out[self.offsets[ell] + i] = piece(s)
        return out

    def forced_piece(self, assignment: dict, key) -> Optional[int]:
        """The only feasible piece of node ``key`` when its pre-activation is constant."""
        ell, i = key
        prev = self.constants(assignment, ell)[-1] if ell else [None] * self.n
        s = self._constant_pre(self.inst.network.layers[ell], i, prev)
        return None if s is None else self.inst.network.layers[ell].activations[i].piece_index(s)


def phase_lp(inst: ReachInstance, assignment: dict) -> LinearSpec:
    """The LP of ``inst`` with nodes in ``assignment`` fixed to the given pieces."""
    return PhaseEncoding(inst).problem(assignment)


class _Search:
    def __init__(self, enc: PhaseEncoding, counter: _Counter):
        self.enc = enc
        self.counter = counter
        self.counts = enc.piece_counts()

    def node(self, assignment: dict, depth: int, hint=None):
        if self.counter.stop.is_set():
            return None
        self.counter.expand()
        problem = self.enc.problem(assignment)
        point, fresh = None, True
        if hint is not None:
            # the parent's point, with the newly fixed node moved onto its piece,
            # often satisfies the child LP already; it is checked exactly
            point = self.enc.extend(hint, self.enc.order[depth - 1], assignment)
            if point is not None and not check_spec(problem, point):
                point = None
        if point is None:
            verdict = self.counter.solve(problem)
            if not verdict.feasible:
                return None
            point = verdict.witness
        else:
            fresh = False  # same input as the parent, which was not accepted
        x = point[: self.enc.n]
        # the LP point may already be a genuine witness
        if fresh and accepts(self.enc.inst, x):
            return x
        if depth == len(self.enc.order):
            raise AssertionError("complete phase assignment yielded an inexact witness")
        key = self.enc.order[depth]
        for k in self.pieces(assignment, depth):
            found = self.node({**assignment, key: k}, depth + 1, point)
            if found is not None:
                return found
        return None

    def pieces(self, assignment: dict, depth: int):
        # a constant pre-activation leaves a single piece; the others are infeasible
        forced = self.enc.forced_piece(assignment, self.enc.order[depth])
        return range(self.counts[depth]) if forced is None else (forced,)


def _reach(inst: ReachInstance, counter: _Counter, threads: int) -> Optional[tuple]:
    enc = PhaseEncoding(inst)
    search = _Search(enc, counter)
    if threads <= 1 or not enc.order:
        return search.node({}, 0)

    counter.expand()
    root = counter.solve(enc.problem({}))
    if not root.feasible:
        return None
    x = root.witness[: enc.n]
    if accepts(inst, x):
        return x
    first = enc.order[0]

    def branch(k):
        found = search.node({first: k}, 1, root.witness)
        if found is not None:
            counter.stop.set()
        return found

    with ThreadPoolExecutor(threads) as pool:
        results = list(pool.map(branch, search.pieces({}, 0)))
    return next((r for r in results if r is not None), None)


def solve_reach(inst: ReachInstance, budget: Optional[int] = None, threads: int = 1) -> Verdict:
    """Decide whether some input satisfying the input spec is mapped into the output spec."""
    counter = _Counter(budget)
    try:
        x = _reach(inst, counter, threads)
    except BudgetExhausted:
        return Verdict(Outcome.EXHAUSTED, None, counter.stats)
    if x is None:
        return Verdict(Outcome.UNSAT, None, counter.stats)
    return Verdict(Outcome.SAT, tuple(x), counter.stats)


def solve_reach_exhaustive(inst: ReachInstance) -> Verdict:
    """Reference decision: one LP per complete phase pattern, no pruning."""
    enc = PhaseEncoding(inst)
    counter = _Counter(None)
    for pattern in itertools.product(*(range(c) for c in enc.piece_counts())):
        counter.expand()
        v = counter.solve(enc.problem(dict(zip(enc.order, pattern))))
        if v.feasible:
            return Verdict(Outcome.SAT, v.witness[: enc.n], counter.stats)
    return Verdict(Outcome.UNSAT, None, counter.stats)


def negate(c: LinearConstraint) -> list:
    """Closed complement of one output row, as a list of alternative rows.

    ``a.y < b`` -> ``a.y >= b``; ``a.y <= b`` -> ``a.y > b``;
    ``a.y = b`` -> ``a.y < b`` or ``a.y > b``.
    """
    neg = tuple(-a for a in c.coeffs)
    if c.cmp == LT:
        return [LinearConstraint(neg, LE, -c.rhs)]
    if c.cmp == LE:
        return [LinearConstraint(neg, LT, -c.rhs)]
    return [LinearConstraint(c.coeffs, LT, c.rhs), LinearConstraint(neg, LT, -c.rhs)]


def negated_queries(inst: ReachInstance) -> list:
    """One reach instance per alternative of each negated output row, in row order."""
    m = inst.network.output_dim
    return [
        ReachInstance(inst.network, inst.input_spec, LinearSpec(m, (alt,)))
        for c in inst.output_spec.constraints
        for alt in negate(c)
    ]


def solve_vip(inst: ReachInstance, budget: Optional[int] = None, threads: int = 1) -> Verdict:
    """Does every input satisfying the input spec land inside the output spec?"""
    counter = _Counter(budget)
    try:
        for query in negated_queries(inst):
            x = _reach(query, counter, threads)
            counter.stop.clear()
            if x is not None:
                return Verdict(Outcome.VIOLATED, tuple(x), counter.stats)
    except BudgetExhausted:
        return Verdict(Outcome.EXHAUSTED, None, counter.stats)
    # an instance with no output rows holds vacuously; make sure the net is decidable
    check_supported(inst.network)
    return Verdict(Outcome.HOLDS, None, counter.stats)


def difference_queries(n1: Network, n2: Network) -> list:
    if n1.input_dim != n2.input_dim or n1.output_dim != n2.output_dim:
        raise InputError("networks differ in input or output dimension")
    net = stack(n1, n2)
    m = n1.output_dim
    empty = LinearSpec(net.input_dim, ())
    queries = []
    for i in range(m):
        coeffs = [ZERO] * (2 * m)
        coeffs[i], coeffs[m + i] = ONE, -ONE
        for sgn in (ONE, -ONE):  # y1 - y2 < 0, then y2 - y1 < 0
            row = LinearConstraint(tuple(sgn * a for a in coeffs), LT, ZERO)
            queries.append(ReachInstance(net, empty, LinearSpec(2 * m, (row,))))
    return queries


def solve_ne(n1: Network, n2: Network, budget: Optional[int] = None, threads: int = 1) -> Verdict:
    """Equivalence of two networks, decided through their stacked difference."""
    queries = difference_queries(n1, n2)
    check_supported(n1)
    check_supported(n2)
    counter = _Counter(budget)
    try:
        for query in queries:
            x = _reach(query, counter, threads)
            counter.stop.clear()
            if x is not None:
                if evaluate(n1, x) == evaluate(n2, x):
                    raise AssertionError("distinguisher does not distinguish")
                return Verdict(Outcome.DISTINCT, tuple(x), counter.stats)
    except BudgetExhausted:
        return Verdict(Outcome.EXHAUSTED, None, counter.stats)
    return Verdict(Outcome.EQUIVALENT, None, counter.stats)
