"""Executable reductions between NNR, VIP, NE and CSP.

Every function here is a pure structure-to-structure transformation.  The
answer-preservation polarity of each one is stated in its docstring; the
``RECEIPT_BOUNDS`` table holds the size factors checked by :func:`receipt`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .core import (
    EQ, LE, LT, InputError, LinearConstraint, LinearSpec, Network, ReachInstance,
    UnsupportedActivation, heaviside, identity, instance_size, make_layer, network_size,
    relu, sign,
)
from .csp import NONNEG, CspBuilder, CspInstance, FnGraph, Leq, Mul, One, Plus
from .gadgets.encodings import encode_integer, scale_integer
from .netops import (
    append_layer, replace_id_nodes, restrict_outputs, stack, with_passthrough,
)
from .solver import negated_queries

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


# -- NNR <-> CSP ----------------------------------------------------------------


def _encode_row(b: CspBuilder, terms, cmp: str, rhs: Fraction) -> None:
    """Encode ``sum(q*v for q, v in terms) cmp rhs`` with <=, +, =1 only.

    Coefficients are cleared to integers, then both sides are built as sums of
    nonnegative integer multiples so no negation is needed.
    """
    if cmp == LT:
        raise InputError("strict rows have no encoding over <=, +, =1")
    scale = lcm(rhs.denominator, *(q.denominator for q, _ in terms))
    left, right = [], []
    for q, v in terms:
        k = int(q * scale)
        if k == 0:
            continue
        side = left if k > 0 else right
        if abs(k) == 1:
            side.append(v)
        else:
            t = b.fresh()
            b.add(*scale_integer(abs(k), v, t, b.fresh, b.zero()))
            side.append(t)
    r = int(rhs * scale)
    if r:
        c = b.fresh()
        b.add(*encode_integer(abs(r), c, b.fresh))
        (right if r > 0 else left).append(c)
    lhs, rhs_var = _sum(b, left), _sum(b, right)
    if cmp == LE:
        b.add(Leq(lhs, rhs_var))
    else:
        b.add(Plus(lhs, b.zero(), rhs_var))


def _sum(b: CspBuilder, terms: list) -> int:
    if not terms:
        return b.zero()
    acc = terms[0]
    for t in terms[1:]:
        nxt = b.fresh()
        b.add(Plus(acc, t, nxt))
        acc = nxt
    return acc


def nnr_to_csp(inst: ReachInstance) -> CspInstance:
    """CSP over (<=, +, =1, activation graphs) satisfiable iff ``inst`` is Sat.

    Variables 0..n-1 are the inputs; every computation node gets a pre-activation
    variable and an output variable.
    """
    net = inst.network
    b = CspBuilder(net.input_dim)
    prev = list(range(net.input_dim))
    for layer in net.layers:
        outs = []
        for i, act in enumerate(layer.activations):
            v_sum, v_f = b.fresh(), b.fresh()
            terms = [(ONE, v_sum)] + [(-w, u) for w, u in zip(layer.weights[i], prev)]
            _encode_row(b, terms, EQ, layer.bias[i])
            if act.name == "id":
                b.add(Plus(v_sum, b.zero(), v_f))
            else:
                b.add(FnGraph(act, v_sum, v_f))
            outs.append(v_f)
        prev = outs
    for spec, vars_ in ((inst.input_spec, range(net.input_dim)), (inst.output_spec, prev)):
        for c in spec.constraints:
            _encode_row(b, list(zip(c.coeffs, vars_)), c.cmp, c.rhs)
    return b.build()


def csp_to_nnr(csp: CspInstance) -> ReachInstance:
    """One layer of computation nodes; linear constraints go to the input spec.

    For every ``v = f(u)`` there is an f-node reading u and an id-node reading v,
    and the output spec equates them.  Sat iff the CSP is satisfiable.
    """
    n = csp.num_vars
    rows = []

    def row(pairs, cmp, rhs):
        coeffs = [ZERO] * n
        for v, a in pairs:
            coeffs[v] += a
        rows.append(LinearConstraint(tuple(coeffs), cmp, Fraction(rhs)))

    graphs = []
    for c in csp.constraints:
        if isinstance(c, Leq):
            row([(c.u, ONE), (c.v, -ONE)], LE, 0)
        elif isinstance(c, Plus):
            row([(c.u, ONE), (c.v, ONE), (c.w, -ONE)], EQ, 0)
        elif isinstance(c, One):
            row([(c.u, ONE)], EQ, 1)
        elif isinstance(c, Mul):
            raise UnsupportedActivation("multiplication has no piecewise-linear network encoding")
        else:
            graphs.append(c)
    if csp.domain == NONNEG:
        for v in range(n):
            row([(v, -ONE)], LE, 0)

    def unit(v):
        return [ONE if j == v else ZERO for j in range(n)]

    if graphs:
        weights, acts, out_rows = [], [], []
        for k, g in enumerate(graphs):
            weights += [unit(g.u), unit(g.v)]
            acts += [g.act, identity()]
            coeffs = [ZERO] * (2 * len(graphs))
            coeffs[2 * k], coeffs[2 * k + 1] = ONE, -ONE
            out_rows.append(LinearConstraint(tuple(coeffs), EQ, ZERO))
        layer = make_layer(weights, [ZERO] * len(weights), acts)
        out = LinearSpec(len(weights), tuple(out_rows))
    else:
        layer = make_layer([unit(v) for v in range(n)], [ZERO] * n, [identity()] * n)
        out = LinearSpec(n, ())
    return ReachInstance(Network(n, (layer,)), LinearSpec(n, tuple(rows)), out)


# -- identity elimination ---------------------------------------------------------


def eliminate_id(net: Network) -> Network:
    """ReLU-only network computing the same function as an {id, relu} network.

    Each hidden id node becomes relu(s) and relu(-s) with negated incoming
    weights and bias on the second copy and negated outgoing weights.
    """
    if not net.activation_names() <= {"id", "relu"}:
        raise InputError("eliminate_id accepts only id and relu activations")
    if any(a.name == "id" for a in net.layers[-1].activations):
        raise InputError(
            "an id output node has no ReLU-only equivalent; use eliminate_id_instance"
        )
    return replace_id_nodes(net)


def eliminate_id_instance(inst: ReachInstance) -> ReachInstance:
    """NNR(id, relu) -> NNR(relu): output id nodes are split too and the output
    spec reads each split output as ``relu(s) - relu(-s)``."""
    net = inst.network
    if not net.activation_names() <= {"id", "relu"}:
        raise InputError("eliminate_id accepts only id and relu activations")
    new = replace_id_nodes(net, include_output=True)
    cols = []  # per old output: list of (new index, sign)
    k = 0
    for act in net.layers[-1].activations:
        if act.name == "id":
            cols.append([(k, ONE), (k + 1, -ONE)])
            k += 2
        else:
            cols.append([(k, ONE)])
            k += 1
    rows = []
    for c in inst.output_spec.constraints:
        coeffs = [ZERO] * new.output_dim
        for a, targets in zip(c.coeffs, cols):
            for j, sgn in targets:
                coeffs[j] += a * sgn
        rows.append(LinearConstraint(tuple(coeffs), c.cmp, c.rhs))
    return ReachInstance(new, inst.input_spec, LinearSpec(new.output_dim, tuple(rows)))


# -- shared indicator machinery ------------------------------------------------------


def ge_rows(spec: LinearSpec) -> list:
    """Rows as ``(coeffs, strict, rhs)`` meaning ``coeffs.v >= rhs`` (``>`` if strict).

    ``<=`` rows are negated, ``=`` rows become two ``>=`` rows.
    """
    out = []
    for c in spec.constraints:
        neg = tuple(-a for a in c.coeffs)
        if c.cmp == LE:
            out.append((neg, False, -c.rhs))
        elif c.cmp == LT:
            out.append((neg, True, -c.rhs))
        else:
            out.append((c.coeffs, False, c.rhs))
            out.append((neg, False, -c.rhs))
    return out


def _sign_indicators(net: Network, rows) -> Network:
    """Append two sign layers: lambda_k = 1 if row k holds at the net's output, else -1.

    ``rows`` are ``(coeffs, strict, rhs)`` over the current outputs.
    """
    s = sign()
    inner_w = [list(c) for c, _, _ in rows]
    inner_b = [-rhs for _, _, rhs in rows]
    net = append_layer(net, inner_w, inner_b, [s] * len(rows))
    k = len(rows)
    outer_w = [[ONE if j == i else ZERO for j in range(k)] for i in range(k)]
    outer_b = [-HALF if strict else HALF for _, strict, _ in rows]
    return append_layer(net, outer_w, outer_b, [s] * k)


def _check_allowed(allowed, needed, what):
    if allowed is not None and not set(needed) <= set(allowed):
        raise UnsupportedActivation(f"{what} needs activations {sorted(needed)}")


def _drop_id(net: Network, allowed) -> Network:
    if allowed is not None and "id" not in allowed:
        if "relu" not in allowed:
            raise UnsupportedActivation("padding needs id or relu")
        return replace_id_nodes(net)
    return net


# -- NE -> co-NNR -----------------------------------------------------------------------


def ne_to_connr(n1: Network, n2: Network, allowed=None) -> ReachInstance:
    """NNR instance that is Sat iff ``n1`` and ``n2`` are NOT equivalent.

    Layers after the merged nets: y_i = sign(y1_i - y2_i); y = sign(sum 2^i y_i);
    a = sign(y - 1/2), b = sign(-y - 1/2); z = sign(a + b + 2) in {0, 1}, with
    z = 1 iff y != 0.  Output spec: z >= 1/2.
    """
    _check_allowed(allowed, {"sign"}, "ne_to_connr")
    if n1.output_dim != n2.output_dim:
        raise InputError("networks differ in output dimension")
    m = n1.output_dim
    s = sign()
    net = stack(n1, n2)
    diff = [[ONE if j == i else -ONE if j == m + i else ZERO for j in range(2 * m)] for i in range(m)]
    net = append_layer(net, diff, [ZERO] * m, [s] * m)
    net = append_layer(net, [[Fraction(2) ** (i + 1) for i in range(m)]], [ZERO], [s])
    net = append_layer(net, [[ONE], [-ONE]], [-HALF, -HALF], [s, s])
    net = append_layer(net, [[ONE, ONE]], [Fraction(2)], [s])
    net = _drop_id(net, allowed)
    out = LinearSpec(1, (LinearConstraint((-ONE,), LE, -HALF),))
    return ReachInstance(net, LinearSpec(net.input_dim, ()), out)


# -- NNR -> co-NE -------------------------------------------------------------------------


def minus_one_network(input_dim: int) -> Network:
    """sign(sign(v_1) - 2), which is -1 on every input."""
    s = sign()
    first = [[ONE if j == 0 else ZERO for j in range(input_dim)]]
    net = Network(input_dim, (make_layer(first, [ZERO], [s]),))
    return append_layer(net, [[ONE]], [Fraction(-2)], [s])


def _spec_rows_over(spec: LinearSpec, offset: int, width: int):
    rows = []
    for coeffs, strict, rhs in ge_rows(spec):
        full = [ZERO] * width
        full[offset:offset + len(coeffs)] = coeffs
        rows.append((tuple(full), strict, rhs))
    return rows


def nnr_to_cone(inst: ReachInstance, allowed=None):
    """Networks (N1, N2) that are NOT equivalent iff ``inst`` is Sat.

    N1 outputs 0 where both specs hold and -1 elsewhere; N2 is constantly -1.
    """
    _check_allowed(allowed, {"sign"}, "nnr_to_cone")
    net = inst.network
    n, m = net.input_dim, net.output_dim
    wide = with_passthrough(net)  # outputs (x, y)
    rows = _spec_rows_over(inst.input_spec, 0, n + m) + _spec_rows_over(inst.output_spec, n, n + m)
    s = sign()
    k = len(rows)
    if k:
        wide = _sign_indicators(wide, rows)
        n1 = append_layer(wide, [[ONE] * k], [Fraction(-k)], [s])
    else:
        n1 = append_layer(wide, [[ZERO] * (n + m)], [ZERO], [s])
    n1 = _drop_id(n1, allowed)
    return n1, minus_one_network(n)


# -- VIP -> co-NNR --------------------------------------------------------------------------


def vip_to_connr(inst: ReachInstance) -> list:
    """One reach instance per negated output row; VIP holds iff all are Unsat."""
    return negated_queries(inst)


# -- NNR -> co-VIP ----------------------------------------------------------------------------

VARIANTS = ("heaviside", "sign", "relu")


def _le_rows(spec: LinearSpec) -> list:
    """Rows as (coeffs, strict, rhs) meaning coeffs.y <= rhs (< if strict)."""
    out = []
    for c in spec.constraints:
        if c.cmp == EQ:
            out.append((c.coeffs, False, c.rhs))
            out.append((tuple(-a for a in c.coeffs), False, -c.rhs))
        else:
            out.append((c.coeffs, c.cmp == LT, c.rhs))
    return out


def pick_variant(allowed=None) -> str:
    for v in VARIANTS:
        if allowed is None or v in allowed:
            return v
    raise UnsupportedActivation("nnr_to_covip needs heaviside, sign or relu")


def nnr_to_covip(inst: ReachInstance, variant: str = "heaviside") -> ReachInstance:
    """VIP instance that is Violated iff ``inst`` is Sat.

    heaviside: a_k = H(b - a.y) per row (strict rows via 1 - H(a.y - b)),
    out = H(sum a_k - K), VIP interval (-1/2, 1/2).
    sign: +-1 row indicators, out = sign(sum - K + 1/2), VIP interval (-2, 0).
    relu: a_k = relu(a.y - b), out = relu(sum a_k), VIP interval (0, inf);
    strict output rows are rejected.
    """
    net = inst.network
    m = net.output_dim
    rows = _le_rows(inst.output_spec)
    k = len(rows)
    if variant == "heaviside":
        h = heaviside()
        if k:
            w = [[-a for a in c] if not strict else list(c) for c, strict, _ in rows]
            bias = [-rhs if strict else rhs for _, strict, rhs in rows]
            net = append_layer(net, w, bias, [h] * k)
            sgn = [-ONE if strict else ONE for _, strict, _ in rows]
            const = sum(1 for _, strict, _ in rows if strict)
            net = append_layer(net, [sgn], [Fraction(const - k)], [h])
        else:
            net = append_layer(net, [[ZERO] * m], [ZERO], [h])
        out = [LinearConstraint((-ONE,), LT, HALF), LinearConstraint((ONE,), LT, HALF)]
    elif variant == "sign":
        s = sign()
        if k:
            as_ge = [(tuple(-a for a in c), strict, -rhs) for c, strict, rhs in rows]
            net = _sign_indicators(net, as_ge)
            net = append_layer(net, [[ONE] * k], [Fraction(-k) + HALF], [s])
        else:
            net = append_layer(net, [[ZERO] * m], [HALF], [s])
        out = [LinearConstraint((-ONE,), LT, Fraction(2)), LinearConstraint((ONE,), LT, ZERO)]
    elif variant == "relu":
        if any(strict for _, strict, _ in rows):
            raise InputError("the relu variant cannot express strict output rows")
        r = relu()
        if k:
            net = append_layer(net, [list(c) for c, _, _ in rows], [-rhs for _, _, rhs in rows], [r] * k)
            net = append_layer(net, [[ONE] * k], [ZERO], [r])
        else:
            net = append_layer(net, [[ZERO] * m], [ZERO], [r])
        out = [LinearConstraint((-ONE,), LT, ZERO)]
    else:
        raise InputError(f"unknown variant {variant!r}")
    return ReachInstance(net, inst.input_spec, LinearSpec(1, tuple(out)))


# -- NE <-> VIP -------------------------------------------------------------------------------


def ne_to_vip(n1: Network, n2: Network, variant: str = "heaviside", allowed=None) -> ReachInstance:
    """VIP instance that Holds iff ``n1`` and ``n2`` are equivalent."""
    return nnr_to_covip(ne_to_connr(n1, n2, allowed), variant)


def vip_to_ne(inst: ReachInstance, allowed=None):
    """Networks (N1, N2) that are equivalent iff the VIP instance Holds.

    N1 is 1 where the input spec holds and the output spec fails, -1 elsewhere;
    N2 is constantly -1.
    """
    _check_allowed(allowed, {"sign"}, "vip_to_ne")
    net = inst.network
    n, m = net.input_dim, net.output_dim
    wide = with_passthrough(net)
    in_rows = _spec_rows_over(inst.input_spec, 0, n + m)
    out_rows = _spec_rows_over(inst.output_spec, n, n + m)
    k_in, k_out = len(in_rows), len(out_rows)
    s = sign()
    if k_in + k_out:
        wide = _sign_indicators(wide, in_rows + out_rows)
        width = k_in + k_out
        b_row = [ONE] * k_in + [ZERO] * k_out
        c_row = [ZERO] * k_in + [ONE] * k_out
    else:
        width = n + m
        b_row = c_row = [ZERO] * width
    # b = 0 iff every input row holds (else -1); c = 1 iff every output row holds (else -1)
    n1 = append_layer(wide, [b_row, c_row], [Fraction(-k_in), Fraction(-k_out) + HALF], [s, s])
    n1 = append_layer(n1, [[ONE, -ONE]], [-HALF], [s])
    n1 = _drop_id(n1, allowed)
    return n1, minus_one_network(n)


# -- truth-table splits ---------------------------------------------------------------------------


def to_single_output(kind: str, instance) -> list:
    """NE: one network pair per output; VIP: one instance per output row.

    The original answer is 'accept' iff every item accepts.
    """
    if kind.upper() == "NE":
        n1, n2 = instance
        if n1.output_dim != n2.output_dim:
            raise InputError("networks differ in output dimension")
        if n1.output_dim == 1:
            return [(n1, n2)]
        return [(restrict_outputs(n1, [i]), restrict_outputs(n2, [i])) for i in range(n1.output_dim)]
    if kind.upper() == "VIP":
        rows = instance.output_spec.constraints
        if len(rows) == 1:
            return [instance]
        m = instance.network.output_dim
        return [ReachInstance(instance.network, instance.input_spec, LinearSpec(m, (r,))) for r in rows]
    raise InputError(f"unknown problem kind {kind!r}")


# -- size receipts -----------------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionReceipt:
    reduction: str
    input_size: int
    output_size: int
    bound_factor: Fraction
    constant: int

    @property
    def within_bound(self) -> bool:
        return self.output_size <= self.bound_factor * self.input_size + self.constant


def size_of(obj) -> int:
    """Instance size: bits of specs and weights for nets, n + m for CSPs."""
    if isinstance(obj, CspInstance):
        return obj.size
    if isinstance(obj, ReachInstance):
        return instance_size(obj)
    if isinstance(obj, Network):
        return network_size(obj)
    if isinstance(obj, (tuple, list)):
        return sum(size_of(o) for o in obj)
    raise InputError(f"no size for {type(obj).__name__}")


# (factor, constant): output size <= factor * input size + constant
RECEIPT_BOUNDS = {
    "nnr_to_csp": (Fraction(8), 4),
    "csp_to_nnr": (Fraction(16), 8),
    "eliminate_id": (Fraction(4), 0),
    "ne_to_connr": (Fraction(4), 64),
    "nnr_to_cone": (Fraction(16), 64),
    "vip_to_connr": (Fraction(4), 16),
    "nnr_to_covip": (Fraction(4), 32),
    "ne_to_vip": (Fraction(4), 128),
    "vip_to_ne": (Fraction(16), 64),
    "to_single_output": (Fraction(1), 0),
}


# truth-table reductions: each emitted item is bounded, not their total
PER_ITEM = {"vip_to_connr", "to_single_output"}


def receipt(name: str, source, result) -> ReductionReceipt:
    factor, const = RECEIPT_BOUNDS[name]
    if name in PER_ITEM:
        out = max((size_of(item) for item in result), default=0)
    else:
        out = size_of(result)
    return ReductionReceipt(name, size_of(source), out, factor, const)
