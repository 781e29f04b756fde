"""Exact data model for layered networks, linear specifications and activations.

Every number on the decision path is a :class:`fractions.Fraction`; nothing in
this module rounds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

LE, LT, EQ = "<=", "<", "="
COMPARATORS = (LE, LT, EQ)

# Activation tags that are recognised but have no piecewise-linear expansion.
NONLINEAR_TAGS = ("exp", "sigmoid", "tanh", "arctan", "gaussian", "square", "silu")


class InputError(ValueError):
    """Dimension mismatch or malformed object."""


class UnsupportedActivation(ValueError):
    """Raised when an exact operation meets a non-piecewise-linear activation."""


def rat(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {value!r}") from exc
    raise InputError(f"not an exact rational: {value!r}")


@dataclass(frozen=True)
class Piece:
    """One linear cell of an activation: ``slope*x + intercept`` on an interval.

    ``lo``/``hi`` of ``None`` stand for -inf/+inf.
    """

    lo: Optional[Fraction]
    lo_closed: bool
    hi: Optional[Fraction]
    hi_closed: bool
    slope: Fraction
    intercept: Fraction

    def __post_init__(self):
        if self.lo is None and self.lo_closed:
            raise InputError("-inf endpoint cannot be closed")
        if self.hi is None and self.hi_closed:
            raise InputError("+inf endpoint cannot be closed")
        if self.lo is not None and self.hi is not None:
            if self.lo > self.hi:
                raise InputError(f"empty piece [{self.lo}, {self.hi}]")
            if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
                raise InputError("point piece must be closed on both ends")

    def contains(self, x: Fraction) -> bool:
        if self.lo is not None:
            if x < self.lo or (x == self.lo and not self.lo_closed):
                return False
        if self.hi is not None:
            if x > self.hi or (x == self.hi and not self.hi_closed):
                return False
        return True

    def __call__(self, x: Fraction) -> Fraction:
        return self.slope * x + self.intercept


def _check_partition(pieces: Sequence[Piece]) -> None:
    if not pieces:
        raise InputError("activation needs at least one piece")
    if pieces[0].lo is not None:
        raise InputError("first piece must start at -inf")
    if pieces[-1].hi is not None:
        raise InputError("last piece must end at +inf")
    for left, right in zip(pieces, pieces[1:]):
        if left.hi is None or right.lo is None or left.hi != right.lo:
            raise InputError("pieces must be adjacent and sorted")
        # the shared endpoint belongs to exactly one side
        if left.hi_closed == right.lo_closed:
            raise InputError(f"endpoint {left.hi} must be owned by exactly one piece")


@dataclass(frozen=True)
class Activation:
    """A named activation.  Piecewise-linear ones carry their pieces.

    Non-piecewise-linear tags (``sigmoid`` etc.) are representable with an empty
    piece list so files can name them; exact evaluation then raises
    :class:`UnsupportedActivation`.
    """

    name: str
    pieces: tuple = ()
    params: tuple = ()

    def __post_init__(self):
        if self.name in NONLINEAR_TAGS:
            if self.pieces:
                raise InputError(f"{self.name} has no piece list")
            return
        _check_partition(self.pieces)

    @property
    def piecewise_linear(self) -> bool:
        return bool(self.pieces)

    @property
    def tag(self) -> str:
        if self.params:
            return f"{self.name}({','.join(str(p) for p in self.params)})"
        return self.name

    def piece_index(self, x: Fraction) -> int:
        if not self.pieces:
            raise UnsupportedActivation(f"activation {self.tag} is not piecewise linear")
        for i, piece in enumerate(self.pieces):
            if piece.contains(x):
                return i
        raise AssertionError("pieces do not cover the real line")  # excluded by invariant

    def __call__(self, x: RationalLike) -> Fraction:
        x = rat(x)
        return self.pieces[self.piece_index(x)](x)


def _p(lo, lo_closed, hi, hi_closed, slope, intercept) -> Piece:
    return Piece(
        None if lo is None else rat(lo), lo_closed,
        None if hi is None else rat(hi), hi_closed,
        rat(slope), rat(intercept),
    )


def identity() -> Activation:
    return Activation("id", (_p(None, False, None, False, 1, 0),))


def relu() -> Activation:
    return Activation("relu", (_p(None, False, 0, False, 0, 0), _p(0, True, None, False, 1, 0)))


def leaky_relu(alpha: RationalLike) -> Activation:
    alpha = rat(alpha)
    return Activation(
        "leaky_relu",
        (_p(None, False, 0, False, alpha, 0), _p(0, True, None, False, 1, 0)),
        (alpha,),
    )


def heaviside() -> Activation:
    # H(0) = 1
    return Activation("heaviside", (_p(None, False, 0, False, 0, 0), _p(0, True, None, False, 0, 1)))


def sign() -> Activation:
    return Activation(
        "sign",
        (_p(None, False, 0, False, 0, -1), _p(0, True, 0, True, 0, 0), _p(0, False, None, False, 0, 1)),
    )


def absolute() -> Activation:
    return Activation("abs", (_p(None, False, 0, False, -1, 0), _p(0, True, None, False, 1, 0)))


def hard_sigmoid(alpha: RationalLike) -> Activation:
    """-1 below -alpha, x/alpha on the closed middle interval, 1 above alpha."""
    alpha = rat(alpha)
    if alpha <= 0:
        raise InputError("hard_sigmoid needs alpha > 0")
    return Activation(
        "hard_sigmoid",
        (
            _p(None, False, -alpha, False, 0, -1),
            _p(-alpha, True, alpha, True, 1 / alpha, 0),
            _p(alpha, False, None, False, 0, 1),
        ),
        (alpha,),
    )


def custom(pieces: Iterable[Piece]) -> Activation:
    return Activation("custom", tuple(pieces))


def nonlinear(name: str) -> Activation:
    if name not in NONLINEAR_TAGS:
        raise InputError(f"unknown activation {name!r}")
    return Activation(name)


_BUILTIN = {
    "id": identity,
    "relu": relu,
    "heaviside": heaviside,
    "sign": sign,
    "abs": absolute,
}
_PARAM = {"leaky_relu": leaky_relu, "hard_sigmoid": hard_sigmoid}
_TAG_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


def activation(tag: str) -> Activation:
    """Build an activation from a tag such as ``relu`` or ``leaky_relu(1/2)``."""
    m = _TAG_RE.match(tag)
    if not m:
        raise InputError(f"bad activation tag {tag!r}")
    name, arg = m.group(1), m.group(2)
    if name in _BUILTIN and arg is None:
        return _BUILTIN[name]()
    if name in _PARAM and arg:
        return _PARAM[name](rat(arg))
    if name in NONLINEAR_TAGS and arg is None:
        return nonlinear(name)
    raise InputError(f"unknown activation tag {tag!r}")


# -- networks -----------------------------------------------------------------


@dataclass(frozen=True)
class Layer:
    weights: tuple  # rows = nodes of this layer, cols = nodes of the previous layer
    bias: tuple
    activations: tuple

    @property
    def width(self) -> int:
        return len(self.bias)

    def pre_activation(self, i: int, prev: Sequence[Fraction]) -> Fraction:
        s = self.bias[i]
        for w, y in zip(self.weights[i], prev):
            if w:
                s += w * y
        return s


def make_layer(weights, bias, activations) -> Layer:
    acts = tuple(a if isinstance(a, Activation) else activation(a) for a in activations)
    return Layer(
        tuple(tuple(rat(w) for w in row) for row in weights),
        tuple(rat(b) for b in bias),
        acts,
    )


@dataclass(frozen=True)
class Network:
    input_dim: int
    layers: tuple

    def __post_init__(self):
        if not self.layers:
            raise InputError("network needs at least one layer")
        if self.input_dim < 0:
            raise InputError("negative input dimension")
        prev = self.input_dim
        for ell, layer in enumerate(self.layers):
            if len(layer.weights) != layer.width or len(layer.activations) != layer.width:
                raise InputError(f"layer {ell}: weights/bias/activations disagree in size")
            for row in layer.weights:
                if len(row) != prev:
                    raise InputError(f"layer {ell}: expected {prev} columns, got {len(row)}")
            prev = layer.width

    @property
    def output_dim(self) -> int:
        return self.layers[-1].width

    @property
    def num_nodes(self) -> int:
        return sum(layer.width for layer in self.layers)

    @property
    def num_edges(self) -> int:
        dims = [self.input_dim] + [layer.width for layer in self.layers]
        return sum(a * b for a, b in zip(dims, dims[1:]))

    def nodes(self):
        for ell, layer in enumerate(self.layers):
            for i, act in enumerate(layer.activations):
                yield ell, i, act

    def activation_names(self) -> set:
        return {act.name for _, _, act in self.nodes()}


def make_network(input_dim: int, layers) -> Network:
    """Convenience constructor from nested lists; ``layers`` holds (W, b, acts) triples."""
    return Network(input_dim, tuple(
        layer if isinstance(layer, Layer) else make_layer(*layer) for layer in layers
    ))


def evaluate(net: Network, x: Sequence[RationalLike]) -> tuple:
    if len(x) != net.input_dim:
        raise InputError(f"expected {net.input_dim} inputs, got {len(x)}")
    y = tuple(rat(v) for v in x)
    for layer in net.layers:
        y = tuple(act(layer.pre_activation(i, y)) for i, act in enumerate(layer.activations))
    return y


def trace(net: Network, x: Sequence[RationalLike]) -> list:
    """Per-layer (pre-activation, output) tuples; used for phase extraction."""
    y = tuple(rat(v) for v in x)
    out = []
    for layer in net.layers:
        s = tuple(layer.pre_activation(i, y) for i in range(layer.width))
        y = tuple(act(v) for act, v in zip(layer.activations, s))
        out.append((s, y))
    return out


# -- specifications -------------------------------------------------------------


@dataclass(frozen=True)
class LinearConstraint:
    coeffs: tuple
    cmp: str
    rhs: Fraction

    def __post_init__(self):
        if self.cmp not in COMPARATORS:
            raise InputError(f"bad comparator {self.cmp!r}")

    def lhs(self, p: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for a, v in zip(self.coeffs, p):
            if a:
                total += a * v
        return total

    def holds(self, p: Sequence[Fraction]) -> bool:
        v = self.lhs(p)
        if self.cmp == LE:
            return v <= self.rhs
        if self.cmp == LT:
            return v < self.rhs
        return v == self.rhs


def constraint(coeffs, cmp, rhs) -> LinearConstraint:
    """Also accepts ``>=`` and ``>`` and flips them into the stored form."""
    coeffs = tuple(rat(c) for c in coeffs)
    rhs = rat(rhs)
    if cmp in (">=", ">"):
        return LinearConstraint(tuple(-c for c in coeffs), LE if cmp == ">=" else LT, -rhs)
    if cmp == "==":
        cmp = EQ
    return LinearConstraint(coeffs, cmp, rhs)


@dataclass(frozen=True)
class LinearSpec:
    num_vars: int
    constraints: tuple = ()

    def __post_init__(self):
        for c in self.constraints:
            if len(c.coeffs) != self.num_vars:
                raise InputError(
                    f"constraint has {len(c.coeffs)} coefficients, spec has {self.num_vars} vars"
                )

    def __len__(self):
        return len(self.constraints)


def make_spec(num_vars: int, rows=()) -> LinearSpec:
    return LinearSpec(num_vars, tuple(
        r if isinstance(r, LinearConstraint) else constraint(*r) for r in rows
    ))


def check_spec(spec: LinearSpec, p: Sequence[RationalLike]) -> bool:
    if len(p) != spec.num_vars:
        raise InputError(f"expected {spec.num_vars} values, got {len(p)}")
    p = [rat(v) for v in p]
    return all(c.holds(p) for c in spec.constraints)


@dataclass(frozen=True)
class ReachInstance:
    network: Network
    input_spec: LinearSpec
    output_spec: LinearSpec

    def __post_init__(self):
        if self.input_spec.num_vars != self.network.input_dim:
            raise InputError("input spec dimension does not match the network")
        if self.output_spec.num_vars != self.network.output_dim:
            raise InputError("output spec dimension does not match the network")


def accepts(inst: ReachInstance, x: Sequence[RationalLike]) -> bool:
    """True iff ``x`` satisfies the input spec and its image the output spec."""
    return check_spec(inst.input_spec, x) and check_spec(inst.output_spec, evaluate(inst.network, x))


def bitsize(q: Fraction) -> int:
    return abs(q.numerator).bit_length() + 1 + q.denominator.bit_length()


def spec_size(spec: LinearSpec) -> int:
    # sparse measure: zero coefficients are free
    return sum(sum(bitsize(a) for a in c.coeffs if a) + bitsize(c.rhs) for c in spec.constraints)


def network_size(net: Network) -> int:
    return sum(
        sum(bitsize(w) for row in layer.weights for w in row if w) + sum(bitsize(b) for b in layer.bias)
        for layer in net.layers
    )


def instance_size(inst: ReachInstance) -> int:
    """Bit size of both specs plus every nonzero weight, plus every bias."""
    return spec_size(inst.input_spec) + spec_size(inst.output_spec) + network_size(inst.network)
