"""Linear constants and coefficients from 1, addition and doubling; multiplication
from a squaring relation."""

from __future__ import annotations

from typing import Callable, Optional

from ..core import InputError, activation, rat
from ..csp import FnGraph, One, Plus

Fresh = Callable[[], int]


def _binary(n: int, base: Optional[int], dst: int, fresh: Fresh) -> list:
    """Constraints forcing ``dst = n * base`` (``base`` None means the constant 1)."""
    bits = [k for k in range(n.bit_length()) if n >> k & 1]
    top = n.bit_length() - 1
    out = []
    powers = {}
    if base is None:
        p = dst if n == 1 else fresh()
        out.append(One(p))
    else:
        p = base
    powers[0] = p
    for k in range(1, top + 1):
        nxt = dst if (k == top and len(bits) == 1) else fresh()
        out.append(Plus(p, p, nxt))
        p = nxt
        powers[k] = p
    if len(bits) > 1:
        # largest power first, then the lower set bits
        terms = [powers[k] for k in reversed(bits)]
        acc = terms[0]
        for i, t in enumerate(terms[1:], start=1):
            target = dst if i == len(terms) - 1 else fresh()
            out.append(Plus(acc, t, target))
            acc = target
    return out


def encode_integer(n: int, var: int, fresh: Fresh) -> list:
    """Force ``var = n`` with a doubling chain; uses at most 2*floor(log2 n)+2 constraints."""
    if not isinstance(n, int) or n < 1:
        raise InputError(f"encode_integer needs a positive integer, got {n!r}")
    return _binary(n, None, var, fresh)


def scale_integer(n: int, src: int, dst: int, fresh: Fresh, zero: int) -> list:
    """Force ``dst = n * src`` for an integer ``n >= 1``."""
    if n < 1:
        raise InputError("scale factor must be positive")
    if n == 1:
        return [Plus(src, zero, dst)]
    return _binary(n, src, dst, fresh)


def encode_rational_coefficient(q, x: int, t: int, fresh: Fresh, zero: Optional[int] = None) -> list:
    """Constraints forcing ``t = q * x``.

    ``q = p/r`` becomes ``r*t = |p|*x`` (negated through ``zero`` when p < 0).
    A ``zero`` variable is created (and pinned by ``z + z = z``) when not given.
    """
    q = rat(q)
    out = []
    if zero is None:
        zero = fresh()
        out.append(Plus(zero, zero, zero))
    if q == 0:
        out.append(Plus(zero, zero, t))
        return out
    p, r = abs(q.numerator), q.denominator
    if q == 1:
        out.append(Plus(x, zero, t))
        return out
    px = fresh()
    out += scale_integer(p, x, px, fresh, zero) if p > 1 else [Plus(x, zero, px)]
    if q < 0:
        neg = fresh()
        out.append(Plus(px, neg, zero))  # neg = -p*x
        px = neg
    if r == 1:
        out.append(Plus(px, zero, t))
    else:
        # r*t = px: the chain on t ends in px itself
        out += _binary(r, t, px, fresh)
    return out


def mult_from_square(u: int, v: int, w: int, fresh: Fresh, square=None) -> list:
    """``w = u*v`` from ``(u+v)^2 = u^2 + v^2 + 2w``."""
    sq = square if square is not None else activation("square")
    s, a, b, c, d, e = (fresh() for _ in range(6))
    return [
        Plus(u, v, s),
        FnGraph(sq, s, a),
        FnGraph(sq, u, b),
        FnGraph(sq, v, c),
        Plus(b, c, d),
        Plus(d, e, a),  # e = (u+v)^2 - u^2 - v^2
        Plus(w, w, e),
    ]


def integer_chain_length(n: int) -> int:
    """Number of constraints ``encode_integer`` emits for ``n``."""
    return n.bit_length() + bin(n).count("1") - 1
