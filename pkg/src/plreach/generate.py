"""Seeded random reachability instances."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    EQ, LE, LT, InputError, LinearConstraint, LinearSpec, ReachInstance, activation, evaluate,
    make_layer, make_network,
)

DEFAULT_ACTIVATIONS = ("relu",)
ORACLE_ACTIVATIONS = ("id", "relu", "leaky_relu(1/2)", "heaviside", "sign", "abs")


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    input_dim: int = 2
    depth: int = 2
    width: int = 4
    output_dim: int = 1
    activation_set: tuple = DEFAULT_ACTIVATIONS
    max_numerator: int = 5
    max_denominator: int = 3
    input_constraints: int = 2
    output_constraints: int = 1
    comparators: tuple = (LE, LT)
    planted: bool = False

    def __post_init__(self):
        for name in ("input_dim", "depth", "width", "output_dim", "max_numerator",
                     "max_denominator"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be at least 1")
        if self.input_constraints < 0 or self.output_constraints < 0:
            raise InputError("constraint counts must be non-negative")
        if not self.activation_set:
            raise InputError("activation_set is empty")
        bad = set(self.comparators) - {LE, LT, EQ}
        if bad or not self.comparators:
            raise InputError(f"comparators must be drawn from <=, <, =; got {self.comparators}")


class _Draw:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)

    def rational(self) -> Fraction:
        c = self.cfg
        return Fraction(self.rng.randint(-c.max_numerator, c.max_numerator),
                        self.rng.randint(1, c.max_denominator))

    def nonzero_row(self, n: int) -> tuple:
        while True:
            row = tuple(self.rational() for _ in range(n))
            if any(row):
                return row

    def spec(self, n: int, count: int, point=None) -> LinearSpec:
        rows = []
        for _ in range(count):
            coeffs = self.nonzero_row(n)
            cmp = self.rng.choice(self.cfg.comparators)
            if point is None:
                rhs = self.rational()
            else:
                lhs = sum(a * v for a, v in zip(coeffs, point))
                slack = abs(self.rational())
                if cmp == LT and slack == 0:
                    slack = Fraction(1, self.cfg.max_denominator)
                rhs = lhs if cmp == EQ else lhs + slack
            rows.append(LinearConstraint(coeffs, cmp, rhs))
        return LinearSpec(n, tuple(rows))


def generate(cfg: GenConfig) -> ReachInstance:
    """Dense net of ``depth`` hidden layers plus an output layer, and random specs.

    With ``planted`` a witness input is drawn first and every row is chosen to
    hold at it, so the instance is satisfiable.
    """
    d = _Draw(cfg)
    layers, prev = [], cfg.input_dim
    widths = [cfg.width] * cfg.depth + [cfg.output_dim]
    for w in widths:
        weights = [[d.rational() for _ in range(prev)] for _ in range(w)]
        bias = [d.rational() for _ in range(w)]
        acts = [activation(d.rng.choice(cfg.activation_set)) for _ in range(w)]
        layers.append(make_layer(weights, bias, acts))
        prev = w
    net = make_network(cfg.input_dim, layers)
    witness = y = None
    if cfg.planted:
        witness = tuple(d.rational() for _ in range(cfg.input_dim))
        y = evaluate(net, witness)
    input_spec = d.spec(cfg.input_dim, cfg.input_constraints, witness)
    output_spec = d.spec(cfg.output_dim, cfg.output_constraints, y)
    return ReachInstance(net, input_spec, output_spec)


def oracle_config(seed: int) -> GenConfig:
    """Small mixed-activation instance: at most 3 inputs and 8 nodes."""
    rng = random.Random(seed)
    input_dim = rng.randint(1, 3)
    depth = rng.randint(1, 2)
    width = rng.randint(1, 7 // depth)
    return GenConfig(
        seed=seed, input_dim=input_dim, depth=depth, width=width, output_dim=1,
        activation_set=ORACLE_ACTIVATIONS, input_constraints=rng.randint(0, 3),
        output_constraints=rng.randint(1, 2), comparators=(LE, LT, EQ),
        planted=rng.random() < 0.3,
    )
