"""Exact reachability, interval-property and equivalence checking for
piecewise-linear networks, with the reductions between them."""

from .core import (
    Activation, InputError, LinearConstraint, LinearSpec, Network, Piece, ReachInstance,
    UnsupportedActivation, accepts, activation, check_spec, constraint, evaluate, make_layer,
    make_network, make_spec,
)
from .lp import feasible
from .solver import Outcome, Verdict, solve_ne, solve_reach, solve_vip

__version__ = "0.1.0"

__all__ = [
    "Activation", "InputError", "LinearConstraint", "LinearSpec", "Network", "Piece",
    "ReachInstance", "UnsupportedActivation", "accepts", "activation", "check_spec", "constraint",
    "evaluate", "make_layer", "make_network", "make_spec", "feasible", "Outcome", "Verdict",
    "solve_ne", "solve_reach", "solve_vip",
]
