"""JSON text formats for networks, specs, instances, CSPs, verdicts and receipts.

Rationals are always written as ``"p/q"`` strings, so parse(serialize(x)) == x
bit for bit.
"""

from __future__ import annotations

import json
from fractions import Fraction

import jsonschema

from .core import (
    Activation, InputError, LinearSpec, Network, Piece, ReachInstance, activation, constraint,
    make_layer, rat,
)
from .csp import CspInstance, FnGraph, Leq, Mul, One, Plus


class FormatError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ""):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__((f"{source}: " if source else "") + where + message)
        self.message = message
        self.line = line
        self.column = column


RATIONAL = {"type": ["string", "integer"]}
ACT = {
    "oneOf": [
        {"type": "string"},
        {
            "type": "object",
            "required": ["name", "pieces"],
            "properties": {
                "name": {"type": "string"},
                "params": {"type": "array", "items": RATIONAL},
                "pieces": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["lo", "lo_closed", "hi", "hi_closed", "slope", "intercept"],
                        "properties": {
                            "lo": RATIONAL, "hi": RATIONAL,
                            "lo_closed": {"type": "boolean"}, "hi_closed": {"type": "boolean"},
                            "slope": RATIONAL, "intercept": RATIONAL,
                        },
                    },
                },
            },
        },
    ]
}
NETWORK_SCHEMA = {
    "type": "object",
    "required": ["inputs", "layers"],
    "properties": {
        "inputs": {"type": "integer", "minimum": 0},
        "layers": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["weights", "biases", "activations"],
                "properties": {
                    "weights": {"type": "array", "items": {"type": "array", "items": RATIONAL}},
                    "biases": {"type": "array", "items": RATIONAL},
                    "activations": {"type": "array", "items": ACT},
                },
            },
        },
    },
}
SPEC_SCHEMA = {
    "type": "object",
    "required": ["vars", "constraints"],
    "properties": {
        "vars": {"type": "integer", "minimum": 0},
        "constraints": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["coeffs", "cmp", "rhs"],
                "properties": {
                    "coeffs": {"type": "array", "items": RATIONAL},
                    "cmp": {"enum": ["<=", "<", "=", ">=", ">"]},
                    "rhs": RATIONAL,
                },
            },
        },
    },
}
INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["network", "input_spec", "output_spec"],
    "properties": {"network": NETWORK_SCHEMA, "input_spec": SPEC_SCHEMA, "output_spec": SPEC_SCHEMA},
}
PAIR_SCHEMA = {
    "type": "object",
    "required": ["net1", "net2"],
    "properties": {"net1": NETWORK_SCHEMA, "net2": NETWORK_SCHEMA},
}
CSP_SCHEMA = {
    "type": "object",
    "required": ["vars", "constraints"],
    "properties": {
        "vars": {"type": "integer", "minimum": 0},
        "domain": {"enum": ["reals", "nonneg"]},
        "constraints": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["rel", "args"],
                "properties": {
                    "rel": {"enum": ["leq", "plus", "one", "mul", "fn"]},
                    "args": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    "act": ACT,
                },
            },
        },
    },
}


def fmt_rat(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# -- serialization ------------------------------------------------------------------


_BUILTIN_NAMES = {"id", "relu", "heaviside", "sign", "abs", "leaky_relu", "hard_sigmoid"}


def activation_to_obj(act: Activation):
    if act.name in _BUILTIN_NAMES or not act.piecewise_linear:
        if act.params:
            return f"{act.name}({fmt_rat(act.params[0])})"
        return act.name
    return {
        "name": act.name,
        "params": [fmt_rat(p) for p in act.params],
        "pieces": [
            {
                "lo": "-inf" if p.lo is None else fmt_rat(p.lo),
                "lo_closed": p.lo_closed,
                "hi": "inf" if p.hi is None else fmt_rat(p.hi),
                "hi_closed": p.hi_closed,
                "slope": fmt_rat(p.slope),
                "intercept": fmt_rat(p.intercept),
            }
            for p in act.pieces
        ],
    }


def network_to_obj(net: Network) -> dict:
    return {
        "inputs": net.input_dim,
        "layers": [
            {
                "weights": [[fmt_rat(w) for w in row] for row in layer.weights],
                "biases": [fmt_rat(b) for b in layer.bias],
                "activations": [activation_to_obj(a) for a in layer.activations],
            }
            for layer in net.layers
        ],
    }


def spec_to_obj(spec: LinearSpec) -> dict:
    return {
        "vars": spec.num_vars,
        "constraints": [
            {"coeffs": [fmt_rat(a) for a in c.coeffs], "cmp": c.cmp, "rhs": fmt_rat(c.rhs)}
            for c in spec.constraints
        ],
    }


def instance_to_obj(inst: ReachInstance, kind: str = "nnr") -> dict:
    return {
        "kind": kind,
        "network": network_to_obj(inst.network),
        "input_spec": spec_to_obj(inst.input_spec),
        "output_spec": spec_to_obj(inst.output_spec),
    }


def pair_to_obj(n1: Network, n2: Network) -> dict:
    return {"kind": "ne", "net1": network_to_obj(n1), "net2": network_to_obj(n2)}


_REL = {Leq: "leq", Plus: "plus", One: "one", Mul: "mul", FnGraph: "fn"}


def csp_to_obj(csp: CspInstance) -> dict:
    cons = []
    for c in csp.constraints:
        if isinstance(c, FnGraph):
            cons.append({"rel": "fn", "act": activation_to_obj(c.act), "args": [c.u, c.v]})
        elif isinstance(c, One):
            cons.append({"rel": "one", "args": [c.u]})
        elif isinstance(c, Leq):
            cons.append({"rel": "leq", "args": [c.u, c.v]})
        else:
            cons.append({"rel": _REL[type(c)], "args": [c.u, c.v, c.w]})
    return {"kind": "csp", "vars": csp.num_vars, "domain": csp.domain, "constraints": cons}


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"


# -- parsing -------------------------------------------------------------------------------


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno, exc.colno) from exc


def _validate(obj, schema, what):
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise FormatError(f"{what} at {path}: {exc.message}") from exc


def _end_from(v):
    if isinstance(v, str) and v.strip() in ("-inf", "inf", "+inf"):
        return None
    return rat(v)


def activation_from_obj(obj) -> Activation:
    if isinstance(obj, str):
        return activation(obj)
    pieces = tuple(
        Piece(_end_from(p["lo"]), p["lo_closed"], _end_from(p["hi"]), p["hi_closed"],
              rat(p["slope"]), rat(p["intercept"]))
        for p in obj["pieces"]
    )
    return Activation(obj["name"], pieces, tuple(rat(x) for x in obj.get("params", ())))


def _wrap(fn, *args):
    try:
        return fn(*args)
    except FormatError:
        raise
    except InputError as exc:
        raise FormatError(str(exc)) from exc


def network_from_obj(obj) -> Network:
    _validate(obj, NETWORK_SCHEMA, "network")

    def build():
        layers = tuple(
            make_layer(layer["weights"], layer["biases"],
                       [activation_from_obj(a) for a in layer["activations"]])
            for layer in obj["layers"]
        )
        return Network(obj["inputs"], layers)

    return _wrap(build)


def spec_from_obj(obj) -> LinearSpec:
    _validate(obj, SPEC_SCHEMA, "spec")

    def build():
        return LinearSpec(obj["vars"], tuple(
            constraint(c["coeffs"], c["cmp"], c["rhs"]) for c in obj["constraints"]
        ))

    return _wrap(build)


def instance_from_obj(obj) -> ReachInstance:
    _validate(obj, INSTANCE_SCHEMA, "instance")
    return _wrap(lambda: ReachInstance(
        network_from_obj(obj["network"]), spec_from_obj(obj["input_spec"]),
        spec_from_obj(obj["output_spec"]),
    ))


def pair_from_obj(obj):
    _validate(obj, PAIR_SCHEMA, "network pair")
    return network_from_obj(obj["net1"]), network_from_obj(obj["net2"])


def csp_from_obj(obj) -> CspInstance:
    _validate(obj, CSP_SCHEMA, "csp")
    arity = {"leq": 2, "plus": 3, "one": 1, "mul": 3, "fn": 2}
    cons = []
    for k, c in enumerate(obj["constraints"]):
        rel, args = c["rel"], c["args"]
        if len(args) != arity[rel]:
            raise FormatError(f"csp constraint {k}: {rel} takes {arity[rel]} arguments")
        if rel == "fn":
            if "act" not in c:
                raise FormatError(f"csp constraint {k}: fn needs an activation")
            cons.append(FnGraph(_wrap(activation_from_obj, c["act"]), *args))
        else:
            cons.append({"leq": Leq, "plus": Plus, "one": One, "mul": Mul}[rel](*args))
    return _wrap(lambda: CspInstance(obj["vars"], tuple(cons), obj.get("domain", "reals")))


def detect_kind(obj) -> str:
    if not isinstance(obj, dict):
        raise FormatError("top-level value must be an object")
    if "kind" in obj:
        return obj["kind"]
    if "network" in obj:
        return "nnr"
    if "net1" in obj:
        return "ne"
    if "layers" in obj:
        return "network"
    rows = obj.get("constraints") or []
    if rows and isinstance(rows[0], dict):
        return "csp" if "rel" in rows[0] else "spec"
    return "csp" if "domain" in obj else "spec"


def parse_any(text: str):
    """Parse any supported document; returns (kind, object)."""
    obj = loads(text)
    kind = detect_kind(obj)
    if kind in ("nnr", "vip"):
        return kind, instance_from_obj(obj)
    if kind == "ne":
        return kind, pair_from_obj(obj)
    if kind == "network":
        return kind, network_from_obj(obj)
    if kind == "spec":
        return kind, spec_from_obj(obj)
    if kind == "csp":
        return kind, csp_from_obj(obj)
    if kind == "instances":
        return kind, [instance_from_obj(o) for o in obj["instances"]]
    if kind == "pairs":
        return kind, [pair_from_obj(o) for o in obj["pairs"]]
    raise FormatError(f"unknown document kind {kind!r}")


def serialize_any(kind: str, obj) -> str:
    if kind in ("nnr", "vip"):
        return dumps(instance_to_obj(obj, kind))
    if kind == "ne":
        return dumps(pair_to_obj(*obj))
    if kind == "network":
        return dumps(network_to_obj(obj))
    if kind == "spec":
        return dumps(spec_to_obj(obj))
    if kind == "csp":
        return dumps(csp_to_obj(obj))
    if kind == "instances":
        return dumps({"kind": "instances", "instances": [instance_to_obj(i) for i in obj]})
    if kind == "pairs":
        return dumps({"kind": "pairs", "pairs": [pair_to_obj(*p) for p in obj]})
    raise FormatError(f"unknown document kind {kind!r}")


def verdict_to_obj(verdict) -> dict:
    out = {"status": verdict.status.value}
    if verdict.witness is not None:
        out["witness"] = [fmt_rat(v) for v in verdict.witness]
    out["stats"] = verdict.stats.as_dict()
    return out


def receipt_to_obj(r) -> dict:
    return {
        "reduction": r.reduction,
        "input_size": r.input_size,
        "output_size": r.output_size,
        "bound_factor": fmt_rat(r.bound_factor),
        "constant": r.constant,
        "within_bound": r.within_bound,
    }
