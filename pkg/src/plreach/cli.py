"""plreach command line.

Every verb prints one JSON document on stdout (or writes it to --out).
Exit codes: 0 accept, 1 reject, 2 usage or format error, 3 unsupported
activation, 4 budget exhausted.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from fractions import Fraction
from pathlib import Path

from . import formats, reductions
from .core import InputError, LinearSpec, ReachInstance, UnsupportedActivation, rat
from .csp import NONNEG, CspInstance
from .formats import FormatError
from .generate import GenConfig, generate
from .solver import Outcome, default_threads, solve_ne, solve_reach, solve_vip

EXIT_OK, EXIT_NEG, EXIT_USAGE, EXIT_UNSUPPORTED, EXIT_BUDGET = 0, 1, 2, 3, 4

_EXIT_FOR = {
    Outcome.SAT: EXIT_OK, Outcome.HOLDS: EXIT_OK, Outcome.EQUIVALENT: EXIT_OK,
    Outcome.UNSAT: EXIT_NEG, Outcome.VIOLATED: EXIT_NEG, Outcome.DISTINCT: EXIT_NEG,
    Outcome.EXHAUSTED: EXIT_BUDGET,
}


class UsageError(Exception):
    pass


# -- io -------------------------------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _parse(path: str, *kinds):
    try:
        kind, obj = formats.parse_any(_read(path))
    except FormatError as exc:
        raise FormatError(exc.message, exc.line, exc.column, source=path) from exc
    if kinds and kind not in kinds:
        raise UsageError(f"{path}: expected {' or '.join(kinds)}, found {kind}")
    return kind, obj


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _threads(args) -> int:
    return args.threads if args.threads is not None else default_threads()


def _instance(args):
    """Instance from --instance, or from --net/--in/--out-spec."""
    if args.instance:
        return _parse(args.instance, "nnr", "vip")[1]
    if not args.net:
        raise UsageError("give --instance or --net (with optional --in/--out-spec)")
    net = _parse(args.net, "network")[1]
    ins = _parse(args.input_spec, "spec")[1] if args.input_spec else LinearSpec(net.input_dim, ())
    outs = _parse(args.out_spec, "spec")[1] if args.out_spec else LinearSpec(net.output_dim, ())
    try:
        return ReachInstance(net, ins, outs)
    except InputError as exc:
        raise FormatError(str(exc)) from exc


def _verdict(args, kind: str, verdict) -> int:
    obj = {"problem": kind, **formats.verdict_to_obj(verdict)}
    _emit(args, formats.dumps(obj))
    return _EXIT_FOR[verdict.status]


# -- decision verbs --------------------------------------------------------------------------------


def cmd_reach(args) -> int:
    inst = _instance(args)
    return _verdict(args, "nnr", solve_reach(inst, args.budget, _threads(args)))


def cmd_vip(args) -> int:
    inst = _instance(args)
    return _verdict(args, "vip", solve_vip(inst, args.budget, _threads(args)))


def cmd_ne(args) -> int:
    if args.instance:
        n1, n2 = _parse(args.instance, "ne")[1]
    elif args.net1 and args.net2:
        n1 = _parse(args.net1, "network")[1]
        n2 = _parse(args.net2, "network")[1]
    else:
        raise UsageError("give --instance or both --net1 and --net2")
    try:
        verdict = solve_ne(n1, n2, args.budget, _threads(args))
    except InputError as exc:
        raise FormatError(str(exc)) from exc
    return _verdict(args, "ne", verdict)


# -- reductions -------------------------------------------------------------------------------------


def _allowed(args):
    return set(args.allow.split(",")) if args.allow else None


def _reduce(src_kind: str, target: str, obj, args):
    """Returns (reduction name, output kind, output object)."""
    route = (src_kind, target)
    if route == ("nnr", "csp"):
        return "nnr_to_csp", "csp", reductions.nnr_to_csp(obj)
    if route == ("csp", "nnr"):
        return "csp_to_nnr", "nnr", reductions.csp_to_nnr(obj)
    if route == ("network", "relu"):
        return "eliminate_id", "network", reductions.eliminate_id(obj)
    if route == ("nnr", "relu"):
        return "eliminate_id", "nnr", reductions.eliminate_id_instance(obj)
    if route == ("ne", "connr"):
        return "ne_to_connr", "nnr", reductions.ne_to_connr(*obj, allowed=_allowed(args))
    if route == ("nnr", "cone"):
        return "nnr_to_cone", "ne", reductions.nnr_to_cone(obj, _allowed(args))
    if route == ("vip", "connr"):
        return "vip_to_connr", "instances", reductions.vip_to_connr(obj)
    if route == ("nnr", "covip"):
        variant = args.variant or reductions.pick_variant(_allowed(args))
        return "nnr_to_covip", "vip", reductions.nnr_to_covip(obj, variant)
    if route == ("ne", "vip"):
        variant = args.variant or "heaviside"
        return "ne_to_vip", "vip", reductions.ne_to_vip(*obj, variant=variant, allowed=_allowed(args))
    if route == ("vip", "ne"):
        return "vip_to_ne", "ne", reductions.vip_to_ne(obj, _allowed(args))
    if route == ("ne", "single"):
        return "to_single_output", "pairs", reductions.to_single_output("NE", obj)
    if route == ("vip", "single"):
        return "to_single_output", "instances", reductions.to_single_output("VIP", obj)
    raise UsageError(f"no reduction from {src_kind} to {target}")


def cmd_reduce(args) -> int:
    kind, obj = _parse(args.input)
    if args.source and args.source != kind:
        if {args.source, kind} == {"nnr", "vip"}:
            kind = args.source
        else:
            raise UsageError(f"{args.input} holds a {kind} document, not {args.source}")
    name, out_kind, result = _reduce(kind, args.target, obj, args)
    text = formats.serialize_any(out_kind, result)
    out = args.out or str(Path(args.input).with_suffix("")) + f".{args.target}.json"
    Path(out).write_text(text, encoding="utf-8")
    rec = formats.receipt_to_obj(reductions.receipt(name, obj, result))
    Path(out + ".receipt").write_text(formats.dumps(rec), encoding="utf-8")
    sys.stdout.write(formats.dumps({"output": out, "receipt": out + ".receipt", **rec}))
    return EXIT_OK


# -- gadgets -------------------------------------------------------------------------------------------


def _fresh_from(start: int):
    counter = itertools.count(start)
    return lambda: next(counter)


def _csp_report(name: str, constraints, num_vars: int, extra: dict) -> dict:
    csp = CspInstance(num_vars, tuple(constraints))
    return {"gadget": name, "constraints": len(constraints), **extra,
            "csp": formats.csp_to_obj(csp)}


def cmd_gadget(args) -> int:
    from .gadgets import encodings
    from .gadgets.numeric import build_fbar, midpoint_witness, numeric_fn
    from .gadgets.polynomial import Polynomial, poly_to_square

    g = args.gadget
    if g == "integer":
        if args.n is None:
            raise UsageError("integer needs --n")
        fresh = _fresh_from(1)
        cons = encodings.encode_integer(args.n, 0, fresh)
        report = _csp_report(g, cons, fresh(), {"n": args.n, "var": 0})
    elif g == "rational":
        if args.q is None:
            raise UsageError("rational needs --q")
        fresh = _fresh_from(2)
        cons = encodings.encode_rational_coefficient(rat(args.q), 0, 1, fresh)
        report = _csp_report(g, cons, fresh(), {"q": formats.fmt_rat(rat(args.q)), "x": 0, "t": 1})
    elif g == "mult":
        fresh = _fresh_from(3)
        cons = encodings.mult_from_square(0, 1, 2, fresh)
        report = _csp_report(g, cons, fresh(), {"u": 0, "v": 1, "w": 2})
    elif g == "square":
        if not args.poly:
            raise UsageError("square needs --poly, coefficients lowest degree first")
        p = Polynomial(tuple(rat(c) for c in args.poly.split(",")))
        combo = poly_to_square(p)
        report = {
            "gadget": g, "polynomial": str(p),
            "terms": [{"shift": k, "scale": formats.fmt_rat(s)} for k, s in combo.terms],
            "correction": str(combo.correction),
        }
    elif g in ("positive", "unit"):
        return _interpret(args)
    elif g == "witness":
        f = numeric_fn(args.fn)
        w = midpoint_witness(f, rat(args.a), rat(args.b), args.depth)
        report = {"gadget": g, "fn": args.fn, "a": args.a, "b": args.b, "depth": args.depth}
        if w is None:
            report["witness"] = None
            _emit(args, formats.dumps(report))
            return EXIT_NEG
        fbar = build_fbar(f, w.c, w.d)
        report.update({
            "witness": {"c": formats.fmt_rat(w.c), "d": formats.fmt_rat(w.d), "gap": w.gap},
            "fbar": {"at_0": float(fbar(0)), "at_1": float(fbar(1)),
                     "at_half": float(fbar(Fraction(1, 2)))},
        })
        if args.plot:
            from .plots import fbar_plot

            report["figure"] = fbar_plot(f, fbar, w.c, w.d, args.plot)
    else:
        raise UsageError(f"unknown gadget {g}")
    _emit(args, formats.dumps(report))
    return EXIT_OK


def _interpret(args) -> int:
    from .gadgets.interpret import interpret_positive, interpret_unit_interval, numeric_search

    if not args.input:
        raise UsageError(f"{args.gadget} needs --in with a CSP file")
    csp = _parse(args.input, "csp")[1]
    if args.gadget == "positive":
        result = interpret_positive(csp)
        report = {"gadget": "positive", "pairs": [list(p) for p in result.pairs],
                  "csp": formats.csp_to_obj(result.csp)}
    else:
        if csp.domain != NONNEG:
            raise UsageError("unit needs a CSP over the non-negative reals")
        result = interpret_unit_interval(csp, args.n or 1)
        sysm = result.system
        report = {"gadget": "unit", "n": result.n,
                  "equations": [str(e) for e in sysm.eqs],
                  "inequalities": [str(g) for g in sysm.ineqs],
                  "box": f"(0, 1/{result.n}]"}
    if args.search:
        if args.gadget == "positive":
            found = numeric_search(result.csp, seed=args.seed)
        else:
            found = result.search(seed=args.seed)
        report["search"] = {"found": found.found, "residual": found.residual}
    _emit(args, formats.dumps(report))
    return EXIT_OK


def cmd_verify_identity(args) -> int:
    from .gadgets.numeric import verify_identity

    report = verify_identity(args.tag, args.samples, args.tol, args.seed)
    obj = report.as_dict()
    if args.plot:
        from .plots import identity_error_plot

        obj["figure"] = identity_error_plot(report, args.plot, args.tol)
    _emit(args, formats.dumps(obj))
    return EXIT_OK if report.passed else EXIT_NEG


# -- generator / formats ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    comparators = tuple(args.comparators.split(","))
    try:
        cfg = GenConfig(
            seed=args.seed, input_dim=args.input_dim, depth=args.depth, width=args.width,
            output_dim=args.output_dim, activation_set=tuple(args.activations.split(",")),
            max_numerator=args.max_num, max_denominator=args.max_den,
            input_constraints=args.input_constraints, output_constraints=args.output_constraints,
            comparators=comparators, planted=args.planted,
        )
    except InputError as exc:
        raise UsageError(str(exc)) from exc
    _emit(args, formats.serialize_any("nnr", generate(cfg)))
    return EXIT_OK


def cmd_fmt(args) -> int:
    kind, obj = _parse(args.input)
    _emit(args, formats.serialize_any(kind, obj))
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------------------


def _solver_flags(p, instance_kind: str):
    p.add_argument("--instance", help=f"{instance_kind} instance file")
    p.add_argument("--budget", type=int, help="cap on search node expansions (exit 4)")
    p.add_argument("--threads", type=int, help="worker threads (default $PLREACH_THREADS or 1)")
    p.add_argument("--out", help="write the verdict here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="plreach", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    for verb, help_text in (("reach", "decide reachability"),
                            ("vip", "decide the interval property")):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("--net", help="network file")
        p.add_argument("--in", dest="input_spec", help="input spec file")
        p.add_argument("--out-spec", help="output spec file")
        _solver_flags(p, verb)
        p.set_defaults(func=cmd_reach if verb == "reach" else cmd_vip)

    p = sub.add_parser("ne", help="decide network equivalence")
    p.add_argument("--net1")
    p.add_argument("--net2")
    _solver_flags(p, "ne pair")
    p.set_defaults(func=cmd_ne)

    p = sub.add_parser("reduce", help="apply a reduction and write a receipt")
    p.add_argument("--from", dest="source", choices=["nnr", "vip", "ne", "csp", "network"])
    p.add_argument("--to", dest="target", required=True,
                   choices=["csp", "nnr", "relu", "connr", "cone", "covip", "vip", "ne", "single"])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--variant", choices=list(reductions.VARIANTS))
    p.add_argument("--allow", help="comma-separated activation names the target may use")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("gadget", help="emit or evaluate a gadget")
    p.add_argument("gadget", choices=["integer", "rational", "mult", "square", "witness",
                                      "positive", "unit"])
    p.add_argument("--n", type=int)
    p.add_argument("--q")
    p.add_argument("--poly")
    p.add_argument("--fn", default="sigmoid")
    p.add_argument("--a", default="0")
    p.add_argument("--b", default="1")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--in", dest="input")
    p.add_argument("--search", action="store_true", help="run the numeric search oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", help="figure path (witness only)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("verify-identity", help="check a multiplication identity numerically")
    p.add_argument("--tag", required=True,
                   choices=["exp_mul", "gaussian_pow4", "arctan_cubic", "cosine_quad"])
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot", help="figure path for the error scatter")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_identity)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input-dim", type=int, default=2)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--width", type=int, default=4)
    p.add_argument("--output-dim", type=int, default=1)
    p.add_argument("--activations", default="relu")
    p.add_argument("--max-num", type=int, default=5)
    p.add_argument("--max-den", type=int, default=3)
    p.add_argument("--input-constraints", type=int, default=2)
    p.add_argument("--output-constraints", type=int, default=1)
    p.add_argument("--comparators", default="<=,<")
    p.add_argument("--planted", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fmt", help="parse and re-serialize a file canonically")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fmt)
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FormatError, InputError) as exc:
        print(f"plreach: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnsupportedActivation as exc:
        print(f"plreach: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
