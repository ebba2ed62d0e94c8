"""Command-line front end.

Exit codes: 0 when every identity check passes, 1 when at least one fails,
2 for usage, file-format and expression errors. Verdicts on Killing
candidates are reported, not failed: a candidate that is not Killing is
flagged as a suspected typo in the discrepancy notes.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import catalog, suites
from .catalog import SpecError, UnknownSpacetimeError
from .energy import EMFieldSpec, UnsupportedChartError
from .expr import ExprError
from .geometry import GeometryError


class UsageError(Exception):
    pass


def _param(text):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=value, got '{text}'")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter value for '{name}' is not a number") from None


def _radii(text):
    try:
        r = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad radius list '{text}'") from None
    if not r or any(x <= 0 for x in r):
        raise argparse.ArgumentTypeError("radii must be positive")
    return r


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser():
    p = argparse.ArgumentParser(prog="tetradlab",
                                description="Orthonormal-coframe geometry checks in Cl(1,3).")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=_positive_int, default=64, help="sample points (default 64)")
    common.add_argument("--tol", type=float, default=1e-9, help="identity tolerance (default 1e-9)")
    common.add_argument("--verdict-tol", type=float, default=1e-6,
                        help="tolerance for candidate verdicts (default 1e-6)")
    common.add_argument("--seed", type=int, default=42, help="sampling seed (default 42)")
    common.add_argument("--out", help="write the JSON report here; text goes to stdout")
    common.add_argument("--json", action="store_true", help="print the JSON report to stdout")

    spec_args = argparse.ArgumentParser(add_help=False)
    spec_args.add_argument("spec", help="builtin name or path to a JSON spec")
    spec_args.add_argument("--param", type=_param, action="append", default=[],
                           metavar="NAME=VALUE", help="override a spec parameter (repeatable)")
    spec_args.add_argument("--scale-factor", help="scale factor R(t) for the builtin friedmann spec")

    sub.add_parser("analyze", parents=[spec_args, common], help="geometry identity suite")
    sub.add_parser("killing", parents=[spec_args, common], help="Killing candidate verdicts")
    q = sub.add_parser("em", parents=[spec_args, common], help="Maxwell field checks")
    q.add_argument("--field", required=True, help="JSON field file {F: {...}, J: [...]}")
    q = sub.add_parser("grav", parents=[spec_args, common], help="Sparling identity and superpotentials")
    q.add_argument("--m2", type=float, default=0.0, help="cosmological term m^2 (default 0)")
    q = sub.add_parser("mass", parents=[spec_args, common], help="mass surface integral")
    q.add_argument("--radii", type=_radii, required=True, help="comma separated radii")
    q = sub.add_parser("selftest", parents=[common], help="algebra and expression invariants")
    q.add_argument("--expressions", type=int, default=500, help="random expressions (default 500)")
    q = sub.add_parser("export", help="write a builtin spec as JSON")
    q.add_argument("spec", help="builtin name")
    q.add_argument("--out", help="output path (stdout otherwise)")
    q.add_argument("--param", type=_param, action="append", default=[], metavar="NAME=VALUE")
    q.add_argument("--scale-factor")
    sub.add_parser("list", help="list builtin spacetimes")
    return p


def load_spec(args):
    if args.scale_factor is not None:
        if args.spec != "friedmann":
            raise UsageError("--scale-factor only applies to the builtin friedmann spec")
        spec = catalog.builtin("friedmann", scale_factor=args.scale_factor)
    else:
        spec = catalog.resolve(args.spec)
    if args.param:
        spec = spec.with_params(dict(args.param))
        spec.validate()
    return spec


def _emit(rep, args, out):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rep.to_json())
    if getattr(args, "json", False):
        out.write(rep.to_json())
    else:
        out.write(rep.to_text() + "\n")
    return 0 if rep.ok else 1


def run(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list":
        for name in catalog.BUILTIN_NAMES:
            spec = catalog.builtin(name)
            out.write(f"{name:24s} {spec.connection:13s} {len(spec.killing):2d} candidates\n")
        return 0
    if args.command == "export":
        spec = load_spec(args)
        text = spec.to_json()
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            out.write(text)
        return 0
    if args.command == "selftest":
        from . import selftest
        return _emit(selftest.run(args.seed, args.expressions), args, out)

    spec = load_spec(args)
    kw = dict(samples=args.samples, seed=args.seed, tol=args.tol, verdict_tol=args.verdict_tol)
    if args.command == "analyze":
        rep = suites.analyze(spec, **kw)
    elif args.command == "killing":
        rep = suites.killing(spec, **kw)
    elif args.command == "em":
        rep = suites.em(spec, EMFieldSpec.load(args.field), **kw)
    elif args.command == "grav":
        rep = suites.grav(spec, args.m2, **kw)
    else:
        rep = suites.mass(spec, args.radii, tol=args.tol)
    return _emit(rep, args, out)


def main(argv=None):
    try:
        return run(argv)
    except (SpecError, ExprError, UnknownSpacetimeError, UnsupportedChartError, GeometryError,
            UsageError, json.JSONDecodeError, OSError) as exc:
        print(f"tetradlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
