"""Command-line surface: build series, run verifiers, query residues, and
list the canonical indices used to address fixed points and directions.

Reports are deterministic JSON documents (sorted keys, rationals as "p/q"
strings); identical configuration and seed produce byte-identical output.
Exit codes: 0 all assertions pass, 1 assertion failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .core import (POLE, Q, RootNotRationalError, Specialization,
                   UnboundVariableError, eval_qsum, qsum_equal,
                   residue_dq_over_q)
from .checks import (ChecksError, degree_gap, degree_gap_factor_count,
                     dual_shape, level_duality_report, pairing,
                     pairing_residue_p1)
from .flags import (FlagShape, GeometryError, enumerate_degrees,
                    fixed_points_X, fixed_points_Y, subs_X, tangent_chars_X,
                    tangent_chars_Y)
from .recursion import (InvalidOrbitError, RecursionEngineError,
                        check_vanishing, complete_flag_shape, make_orbit_x,
                        make_orbit_y, root_substitution, verify_recursion)
from .series import (SeriesError, TW_Y, Variant, X_SMALL, build, descend,
                     series_to_json, weyl_check)

SCHEMA = "qkflag-report/1"

PASS, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QKFLAG_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    """Deterministic parallel map: results in submission order."""
    n = _threads()
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _parse_shape(text: str) -> FlagShape:
    try:
        return FlagShape.parse(text)
    except (GeometryError, ValueError) as exc:
        raise UsageError(f"invalid shape: {exc}") from exc


def _parse_variant(args) -> Variant:
    kind = args.variant
    if kind in ("level", "level-dual"):
        if args.level_i is None or args.level_l is None:
            raise UsageError("--level-i and --level-l are required "
                             "for level variants")
        return Variant(kind, i=args.level_i, level=args.level_l)
    if kind in ("eu-dual-taut", "eu-taut"):
        if args.level_i is None:
            raise UsageError(f"--level-i is required for {kind}")
        return Variant(kind, i=args.level_i)
    return Variant(kind)


def _emit(doc: dict, out_path: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# build

def cmd_build(args) -> int:
    shape = _parse_shape(args.shape)
    variant = _parse_variant(args)
    series = build(shape, variant, args.bound)
    doc = series_to_json(series)
    doc["schema"] = SCHEMA
    _emit(doc, args.out)
    degrees = len(series.coeffs)
    terms = sum(len(c.terms) for c in series.coeffs.values())
    print(f"built {variant.kind} series for Flag({args.shape}): "
          f"{degrees} degrees, {terms} terms", file=sys.stderr)
    return PASS


# ---------------------------------------------------------------------------
# verify

def _verify_recursion(args) -> dict:
    shape = _parse_shape(args.shape)
    variant = _parse_variant(args)
    series = build(shape, variant, args.bound)
    if variant.kind == "tw-y":
        points = [fp for fp in fixed_points_Y(shape) if fp.nondegenerate()]
        orbits = []
        for fp in points:
            for ch in tangent_chars_Y(shape, fp):
                try:
                    ob = make_orbit_y(shape, fp, ch.label, args.m)
                except InvalidOrbitError:
                    continue
                if ob.b.nondegenerate():
                    orbits.append(ob)
    else:
        orbits = [make_orbit_x(shape, fp, ch.label, args.m)
                  for fp in fixed_points_X(shape)
                  for ch in tangent_chars_X(shape, fp)]
    reports = _pmap(
        lambda ob: verify_recursion(series, ob, seed=args.seed), orbits)
    return {"check": "recursion", "variant": variant.kind, "m": args.m,
            "orbits": [r.to_json() for r in reports],
            "pass": all(r.ok for r in reports)}


def _verify_vanishing(args) -> dict:
    shape = _parse_shape(args.shape)
    if shape != complete_flag_shape(shape.n):
        raise UsageError("vanishing requires a complete flag shape "
                         "1,2,...,n:n+1")
    report = check_vanishing(shape, args.m, args.bound, seed=args.seed)
    doc = report.to_json()
    doc["check"] = "vanishing"
    doc["pass"] = report.ok
    return doc


def _verify_weyl(args) -> dict:
    shape = _parse_shape(args.shape)
    variant = _parse_variant(args)
    series = build(shape, variant, args.bound)
    if variant.kind == "tw-y":
        series = descend(series)
    result = weyl_check(series, seed=args.seed, trials=args.trials)
    return {"check": "weyl", "variant": variant.kind, **result}


def _verify_degree_gap(args) -> dict:
    shape = _parse_shape(args.shape)
    entries = []
    ok = True
    for d in enumerate_degrees(shape, args.bound):
        if d.total() == 0:
            continue
        s = degree_gap(shape, d).S
        oracle = degree_gap_factor_count(shape, d)
        good = s >= 1 and s == oracle
        ok = ok and good
        entries.append({"degree": [list(r) for r in d.rows], "S": s,
                        "factor_count": oracle, "pass": good})
    return {"check": "degree-gap", "entries": entries, "pass": ok}


def _verify_pairing(args) -> dict:
    shape = _parse_shape(args.shape)
    value = pairing(shape, seed=args.seed)
    doc = {"check": "pairing", "value": str(value), "pass": value == 1}
    if shape == FlagShape((1,), 2):
        res = pairing_residue_p1(seed=args.seed)
        doc["residue_form"] = str(res)
        doc["pass"] = doc["pass"] and res == value
    return doc


def _verify_level_duality(args) -> dict:
    shape = _parse_shape(args.shape)
    if args.level_i is None or args.level_l is None:
        raise UsageError("--level-i and --level-l are required")
    report = level_duality_report(shape, args.level_i, args.level_l,
                                  args.bound, seed=args.seed)
    doc = report.to_json()
    doc["check"] = "level-duality"
    return doc


def _verify_descent(args) -> dict:
    shape = _parse_shape(args.shape)
    twisted = descend(build(shape, TW_Y, args.bound)).x_grouped()
    small = build(shape, X_SMALL, args.bound).x_grouped()
    entries = []
    ok = True
    for delta in sorted(set(twisted) | set(small)):
        a = twisted.get(delta)
        b = small.get(delta)
        good = (a is not None and b is not None
                and qsum_equal(a, b, trials=args.trials, seed=args.seed))
        ok = ok and good
        entries.append({"x_degree": list(delta), "pass": good})
    return {"check": "descent", "entries": entries, "pass": ok}


_CHECKS = {
    "recursion": _verify_recursion,
    "vanishing": _verify_vanishing,
    "weyl": _verify_weyl,
    "degree-gap": _verify_degree_gap,
    "pairing": _verify_pairing,
    "level-duality": _verify_level_duality,
    "descent": _verify_descent,
}


def cmd_verify(args) -> int:
    doc = _CHECKS[args.checkname](args)
    doc["schema"] = SCHEMA
    doc["seed"] = args.seed
    _emit(doc, args.out)
    return PASS if doc["pass"] else FAIL


# ---------------------------------------------------------------------------
# residue

def cmd_residue(args) -> int:
    import random
    shape = _parse_shape(args.shape)
    points = fixed_points_X(shape)
    if not 0 <= args.fixed_point < len(points):
        raise UsageError(f"fixed point index out of range "
                         f"(0..{len(points) - 1})")
    fp = points[args.fixed_point]
    try:
        i, r, s = (int(x) for x in args.label.split(","))
    except ValueError as exc:
        raise UsageError("label must be 'i,r,s'") from exc
    try:
        orbit = make_orbit_x(shape, fp, (i, r, s), args.m)
    except InvalidOrbitError as exc:
        raise UsageError(str(exc)) from exc
    series = build(shape, X_SMALL, args.bound)
    rng = random.Random(args.seed)
    if args.mth_power_characters:
        msub = root_substitution(shape, args.m)
        lam_root = orbit.lam.subs(msub).root(args.m)
    else:
        msub = {}
        lam_root = orbit.lam.root(args.m)  # RootNotRationalError if m > 1
    names = set(lam_root.variables())
    for c in series.coeffs.values():
        names |= c.subs(orbit.subs_a).subs(msub).variables()
    names = sorted(names - {Q})
    values = {v: Fraction(rng.randint(2, 10_000), rng.randint(2, 10_000))
              for v in names}
    q0 = lam_root.eval(values)
    spec = Specialization(values=values)
    entries = []
    for d in sorted(series.coeffs, key=lambda d: (d.total(), d.rows)):
        loc = series.coeffs[d].subs(orbit.subs_a).subs(msub)
        res, order = residue_dq_over_q(loc, q0, spec)
        entries.append({"degree": [list(row) for row in d.rows],
                        "residue": str(res), "pole_order": order})
    doc = {"schema": SCHEMA, "seed": args.seed, "pole": str(q0),
           "fixed_point": [list(c) for c in fp.chain],
           "label": [i, r, s], "m": args.m, "entries": entries}
    _emit(doc, args.out)
    return PASS


# ---------------------------------------------------------------------------
# list

def cmd_list(args) -> int:
    shape = _parse_shape(args.shape)
    points = fixed_points_X(shape)
    doc = {
        "schema": SCHEMA,
        "shape": str(shape),
        "dual_shape": str(dual_shape(shape)),
        "dimension": shape.dim_x(),
        "weyl_order": shape.weyl_order(),
        "fixed_points": [
            {"index": k,
             "chain": [list(c) for c in fp.chain],
             "directions": [list(ch.label)
                            for ch in tangent_chars_X(shape, fp)]}
            for k, fp in enumerate(points)],
    }
    _emit(doc, args.out)
    return PASS


# ---------------------------------------------------------------------------
# argument parsing

def _common(sub, bound_default=2):
    sub.add_argument("--shape", required=True,
                     help="flag shape as 'v1,...,vn:N' (';' also accepted)")
    sub.add_argument("--bound", type=int, default=bound_default,
                     help="Novikov truncation: total degree bound")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--trials", type=int, default=8)
    sub.add_argument("--out", help="write the JSON report to this path")


def _variant_flags(sub):
    sub.add_argument("--variant", default="x-small",
                     choices=["x-small", "untwisted-y", "tw-y",
                              "eu-dual-taut", "eu-taut", "cotangent",
                              "level", "level-dual"])
    sub.add_argument("--level-i", type=int, help="tautological bundle index")
    sub.add_argument("--level-l", type=int, help="integer level")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkflag",
        description="Exact J-function series of partial flag varieties: "
                    "builders and verifiers.")
    subs = parser.add_subparsers(dest="command", required=True)

    b = subs.add_parser("build", help="build a truncated series as JSON")
    _common(b)
    _variant_flags(b)
    b.set_defaults(fn=cmd_build)

    v = subs.add_parser("verify", help="run a verifier; exit 0 iff it passes")
    v.add_argument("checkname", choices=sorted(_CHECKS),
                   metavar="check",
                   help="one of: " + ", ".join(sorted(_CHECKS)))
    _common(v)
    _variant_flags(v)
    v.add_argument("--m", type=int, default=1, help="covering multiplicity")
    v.set_defaults(fn=cmd_verify)

    r = subs.add_parser("residue",
                        help="exact residues of the localized series "
                             "at a tangent-character pole")
    _common(r, bound_default=3)
    r.add_argument("--fixed-point", type=int, required=True,
                   help="canonical index from the 'list' subcommand")
    r.add_argument("--label", required=True, help="direction 'i,r,s'")
    r.add_argument("--m", type=int, default=1)
    r.add_argument("--mth-power-characters", action="store_true",
                   help="specialize characters to exact m-th powers so the "
                        "pole location is rational")
    r.set_defaults(fn=cmd_residue)

    ls = subs.add_parser("list", help="canonical indices of fixed points "
                                      "and tangent directions")
    ls.add_argument("--shape", required=True)
    ls.add_argument("--out")
    ls.set_defaults(fn=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (GeometryError, SeriesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (RootNotRationalError, UnboundVariableError,
            RecursionEngineError, ChecksError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
