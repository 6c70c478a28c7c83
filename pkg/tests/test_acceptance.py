"""Acceptance gate: the eleven verification criteria, one pass/fail line
each.  Every check is exact rational arithmetic; no floating point is used
anywhere in this file or in the library code it exercises."""
import json
import math

from qkflag.core import qsum_equal, qsum_equal_exact
from qkflag.flags import (FlagShape, P, enumerate_degrees, fixed_points_X,
                          fixed_points_Y, tangent_chars_X, tangent_chars_Y)
from qkflag.series import (TW_Y, Variant, X_SMALL, build, coefficient_term,
                           descend, weyl_check)
from qkflag.recursion import (check_vanishing, complete_flag_shape,
                              gamma_edge_pair, make_orbit_x, make_orbit_y,
                              verify_recursion)
from qkflag.checks import (cotangent_balance, degree_gap,
                           degree_gap_factor_count, level_duality_report,
                           pairing, pairing_residue_p1)
from qkflag.cli import main as cli_main

P1 = FlagShape((1,), 2)
F123 = FlagShape((1, 2), 3)
GR24 = FlagShape((2,), 4)

ALL_SHAPES_N_LE_4 = [FlagShape(v, N) for v, N in [
    ((1,), 2),
    ((1,), 3), ((2,), 3), ((1, 2), 3),
    ((1,), 4), ((2,), 4), ((3,), 4), ((1, 2), 4), ((1, 3), 4),
    ((2, 3), 4), ((1, 2, 3), 4)]]


def report(num, name, ok):
    print(f"ACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'}")
    assert ok, f"acceptance criterion {num} ({name}) failed"


def test_acceptance_01_descent_identity():
    ok = True
    for shape in (P1, F123, GR24):
        twisted = descend(build(shape, TW_Y, 3)).x_grouped()
        small = build(shape, X_SMALL, 3).x_grouped()
        ok = ok and set(twisted) == set(small)
        for k, (delta, c) in enumerate(sorted(small.items())):
            ok = ok and qsum_equal(twisted[delta], c, trials=20,
                                   seed=1000 + k)
            if shape == P1:
                ok = ok and qsum_equal_exact(twisted[delta], c)
    report(1, "descent identity", ok)


def test_acceptance_02_isolated_recursion():
    ok = True
    for shape, ms, bound in ((P1, (1, 2, 3), 3), (F123, (1, 2), 2),
                             (GR24, (1, 2), 2)):
        series = build(shape, X_SMALL, bound)
        for m in ms:
            for fp in fixed_points_X(shape):
                for ch in tangent_chars_X(shape, fp):
                    rep = verify_recursion(
                        series, make_orbit_x(shape, fp, ch.label, m), seed=3)
                    ok = ok and rep.ok
                    ok = ok and all(e["pole_order"] <= 1
                                    for e in rep.entries)
    report(2, "isolated recursion", ok)


def test_acceptance_03_twisted_quotient_recursion():
    series = build(F123, TW_Y, 2)
    ok = True
    checked = 0
    for m in (1, 2):
        for fp in fixed_points_Y(F123):
            if not fp.nondegenerate():
                continue
            for ch in tangent_chars_Y(F123, fp):
                orbit = make_orbit_y(F123, fp, ch.label, m)
                if not orbit.b.nondegenerate():
                    continue
                rep = verify_recursion(series, orbit, seed=9)
                ok = ok and rep.ok
                checked += 1
    ok = ok and checked > 0
    report(3, "twisted quotient recursion", ok)


def test_acceptance_04_broken_orbit_vanishing():
    ok = True
    for n, m, bound in ((2, 1, 2), (2, 2, 2), (3, 1, 1)):
        rep = check_vanishing(complete_flag_shape(n), m, bound, seed=0)
        ok = ok and rep.ok and all(rep.aggregates.values())
    report(4, "broken-orbit vanishing at y=1", ok)


def test_acceptance_05_edge_identity():
    ok = True
    for m in (1, 2, 3):
        for Delta in range(-3, 4):
            for d in range(-3, 4):
                lhs, rhs = gamma_edge_pair(d, Delta, m)
                ok = ok and qsum_equal(lhs, rhs, trials=4, seed=11)
    report(5, "two-sided edge identity", ok)


def test_acceptance_06_degree_gap():
    ok = True
    for shape in ALL_SHAPES_N_LE_4:
        for d in enumerate_degrees(shape, 4):
            if d.total() == 0:
                continue
            s = degree_gap(shape, d).S
            ok = ok and s >= 1 and s == degree_gap_factor_count(shape, d)
    report(6, "q-degree gap estimate", ok)


def test_acceptance_07_pairing():
    ok = all(pairing(shape, seed=5) == 1 for shape in ALL_SHAPES_N_LE_4)
    ok = ok and pairing_residue_p1(seed=5) == 1
    report(7, "Poincare pairing", ok)


def test_acceptance_08_weyl_invariance():
    ok = True
    for shape in (F123, GR24):
        variants = [Variant("cotangent")]
        for i in range(1, shape.n + 1):
            variants += [Variant("eu-dual-taut", i=i),
                         Variant("eu-taut", i=i),
                         Variant("level", i=i, level=1)]
        series = descend(build(shape, TW_Y, 2))
        ok = ok and weyl_check(series, seed=0, trials=3)["pass"]
        for variant in variants:
            ok = ok and weyl_check(build(shape, variant, 2),
                                   seed=0, trials=3)["pass"]
    report(8, "Weyl invariance", ok)


def test_acceptance_09_cotangent_balance():
    report(9, "cotangent factor balance", cotangent_balance(F123, 3))


def test_acceptance_10_level_structures():
    ok = True
    for shape in (P1, F123):
        for level in (-1, 1, 2):
            variant = Variant("level", i=1, level=level)
            for d in enumerate_degrees(shape, 3):
                base = coefficient_term(shape, d, X_SMALL)
                lev = coefficient_term(shape, d, variant)
                expo = sum(d.d(1, s) * (d.d(1, s) - 1) // 2
                           for s in range(1, shape.v_ext(1) + 1))
                from qkflag.core import Monomial, Q
                mono = Monomial.make(
                    {P(1, s): level * d.d(1, s)
                     for s in range(1, shape.v_ext(1) + 1)}) \
                    * Monomial.var(Q) ** (level * expo)
                ok = ok and lev.scalar == base.scalar
                ok = ok and lev.lead == base.lead * mono
                ok = ok and sorted(map(str, lev.factors)) == \
                    sorted(map(str, base.factors))
    for shape in (P1, FlagShape((1,), 3)):
        for level in (0, 1):
            rep = level_duality_report(shape, i=1, level=level, bound=2,
                                       seed=1)
            ok = ok and rep.ok
            if level == 0:
                ok = ok and all(e["identity_at_level_zero"]
                                for e in rep.entries)
    report(10, "level structures and level duality", ok)


def test_acceptance_11_determinism(tmp_path):
    ok = True
    configs = [
        ("recursion", ["--shape", "1:2", "--m", "2", "--bound", "2"]),
        ("vanishing", ["--shape", "1,2:3", "--m", "1", "--bound", "1"]),
        ("weyl", ["--shape", "1,2:3", "--variant", "tw-y", "--bound", "1"]),
        ("degree-gap", ["--shape", "2:4", "--bound", "2"]),
        ("pairing", ["--shape", "1,2:3"]),
        ("level-duality", ["--shape", "1:2", "--level-i", "1",
                           "--level-l", "1", "--bound", "2"]),
        ("descent", ["--shape", "1:2", "--bound", "2"]),
    ]
    for check, extra in configs:
        paths = [tmp_path / f"{check}-{k}.json" for k in (1, 2)]
        for p in paths:
            code = cli_main(["verify", check, "--seed", "13",
                             "--out", str(p)] + extra)
            ok = ok and code == 0
        ok = ok and paths[0].read_bytes() == paths[1].read_bytes()
    report(11, "byte-identical seeded reports", ok)
