"""Recursion engine: residue recursions of the series at tangent-character
poles, broken-orbit coefficients against an independently frozen closed-form
oracle, the composition law, the two-sided edge identity, and the vanishing
verifier on the smallest complete flag."""
from fractions import Fraction
import random

import pytest

from qkflag.core import (FactoredTerm, Monomial, POLE, Q, QSum,
                         Specialization, eval_qsum, qsum_equal)
from qkflag.flags import (FlagShape, U, fixed_points_X, fixed_points_Y,
                          point_A_X, tangent_chars_X, tangent_chars_Y)
from qkflag.recursion import (check_vanishing, coeff_broken,
                              complete_flag_shape, enumerate_broken,
                              gamma_edge_pair, make_broken, make_orbit_x,
                              make_orbit_y, orbit_degree, verify_recursion)
from qkflag.series import TW_Y, X_SMALL, build

P1 = FlagShape((1,), 2)
F123 = FlagShape((1, 2), 3)


# ---------------------------------------------------------------------------
# frozen closed-form oracle for broken-orbit recursion coefficients
#
# Independent of the engine: the coefficient of the balanced broken orbit
# from the standard point with break set J (ending at n) is written out
# factor by factor from the displayed per-Chern-root closed forms, in the
# m-th-root character variables U_a_r (L = U^m).

def oracle_coeff(n, m, J):
    shape = complete_flag_shape(n)
    breaks = tuple(sorted(J)) + (n,)
    k = len(J)

    def lam_root(j):
        f = {}
        for a in range(j + 1, n + 2):
            f[U(a, 2)] = f.get(U(a, 2), 0) + 1
            f[U(a, 1)] = f.get(U(a, 1), 0) - 1
        return Monomial.make(f)

    def jk(i):
        return min(b for b in breaks if b >= i)

    def PA(i, s):
        if i == n + 1:
            return Monomial.one()
        return Monomial.make({U(a, s): m for a in range(i + 1, n + 2)})

    def Lm(a, r):
        return Monomial.make({U(a, r): m})

    y1 = Monomial.var("y", 1)
    factors = []

    def add(mono, e):
        factors.append((mono, e))

    add(Monomial.var(Q, 1) * lam_root(breaks[0]).inv(), -1)
    for a in range(k):
        add(lam_root(breaks[a]) * lam_root(breaks[a + 1]).inv(), -1)
    for i in range(1, n + 1):
        vi = shape.v_ext(i)
        for r in range(1, vi + 1):
            for s in range(1, vi + 1):
                if r == s or (r != 1 and s != 1):
                    continue
                if r == 1:
                    base = y1 * PA(i, s) * PA(i, 1).inv()
                    lr = lam_root(jk(i))
                    for l in range(-m + 1, 0):
                        add(base * lr ** l, -1)
                    add(base, -1)
                else:
                    base = y1 * PA(i, 1) * PA(i, r).inv()
                    lr = lam_root(jk(i))
                    for l in range(1, m + 1):
                        add(base * lr ** l, +1)
    for i in range(1, n + 1):
        vi, vi1 = shape.v_ext(i), shape.v_ext(i + 1)
        for s in range(1, vi + 1):
            for r in range(1, vi1 + 1):
                if r != 1 and s != 1:
                    continue
                if r == 1 and s != 1:
                    if i == n:
                        continue
                    X = PA(i, s) * PA(i + 1, 1).inv() * Lm(i + 1, 1).inv()
                    lr = lam_root(jk(i + 1))
                    add(X, +1)
                    for l in range(-m + 1, 0):
                        add(X * lr ** l, +1)
                elif s == 1 and r != 1:
                    X = PA(i, 1) * PA(i + 1, r).inv() * Lm(i + 1, r).inv()
                    lr = lam_root(jk(i))
                    for l in range(1, m + 1):
                        mono = X * lr ** l
                        if r == 2 and l == m and (i in J or i == n):
                            assert mono.is_one(), (i, r, s, l, mono)
                            continue
                        add(mono, -1)
                elif r == 1 and s == 1:
                    if i == n:
                        lr = Monomial.make({U(n + 1, 2): 1, U(n + 1, 1): -1})
                        for l in range(1, m + 1):
                            add(lr ** l, -1)
                    else:
                        lri = lam_root(jk(i))
                        for l in range(1, m):
                            add(lri ** l, -1)
                        lri1 = lam_root(jk(i + 1))
                        for l in range(-m + 1, 0):
                            add(lri ** m * lri1 ** l, +1)
    return QSum.of(FactoredTerm.make(Fraction(1, m ** (k + 1)),
                                     Monomial.one(), factors))


def lam_root_u(n, j, power=1):
    """lambda_j^{1/m} in the U variables."""
    f = {}
    for a in range(j + 1, n + 2):
        f[U(a, 2)] = f.get(U(a, 2), 0) + power
        f[U(a, 1)] = f.get(U(a, 1), 0) - power
    return Monomial.make(f)


@pytest.mark.parametrize("n,m", [(2, 1), (2, 2), (3, 1), (3, 2)])
def test_broken_orbit_coefficients_match_frozen_oracle(n, m):
    shape = complete_flag_shape(n)
    orbits = enumerate_broken(shape, m)
    assert len(orbits) == 2 ** (n - 1)
    for k, ob in enumerate(orbits):
        J = tuple(b for b in ob.breaks if b != n)
        assert qsum_equal(coeff_broken(ob), oracle_coeff(n, m, J),
                          trials=6, seed=17 + k)


@pytest.mark.parametrize("n,m,cut", [(3, 1, 1), (3, 1, 2), (3, 2, 2)])
def test_composition_law(n, m, cut):
    """Coeff(head+tail)(q) = Coeff(head)(q) * Coeff(tail)(lam_cut^{1/m}),
    where the tail starts at the node reached by the head."""
    shape = complete_flag_shape(n)
    breaks = tuple(range(1, n + 1))
    head = coeff_broken(make_broken(shape, breaks[:cut], m))
    tail = coeff_broken(make_broken(shape, breaks[cut:], m,
                                    start_moved=frozenset(breaks[:cut])))
    full = coeff_broken(make_broken(shape, breaks, m))
    names = sorted((full.variables() | head.variables() | tail.variables())
                   - {Q})
    rng = random.Random(23)
    checked = 0
    while checked < 4:
        vals = {v: Fraction(rng.randint(2, 500), rng.randint(2, 500))
                for v in names}
        spec = Specialization(values=vals)
        qv = Fraction(rng.randint(2, 500), rng.randint(2, 500))
        lc = lam_root_u(n, cut).eval(vals)
        a = eval_qsum(full, qv, spec)
        b = eval_qsum(head, qv, spec)
        t = eval_qsum(tail, lc, spec)
        if POLE in (a, b, t):
            continue
        assert a == b * t
        checked += 1


def test_orbit_degree_bookkeeping():
    shape = complete_flag_shape(3)
    ob = make_broken(shape, (1, 3), 2)
    # every level between the first move and the last break advances by m
    # on its first slot
    assert orbit_degree(ob).rows == ((2,), (2, 0), (2, 0, 0))
    ob2 = make_broken(shape, (3,), 1, start_moved=frozenset({1}))
    assert orbit_degree(ob2).rows == ((0,), (1, 0), (1, 0, 0))


# ---------------------------------------------------------------------------
# residue recursions

@pytest.mark.parametrize("m", [1, 2])
def test_recursion_on_projective_line(m):
    series = build(P1, X_SMALL, 3)
    for fp in fixed_points_X(P1):
        for ch in tangent_chars_X(P1, fp):
            report = verify_recursion(series, make_orbit_x(P1, fp, ch.label, m),
                                      seed=3)
            assert report.ok, report.to_json()


def test_recursion_on_flag123_all_pairs():
    series = build(F123, X_SMALL, 2)
    for fp in fixed_points_X(F123):
        for ch in tangent_chars_X(F123, fp):
            report = verify_recursion(series, make_orbit_x(F123, fp, ch.label, 1),
                                      seed=5)
            assert report.ok, report.to_json()


def test_twisted_quotient_recursion_nondegenerate():
    series = build(F123, TW_Y, 2)
    a = [fp for fp in fixed_points_Y(F123) if fp.nondegenerate()][0]
    checked = 0
    for ch in tangent_chars_Y(F123, a):
        orbit = make_orbit_y(F123, a, ch.label, 1)
        if not orbit.b.nondegenerate():
            continue
        report = verify_recursion(series, orbit, seed=7)
        assert report.ok, report.to_json()
        checked += 1
    assert checked > 0


def test_recursion_detects_wrong_series():
    """A doctored series (degree-1 coefficient scaled by 2) must fail."""
    series = build(P1, X_SMALL, 2)
    coeffs = {d: (c.scale(2) if d.total() == 1 else c)
              for d, c in series.coeffs.items()}
    from qkflag.series import JSeries
    bad = JSeries(P1, series.variant, series.bound, coeffs)
    fp = point_A_X(P1)
    ch = tangent_chars_X(P1, fp)[0]
    report = verify_recursion(bad, make_orbit_x(P1, fp, ch.label, 1), seed=3)
    assert not report.ok


# ---------------------------------------------------------------------------
# edge identity (two-sided product identity at an m-sheet cover)

@pytest.mark.parametrize("m", [1, 2, 3])
def test_edge_identity_grid(m):
    for Delta in range(-2, 3):
        for d in range(-2, 3):
            lhs, rhs = gamma_edge_pair(d, Delta, m)
            assert qsum_equal(lhs, rhs, trials=3, seed=29)


# ---------------------------------------------------------------------------
# vanishing verifier (small configuration; the heavier ones run in the
# acceptance gate)

def test_vanishing_smallest_complete_flag():
    report = check_vanishing(complete_flag_shape(2), m=1, bound=1, seed=0)
    assert report.ok, report.to_json()
    assert all(report.aggregates.values())
