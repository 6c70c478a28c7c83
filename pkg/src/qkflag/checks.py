"""Global consistency checks: Poincaré pairing values, the q-degree-gap
estimate for the small series, cotangent factor balance, and the level
correspondence between a flag variety and its dual.

Everything is exact rational arithmetic; probabilistic identity tests use
seeded rejection sampling exactly as in the recursion engine.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .core import (FactoredTerm, Monomial, POLE, Q, QSum, Specialization,
                   IllDefinedTermError, eval_qsum, qsum_equal,
                   residue_dq_over_q)
from .flags import (DegreeVector, FixedPointX, FlagShape, L, P,
                    enumerate_degrees, fixed_points_X, subs_X,
                    tangent_chars_X)
from .series import (HBAR_VAR, JSeries, Variant, X_SMALL, Y_VAR, build,
                     coefficient_term)


class ChecksError(Exception):
    pass


class RatioNotMonomialError(ChecksError):
    pass


# ---------------------------------------------------------------------------
# Poincaré pairing by fixed-point localization


def _sample_lambda(shape: FlagShape, rng: random.Random) -> dict[str, Fraction]:
    return {L(shape.n + 1, r): Fraction(rng.randint(2, 10_000),
                                        rng.randint(2, 10_000))
            for r in range(1, shape.N + 1)}


def pairing(shape: FlagShape, f: Monomial = Monomial.one(),
            g: Monomial = Monomial.one(), seed: int = 0,
            max_rejects: int = 60) -> Fraction:
    """chi(X, F (x) G) as the fixed-point sum of restrictions divided by
    the Euler class of the tangent space, at a generic rational character
    specialization (rejection-sampled away from collisions)."""
    rng = random.Random(seed)
    for _ in range(max_rejects):
        values = _sample_lambda(shape, rng)
        spec = Specialization(values=values)
        total = Fraction(0)
        try:
            for fp in fixed_points_X(shape):
                sub = subs_X(shape, fp)
                num = (f.subs(sub) * g.subs(sub)).eval(values)
                den = Fraction(1)
                for chi in tangent_chars_X(shape, fp):
                    e = Fraction(1) - chi.char.inv().eval(values)
                    if e == 0:
                        raise IllDefinedTermError("character collision")
                    den *= e
                total += num / den
            return total
        except (IllDefinedTermError, ZeroDivisionError):
            continue
    raise ChecksError("could not sample an admissible specialization")


def pairing_residue_p1(f: Monomial = Monomial.one(),
                       g: Monomial = Monomial.one(), seed: int = 0) -> Fraction:
    """The pairing on the projective line computed through the residue form
    (sum over the poles of the localization kernel away from 0 and infinity,
    times the constant (-1)^(sum v_i) / prod v_i!), using the generic
    residue machinery on the Chern-root variable.

    For shape Flag(1;2) the constant is -1 and the kernel for classes F, G is
    F G / ((1 - P/L_1)(1 - P/L_2)), paired with the form dP/P."""
    shape = FlagShape((1,), 2)
    rng = random.Random(seed)
    values = _sample_lambda(shape, rng)
    p = Monomial.var(P(1, 1))
    kernel = QSum.of(FactoredTerm.make(
        1, f * g, [(p / Monomial.var(L(2, r)), -1) for r in (1, 2)]))
    # rename the root variable to q so the residue engine applies verbatim
    kernel = kernel.subs({P(1, 1): Monomial.var(Q)})
    total = Fraction(0)
    for r in (1, 2):
        res, order = residue_dq_over_q(kernel, values[L(2, r)],
                                       Specialization(values=values))
        if order > 1:
            raise ChecksError("kernel pole is not simple")
        total += res
    const = Fraction((-1) ** sum(shape.v),
                     math.prod(math.factorial(v) for v in shape.v))
    return const * total


# ---------------------------------------------------------------------------
# q-degree gap of the small-series coefficients


@dataclass(frozen=True)
class DegreeGapResult:
    d: DegreeVector
    S: int


def degree_gap(shape: FlagShape, d: DegreeVector) -> DegreeGapResult:
    """Closed formula for the q-degree surplus of the denominator of the
    small-series coefficient at degree d: pairs (s, r) with positive degree
    difference contribute triangular numbers, minus the numerator's own
    triangular terms, minus one for the dilaton prefactor."""
    total = 0
    for i in range(1, shape.n + 1):
        for s in range(1, shape.v_ext(i) + 1):
            for r in range(1, shape.v_ext(i + 1) + 1):
                diff = d.d(i, s) - d.d(i + 1, r)
                if diff > 0:
                    total += diff * (diff + 1) // 2
            for r in range(1, shape.v_ext(i) + 1):
                if r != s:
                    diff = d.d(i, s) - d.d(i, r)
                    if diff > 0:
                        total -= diff * (diff + 1) // 2
    return DegreeGapResult(d, total - 1)


def degree_gap_factor_count(shape: FlagShape, d: DegreeVector) -> int:
    """Independent oracle: literal q-degree gap of the factored coefficient
    (with the dilaton prefactor reattached), counting only factors whose
    q-exponent is positive; factors restricting to exact zeros can only sit
    at q-exponent 0 and never enter the count."""
    term = coefficient_term(shape, d, X_SMALL)
    gap = -1  # the (1 - q) prefactor is one unit of numerator q-degree
    for fct in term.factors:
        l = fct.monomial.get(Q)
        if l > 0:
            gap -= l * fct.exponent
    return gap


def small_j_property(shape: FlagShape, bound: int) -> bool:
    """True iff for every nontrivial degree up to the bound the closed
    formula and the factor-count oracle agree and certify a gap >= 1."""
    for d in enumerate_degrees(shape, bound):
        if d.total() == 0:
            continue
        s = degree_gap(shape, d).S
        if s != degree_gap_factor_count(shape, d) or s < 1:
            return False
    return True


# ---------------------------------------------------------------------------
# cotangent factor balance


def cotangent_balance(shape: FlagShape, bound: int) -> bool:
    """For every degree and every Chern-root ratio, the signed count of
    factors of the cotangent-series coefficient whose monomial is that ratio
    times a power of q or hbar is zero (numerators balance denominators)."""
    for d in enumerate_degrees(shape, bound):
        term = coefficient_term(shape, d, Variant("cotangent"))
        counts: dict[Monomial, int] = {}
        for fct in term.factors:
            key = fct.monomial.subs({Q: Monomial.one(),
                                     HBAR_VAR: Monomial.one()})
            if not any(v.startswith("P_") for v in key.variables()):
                continue
            counts[key] = counts.get(key, 0) + fct.exponent
        if any(c != 0 for c in counts.values()):
            return False
    return True


# ---------------------------------------------------------------------------
# level correspondence with the dual flag variety


def dual_shape(shape: FlagShape) -> FlagShape:
    return FlagShape(tuple(shape.N - v for v in reversed(shape.v)), shape.N)


def dual_fixed_point(shape: FlagShape, fp: FixedPointX) -> FixedPointX:
    full = set(range(1, shape.N + 1))
    return FixedPointX(tuple(tuple(sorted(full - set(c)))
                             for c in reversed(fp.chain)))


def _monomial_from_probes(values: Mapping[str, Fraction], base: Fraction,
                          probes: Mapping[str, Fraction]) -> tuple[Fraction, Monomial]:
    """Reconstruct scalar * monomial from its value at a base point and its
    values at points where one variable is doubled."""
    exps: dict[str, int] = {}
    for v, val in probes.items():
        ratio = val / base
        if ratio >= 1:
            e = ratio.numerator.bit_length() - 1
        else:
            e = -(ratio.denominator.bit_length() - 1)
        if ratio != Fraction(2) ** e:
            raise RatioNotMonomialError(f"probe along {v} is not monomial")
        exps[v] = e
    mono = Monomial.make(exps)
    scalar = base / mono.eval(dict(values))
    return scalar, mono


@dataclass
class LevelDualityReport:
    shape: str
    dual: str
    i: int
    level: int
    bound: int
    entries: list[dict]
    ok: bool

    def to_json(self) -> dict:
        return {"shape": self.shape, "dual": self.dual, "i": self.i,
                "level": self.level, "bound": self.bound,
                "entries": self.entries, "pass": self.ok}


def level_duality_report(shape: FlagShape, i: int, level: int, bound: int,
                         seed: int = 0, trials: int = 8,
                         max_rejects: int = 60) -> LevelDualityReport:
    """Compare the level-l series of V_i on X against the level-(-l) series
    of the dual tautological bundle on the dual variety, localized at
    matched fixed points (chains map to complements, characters invert),
    grouped by X-degree (reversed on the dual side).  The exact ratio per
    degree and fixed point must be scalar * monomial in q and the
    characters; the witness monomial is reconstructed from probe
    evaluations and then certified by a probabilistic identity test."""
    dual = dual_shape(shape)
    i_dual = shape.n + 1 - i
    sx = build(shape, Variant("level", i=i, level=level), bound)
    sy = build(dual, Variant("level-dual", i=i_dual, level=-level), bound)
    gx = sx.x_grouped()
    gy = sy.x_grouped()
    lam_inv = {L(dual.n + 1, r): Monomial.var(L(dual.n + 1, r), -1)
               for r in range(1, dual.N + 1)}

    rng = random.Random(seed)
    entries = []
    ok = True
    for delta, cx in sorted(gx.items()):
        if sum(delta) == 0:
            continue
        cy = gy[tuple(reversed(delta))]
        for fp in fixed_points_X(shape):
            a = cx.subs(subs_X(shape, fp))
            b = cy.subs(subs_X(dual, dual_fixed_point(shape, fp))).subs(lam_inv)
            varnames = sorted((a.variables() | b.variables()) - {Q})
            entry = {"x_degree": list(delta),
                     "fixed_point": [sorted(s) for s in fp.chain]}
            for _ in range(max_rejects):
                values = {v: Fraction(rng.randint(2, 1000),
                                      rng.randint(2, 1000)) for v in varnames}
                qv = Fraction(rng.randint(2, 1000), rng.randint(2, 1000))
                values[Q] = qv
                spec = Specialization(values=values)
                try:
                    va = eval_qsum(a, qv, spec)
                    vb = eval_qsum(b, qv, spec)
                    if va is POLE or vb is POLE or vb == 0:
                        raise IllDefinedTermError("inadmissible point")
                    base = va / vb
                    probes = {}
                    for v in varnames + [Q]:
                        v2 = dict(values)
                        v2[v] = values[v] * 2
                        wa = eval_qsum(a, v2[Q], Specialization(values=v2))
                        wb = eval_qsum(b, v2[Q], Specialization(values=v2))
                        if wa is POLE or wb is POLE or wb == 0:
                            raise IllDefinedTermError("inadmissible probe")
                        probes[v] = wa / wb
                    scalar, mono = _monomial_from_probes(values, base, probes)
                    witness = QSum.of(FactoredTerm.make(scalar, mono, []))
                    same = qsum_equal(a, b * witness, degree_hint=4 * bound,
                                      trials=trials, seed=rng.randrange(1 << 30))
                    entry["ratio_scalar"] = str(scalar)
                    entry["ratio_monomial"] = dict(mono.exps)
                    entry["monomial_certified"] = same
                    if level == 0:
                        same = same and scalar == 1 and mono.is_one()
                        entry["identity_at_level_zero"] = same
                    ok = ok and same
                    break
                except (IllDefinedTermError, ZeroDivisionError):
                    continue
                except RatioNotMonomialError as exc:
                    entry["error"] = str(exc)
                    ok = False
                    break
            else:
                raise ChecksError("could not sample an admissible point")
            entries.append(entry)
    return LevelDualityReport(str(shape), str(dual), i, level, bound,
                              entries, ok)
