"""Novikov-truncated J-series in factored form, and difference operators.

A series is stored as a map from degree vectors d (the lattice of the
abelian quotient Y) to the factored coefficient of the Novikov monomial
Q^d; the overall prefactor (1-q) is left implicit and supplied by
consumers when needed.  Regrouping by the degrees of the flag variety X
(level sums of d) happens only at reporting/comparison time.

Product convention: prod_{l=lo}^{hi} with hi < lo means the reciprocal
prod_{l=hi+1}^{lo-1}, taken in the denominator; this can produce an exact
(1 - 1) factor at l = 0, which stays visible in the factored form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .core import (Factor, FactoredTerm, Monomial, Q, QSum, format_fraction,
                   parse_fraction, qsum_equal)
from .flags import DegreeVector, FlagShape, L, P, enumerate_degrees

Y_VAR = "y"
MU_VAR = "mu"
HBAR_VAR = "hbar"


class SeriesError(Exception):
    pass


@dataclass(frozen=True)
class Variant:
    """Which J-series to build; i/level parametrize the twist variants."""

    kind: str
    i: int = 0
    level: int = 0

    KINDS = ("x-small", "untwisted-y", "tw-y", "eu-dual-taut", "eu-taut",
             "cotangent", "level", "level-dual")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise SeriesError(f"unknown variant {self.kind!r}")


X_SMALL = Variant("x-small")
UNTWISTED_Y = Variant("untwisted-y")
TW_Y = Variant("tw-y")


def prod_factors(base: Monomial, lo: int, hi: int, qstep: int = 1,
                 sign: int = 1) -> list[tuple[Monomial, int]]:
    """Factors of prod_{l=lo}^{hi} (1 - base*q^(qstep*l)) ** sign, with the
    reciprocal-range convention for hi < lo."""
    if hi >= lo:
        rng, s = range(lo, hi + 1), sign
    else:
        rng, s = range(hi + 1, lo), -sign
    return [(base * Monomial.var(Q, qstep * l) if qstep * l else base, s)
            for l in rng]


def _numerator_factors(shape: FlagShape, d: DegreeVector, y_on: bool):
    fs = []
    y = Monomial.var(Y_VAR) if y_on else Monomial.one()
    for i in range(1, shape.n + 1):
        vi = shape.v_ext(i)
        for s in range(1, vi + 1):
            for r in range(1, vi + 1):
                if r == s:
                    continue
                base = y * Monomial.var(P(i, s)) / Monomial.var(P(i, r))
                fs += prod_factors(base, 1, d.d(i, s) - d.d(i, r))
    return fs


def _denominator_factors(shape: FlagShape, d: DegreeVector, tilde: bool):
    fs = []
    for i in range(1, shape.n + 1):
        for s in range(1, shape.v_ext(i) + 1):
            for r in range(1, shape.v_ext(i + 1) + 1):
                base = Monomial.var(P(i, s))
                if i < shape.n:
                    base = base / Monomial.var(P(i + 1, r))
                if tilde or i == shape.n:
                    base = base / Monomial.var(L(i + 1, r))
                fs += prod_factors(base, 1, d.d(i, s) - d.d(i + 1, r), sign=-1)
    return fs


def _twist_factors(shape: FlagShape, d: DegreeVector, variant: Variant):
    fs = []
    if variant.kind == "eu-dual-taut":
        mu = Monomial.var(MU_VAR)
        for s in range(1, shape.v_ext(variant.i) + 1):
            fs += prod_factors(mu * Monomial.var(P(variant.i, s)),
                               1, d.d(variant.i, s))
    elif variant.kind == "eu-taut":
        base0 = Monomial.var(MU_VAR, -1)
        for s in range(1, shape.v_ext(variant.i) + 1):
            base = base0 * Monomial.var(P(variant.i, s), -1)
            fs += prod_factors(base, 0, d.d(variant.i, s) - 1, qstep=-1, sign=-1)
    elif variant.kind == "cotangent":
        h = Monomial.var(HBAR_VAR)
        for i in range(1, shape.n + 1):
            vi = shape.v_ext(i)
            for s in range(1, vi + 1):
                for r in range(1, shape.v_ext(i + 1) + 1):
                    base = h * Monomial.var(P(i, s))
                    base = base / (Monomial.var(L(i + 1, r)) if i == shape.n
                                   else Monomial.var(P(i + 1, r)))
                    fs += prod_factors(base, 0, d.d(i, s) - d.d(i + 1, r) - 1)
                for r in range(1, vi + 1):
                    if r != s:
                        base = h * Monomial.var(P(i, s)) / Monomial.var(P(i, r))
                        fs += prod_factors(base, 0, d.d(i, s) - d.d(i, r) - 1,
                                           sign=-1)
    return fs


def _level_lead(shape: FlagShape, d: DegreeVector, variant: Variant) -> Monomial:
    """Determinantal level-structure modification: a pure monomial.  The
    sign (-1)^{l * sum d} is absorbed into the Novikov variables.  For the
    dual tautological bundle the triangular q-power shifts by one step."""
    i, l = variant.i, variant.level
    shift = 1 if variant.kind == "level-dual" else -1
    exps: dict[str, int] = {}
    qexp = 0
    for s in range(1, shape.v_ext(i) + 1):
        dis = d.d(i, s)
        exps[P(i, s)] = l * dis
        qexp += l * dis * (dis + shift) // 2
    exps[Q] = qexp
    return Monomial.make(exps)


def coefficient_term(shape: FlagShape, d: DegreeVector,
                     variant: Variant) -> FactoredTerm:
    """The factored coefficient of Q^d (without the (1-q) prefactor)."""
    kind = variant.kind
    lead = Monomial.one()
    fs: list[tuple[Monomial, int]] = []
    if kind == "tw-y":
        fs = _numerator_factors(shape, d, y_on=True) + \
            _denominator_factors(shape, d, tilde=True)
    elif kind == "untwisted-y":
        fs = _denominator_factors(shape, d, tilde=True)
    else:
        fs = _numerator_factors(shape, d, y_on=False) + \
            _denominator_factors(shape, d, tilde=False)
        if kind in ("eu-dual-taut", "eu-taut", "cotangent"):
            fs += _twist_factors(shape, d, variant)
        elif kind in ("level", "level-dual"):
            lead = _level_lead(shape, d, variant)
    return FactoredTerm.make(1, lead, fs)


@dataclass
class JSeries:
    shape: FlagShape
    variant: Variant
    bound: int
    coeffs: dict[DegreeVector, QSum]

    def x_grouped(self) -> dict[tuple[int, ...], QSum]:
        """Regroup by the X-degree (level sums); exact-zero terms dropped."""
        out: dict[tuple[int, ...], QSum] = {}
        for d, c in self.coeffs.items():
            delta = d.level_sums()
            kept = QSum(tuple(t for t in c.terms if not t.is_exact_zero()))
            out[delta] = out.get(delta, QSum.zero()) + kept
        return out


def build(shape: FlagShape, variant: Variant, bound: int,
          threads: int = 1) -> JSeries:
    degrees = enumerate_degrees(shape, bound)

    def one(d: DegreeVector) -> QSum:
        return QSum.of(coefficient_term(shape, d, variant))

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sums = list(pool.map(one, degrees))
    else:
        sums = [one(d) for d in degrees]
    return JSeries(shape, variant, bound, dict(zip(degrees, sums)))


# ---------------------------------------------------------------------------
# descent to the flag variety

def descend(series: JSeries) -> JSeries:
    """Restrict the off-diagonal torus characters (L_a_r -> 1 for a <= n)
    and the auxiliary y -> 1; degrees keep their Y-lattice labels so that
    x_grouped() of the result matches an X-side series built directly."""
    shape = series.shape
    small = {L(a, r): Monomial.one()
             for a in range(2, shape.n + 1)
             for r in range(1, shape.v_ext(a) + 1)}
    small[Y_VAR] = Monomial.one()
    coeffs = {d: c.subs(small) for d, c in series.coeffs.items()}
    return JSeries(shape, series.variant, series.bound, coeffs)


# ---------------------------------------------------------------------------
# difference operators

@dataclass(frozen=True)
class DifferenceOp:
    """Degreewise multiplication operators on a series.

    kinds:
      monomial(i, j, k):  multiply the Q^d coefficient by (P_ij q^{d_ij})^k
      poly(terms):        integer combination of monomial ops and q-powers;
                          each entry is (coeff, q_power, ((i, j, k), ...))
      gamma-inv(i, r, s): multiply by prod_{l=1}^{d_is-d_ir} (1 - y P_is/P_ir q^l)
      gamma(i, r, s):     the inverse of gamma-inv
      box-inv(i):         multiply by prod_s prod_{l=1}^{d_is} (1 - mu P_is q^l)
      level-mul(i, l):    multiply by the level-l determinantal monomial
    """

    kind: str
    i: int = 0
    j: int = 0
    k: int = 0
    r: int = 0
    s: int = 0
    level: int = 0
    terms: tuple = ()


def apply_op(series: JSeries, op: DifferenceOp) -> JSeries:
    shape = series.shape
    out: dict[DegreeVector, QSum] = {}
    for d, c in series.coeffs.items():
        if op.kind == "monomial":
            mono = Monomial.make({P(op.i, op.j): op.k, Q: op.k * d.d(op.i, op.j)})
            out[d] = c.scale(1, mono)
        elif op.kind == "poly":
            acc = QSum.zero()
            for coeff, qpow, monos in op.terms:
                mono = Monomial.var(Q, qpow) if qpow else Monomial.one()
                for (i, j, k) in monos:
                    mono = mono * Monomial.make(
                        {P(i, j): k, Q: k * d.d(i, j)})
                acc = acc + c.scale(coeff, mono)
            out[d] = acc
        elif op.kind in ("gamma-inv", "gamma"):
            sign = 1 if op.kind == "gamma-inv" else -1
            base = (Monomial.var(Y_VAR) * Monomial.var(P(op.i, op.s))
                    / Monomial.var(P(op.i, op.r)))
            fs = prod_factors(base, 1, d.d(op.i, op.s) - d.d(op.i, op.r),
                              sign=sign)
            out[d] = c.mul_term(FactoredTerm.make(1, Monomial.one(), fs))
        elif op.kind == "box-inv":
            fs = []
            for s in range(1, shape.v_ext(op.i) + 1):
                fs += prod_factors(Monomial.var(MU_VAR) * Monomial.var(P(op.i, s)),
                                   1, d.d(op.i, s))
            out[d] = c.mul_term(FactoredTerm.make(1, Monomial.one(), fs))
        elif op.kind == "level-mul":
            mono = _level_lead(shape, d, Variant("level", i=op.i, level=op.level))
            out[d] = c.scale(1, mono)
        else:
            raise SeriesError(f"unknown operator {op.kind!r}")
    return JSeries(shape, series.variant, series.bound, out)


def gamma_inv_all(series: JSeries) -> JSeries:
    """Apply gamma-inv for every (i, r, s), r != s; sends the untwisted
    quotient series to the fully twisted one."""
    out = series
    for i in range(1, series.shape.n + 1):
        vi = series.shape.v_ext(i)
        for r in range(1, vi + 1):
            for s in range(1, vi + 1):
                if r != s:
                    out = apply_op(out, DifferenceOp("gamma-inv", i=i, r=r, s=s))
    return out


# ---------------------------------------------------------------------------
# Weyl invariance

def _level_transpositions(shape: FlagShape):
    for i in range(1, shape.n + 1):
        vi = shape.v_ext(i)
        for j in range(1, vi + 1):
            for k in range(j + 1, vi + 1):
                yield i, j, k


def weyl_check(series: JSeries, seed: int = 0, trials: int = 4) -> dict:
    """Check invariance of every X-regrouped coefficient under all
    transpositions of the Chern roots at each level."""
    grouped = series.x_grouped()
    failures = []
    checked = 0
    for (i, j, k) in _level_transpositions(series.shape):
        swap = {P(i, j): Monomial.var(P(i, k)), P(i, k): Monomial.var(P(i, j))}
        for delta, c in grouped.items():
            checked += 1
            if not qsum_equal(c, c.subs(swap), seed=seed + checked,
                              trials=trials):
                failures.append({"transposition": [i, j, k],
                                 "degree": list(delta)})
    return {"checked": checked, "failures": failures, "pass": not failures}


# ---------------------------------------------------------------------------
# serialization (bit-exact round trip)

def monomial_to_json(m: Monomial) -> dict:
    return {v: e for v, e in m.exps}


def monomial_from_json(d: Mapping[str, int]) -> Monomial:
    return Monomial.make({v: int(e) for v, e in d.items()})


def term_to_json(t: FactoredTerm) -> dict:
    return {"scalar": format_fraction(t.scalar),
            "lead": monomial_to_json(t.lead),
            "factors": [{"monomial": monomial_to_json(f.monomial),
                         "exponent": f.exponent} for f in t.factors]}


def term_from_json(d: Mapping) -> FactoredTerm:
    return FactoredTerm.make(
        parse_fraction(d["scalar"]), monomial_from_json(d["lead"]),
        [(monomial_from_json(f["monomial"]), int(f["exponent"]))
         for f in d["factors"]])


def qsum_to_json(s: QSum) -> list:
    return [term_to_json(t) for t in s.terms]


def qsum_from_json(items) -> QSum:
    return QSum(tuple(term_from_json(t) for t in items))


def series_to_json(series: JSeries) -> dict:
    return {
        "shape": str(series.shape),
        "variant": {"kind": series.variant.kind, "i": series.variant.i,
                    "level": series.variant.level},
        "bound": series.bound,
        "coefficients": [
            {"degree": [list(row) for row in d.rows],
             "terms": qsum_to_json(c)}
            for d, c in series.coeffs.items()],
    }


def series_from_json(data: Mapping) -> JSeries:
    shape = FlagShape.parse(data["shape"])
    var = data["variant"]
    variant = Variant(var["kind"], i=int(var.get("i", 0)),
                      level=int(var.get("level", 0)))
    coeffs = {}
    for entry in data["coefficients"]:
        d = DegreeVector(tuple(tuple(int(x) for x in row)
                               for row in entry["degree"]))
        coeffs[d] = qsum_from_json(entry["terms"])
    return JSeries(shape, variant, int(data["bound"]), coeffs)
