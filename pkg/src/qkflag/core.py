"""Exact arithmetic on factored q-rational expressions.

Everything here is built from sums of "factored terms"

    scalar * lead_monomial * prod_k (1 - m_k)^{e_k},

where the m_k are Laurent monomials in named variables with integer
exponents and scalar is an exact rational.  No polynomial normalization is
ever performed: poles and zeros stay syntactically visible as factors, and
all arithmetic is exact (fractions.Fraction throughout, never floats).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

Q = "q"


class CoreError(Exception):
    pass


class UnboundVariableError(CoreError):
    """A variable had no value under the given specialization."""


class IllDefinedTermError(CoreError):
    """A term contains the reciprocal of an exactly vanishing factor."""


class WindowTooSmallError(CoreError):
    """A local expansion window cannot hold the pole order of a term."""


class RejectionExhaustedError(CoreError):
    """Random sampling kept hitting zeros/poles of the expressions."""


class RootNotRationalError(CoreError):
    """A requested m-th root of a monomial has non-integer exponents."""


class _Special:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


#: evaluation outcomes that are not plain rational numbers
ZERO = _Special("ZERO")
POLE = _Special("POLE")


@dataclass(frozen=True)
class Monomial:
    """Laurent monomial: a finite map from variable names to integer exponents."""

    exps: tuple[tuple[str, int], ...]

    @staticmethod
    def make(mapping: Mapping[str, int] | Iterable[tuple[str, int]] = ()) -> "Monomial":
        acc: dict[str, int] = {}
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        for var, e in items:
            acc[var] = acc.get(var, 0) + e
        return Monomial(tuple(sorted((v, e) for v, e in acc.items() if e != 0)))

    @staticmethod
    def one() -> "Monomial":
        return _ONE

    @staticmethod
    def var(name: str, exp: int = 1) -> "Monomial":
        return Monomial.make({name: exp})

    def is_one(self) -> bool:
        return not self.exps

    def get(self, var: str) -> int:
        for v, e in self.exps:
            if v == var:
                return e
        return 0

    def variables(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.exps)

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial.make(self.exps + other.exps)

    def __pow__(self, k: int) -> "Monomial":
        if k == 0:
            return _ONE
        return Monomial(tuple((v, e * k) for v, e in self.exps))

    def inv(self) -> "Monomial":
        return self ** -1

    def __truediv__(self, other: "Monomial") -> "Monomial":
        return self * other.inv()

    def subs(self, mapping: Mapping[str, "Monomial"]) -> "Monomial":
        """Substitute monomials for variables; unmapped variables survive."""
        out = _ONE
        for v, e in self.exps:
            rep = mapping.get(v)
            out = out * (rep ** e if rep is not None else Monomial((((v, e)),)))
        return out

    def split_q(self, active: str = Q) -> tuple[int, "Monomial"]:
        """Return (exponent of the active variable, remaining monomial)."""
        e0 = self.get(active)
        rest = Monomial(tuple((v, e) for v, e in self.exps if v != active))
        return e0, rest

    def root(self, m: int) -> "Monomial":
        if m == 1:
            return self
        for v, e in self.exps:
            if e % m != 0:
                raise RootNotRationalError(f"{self} has no exact {m}-th root")
        return Monomial(tuple((v, e // m) for v, e in self.exps))

    def eval(self, values: Mapping[str, Fraction]) -> Fraction:
        out = Fraction(1)
        for v, e in self.exps:
            if v not in values:
                raise UnboundVariableError(v)
            out *= Fraction(values[v]) ** e
        return out

    def __str__(self):
        if not self.exps:
            return "1"
        return "*".join(f"{v}^{e}" if e != 1 else v for v, e in self.exps)


_ONE = Monomial(())


@dataclass(frozen=True)
class Factor:
    """One factor (1 - monomial)^exponent."""

    monomial: Monomial
    exponent: int


@dataclass(frozen=True)
class FactoredTerm:
    """scalar * lead * prod (1 - m_k)^{e_k}, factors merged by monomial."""

    scalar: Fraction
    lead: Monomial
    factors: tuple[Factor, ...]

    @staticmethod
    def make(scalar, lead: Monomial = _ONE,
             factors: Iterable[tuple[Monomial, int]] = ()) -> "FactoredTerm":
        acc: dict[Monomial, int] = {}
        for mono, e in factors:
            acc[mono] = acc.get(mono, 0) + e
        merged = tuple(Factor(m, e) for m, e in sorted(
            ((m, e) for m, e in acc.items() if e != 0),
            key=lambda p: p[0].exps))
        return FactoredTerm(Fraction(scalar), lead, merged)

    @staticmethod
    def one() -> "FactoredTerm":
        return FactoredTerm.make(1)

    def is_exact_zero(self) -> bool:
        """True if a (1 - 1) factor survives merging with positive exponent."""
        return self.scalar == 0 or any(
            f.monomial.is_one() and f.exponent > 0 for f in self.factors)

    def is_ill_defined(self) -> bool:
        """True if a (1 - 1) factor survives merging in the denominator."""
        return any(f.monomial.is_one() and f.exponent < 0 for f in self.factors)

    def __mul__(self, other: "FactoredTerm") -> "FactoredTerm":
        return FactoredTerm.make(
            self.scalar * other.scalar, self.lead * other.lead,
            [(f.monomial, f.exponent) for f in self.factors + other.factors])

    def scale(self, c, mono: Monomial = _ONE) -> "FactoredTerm":
        return FactoredTerm(self.scalar * Fraction(c), self.lead * mono, self.factors)

    def subs(self, mapping: Mapping[str, Monomial]) -> "FactoredTerm":
        return FactoredTerm.make(
            self.scalar, self.lead.subs(mapping),
            [(f.monomial.subs(mapping), f.exponent) for f in self.factors])

    def variables(self) -> frozenset[str]:
        out = set(self.lead.variables())
        for f in self.factors:
            out |= f.monomial.variables()
        return frozenset(out)

    def inv(self) -> "FactoredTerm":
        return FactoredTerm.make(
            1 / self.scalar, self.lead.inv(),
            [(f.monomial, -f.exponent) for f in self.factors])


@dataclass(frozen=True)
class QSum:
    """Finite sum of factored terms.  Addition is concatenation."""

    terms: tuple[FactoredTerm, ...]

    @staticmethod
    def of(*terms: FactoredTerm) -> "QSum":
        return QSum(tuple(t for t in terms if t.scalar != 0))

    @staticmethod
    def zero() -> "QSum":
        return QSum(())

    @staticmethod
    def one() -> "QSum":
        return QSum.of(FactoredTerm.one())

    def __add__(self, other: "QSum") -> "QSum":
        return QSum(self.terms + other.terms)

    def __mul__(self, other: "QSum") -> "QSum":
        return QSum(tuple(a * b for a in self.terms for b in other.terms))

    def scale(self, c, mono: Monomial = _ONE) -> "QSum":
        return QSum(tuple(t.scale(c, mono) for t in self.terms))

    def mul_term(self, term: FactoredTerm) -> "QSum":
        return QSum(tuple(t * term for t in self.terms))

    def subs(self, mapping: Mapping[str, Monomial]) -> "QSum":
        return QSum(tuple(t.subs(mapping) for t in self.terms))

    def variables(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for t in self.terms:
            out |= t.variables()
        return out


@dataclass(frozen=True)
class Specialization:
    """Exact rational values for variables, with an optional prior substitution.

    The substitution map (variable -> monomial) is applied before values,
    which is how Chern-root restrictions and m-th-root reparametrizations
    (L = U^m) enter evaluations.
    """

    values: Mapping[str, Fraction]
    subs: Optional[Mapping[str, Monomial]] = None

    def apply_subs(self, s: QSum) -> QSum:
        return s.subs(self.subs) if self.subs else s


def eval_term(term: FactoredTerm, q_value: Fraction, spec: Specialization,
              active: str = Q):
    """Evaluate one term exactly.  Returns a Fraction, ZERO, or POLE."""
    if spec.subs:
        term = term.subs(spec.subs)
    values = dict(spec.values)
    values[active] = Fraction(q_value)
    out = term.scalar * term.lead.eval(values)
    for f in term.factors:
        base = 1 - f.monomial.eval(values)
        if base == 0:
            if f.exponent > 0:
                return ZERO
            return POLE
        out *= Fraction(base) ** f.exponent
    return out


def eval_qsum(s: QSum, q_value: Fraction, spec: Specialization, active: str = Q):
    """Evaluate a sum exactly.  A pole in any term makes the result POLE
    (cancellation across terms is not attempted here; use local_expand)."""
    total = Fraction(0)
    for t in s.terms:
        v = eval_term(t, q_value, spec, active)
        if v is POLE:
            return POLE
        if v is not ZERO:
            total += v
    return total


# ---------------------------------------------------------------------------
# truncated power series in the local coordinate t (lists of Fractions)

def _ts_mul(a: Sequence[Fraction], b: Sequence[Fraction], prec: int) -> list[Fraction]:
    out = [Fraction(0)] * prec
    for i, ai in enumerate(a[:prec]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[: prec - i]):
            if bj != 0:
                out[i + j] += ai * bj
    return out


def _ts_inv(a: Sequence[Fraction], prec: int) -> list[Fraction]:
    if not a or a[0] == 0:
        raise IllDefinedTermError("inverting a series with zero constant term")
    inv0 = 1 / a[0]
    out = [Fraction(0)] * prec
    out[0] = inv0
    for k in range(1, prec):
        s = Fraction(0)
        for j in range(1, min(k, len(a) - 1) + 1):
            s += a[j] * out[k - j]
        out[k] = -inv0 * s
    return out


def _ts_pow(a: Sequence[Fraction], k: int, prec: int) -> list[Fraction]:
    if k < 0:
        return _ts_pow(_ts_inv(a, prec), -k, prec)
    out = [Fraction(0)] * prec
    out[0] = Fraction(1)
    base = list(a[:prec]) + [Fraction(0)] * max(0, prec - len(a))
    while k:
        if k & 1:
            out = _ts_mul(out, base, prec)
        base = _ts_mul(base, base, prec)
        k >>= 1
    return out


def _one_plus_t_pow(e: int, prec: int) -> list[Fraction]:
    """(1+t)^e as a truncated series, e may be negative."""
    out = [Fraction(1)]
    c = Fraction(1)
    for j in range(1, prec):
        c = c * (e - j + 1) / j
        out.append(c)
    return out


@dataclass(frozen=True)
class LocalSeries:
    """Truncated Laurent expansion in t where active_var = center*(1+t)."""

    center: Fraction
    low: int
    high: int
    coeffs: tuple[Fraction, ...]  # orders low..high inclusive

    def coeff(self, k: int) -> Fraction:
        if not (self.low <= k <= self.high):
            raise WindowTooSmallError(f"order {k} outside [{self.low}, {self.high}]")
        return self.coeffs[k - self.low]

    def valuation(self) -> Optional[int]:
        for k in range(self.low, self.high + 1):
            if self.coeff(k) != 0:
                return k
        return None


def _term_local(term: FactoredTerm, q0: Fraction, values: Mapping[str, Fraction],
                low: int, high: int, active: str) -> Optional[dict[int, Fraction]]:
    """Laurent coefficients of one term at active = q0(1+t); None if exact zero."""
    prec = high - low + 1
    vals = dict(values)
    vals[active] = Fraction(1)  # active variable handled via (1+t) powers

    e0, rest0 = term.lead.split_q(active)
    scalar = term.scalar * rest0.eval(vals) * Fraction(q0) ** e0
    unit = _one_plus_t_pow(e0, prec + 1)
    val_total = 0

    for f in term.factors:
        e_q, rest = f.monomial.split_q(active)
        c = rest.eval(vals) * Fraction(q0) ** e_q
        # series of 1 - c (1+t)^{e_q}
        s = [-c * x for x in _one_plus_t_pow(e_q, prec + 2)]
        s[0] += 1
        v = next((i for i, x in enumerate(s) if x != 0), None)
        if v is None:
            # only constant-in-q factors can vanish identically
            if f.exponent > 0:
                return None
            raise IllDefinedTermError("reciprocal of an exactly vanishing factor")
        u = s[v:]
        val_total += v * f.exponent
        unit = _ts_mul(unit, _ts_pow(u, f.exponent, prec + 1), prec + 1)

    if val_total < low:
        raise WindowTooSmallError(
            f"term has valuation {val_total}, window starts at {low}")
    out: dict[int, Fraction] = {}
    for j, cj in enumerate(unit):
        k = val_total + j
        if low <= k <= high and cj != 0:
            out[k] = out.get(k, Fraction(0)) + scalar * cj
    return out


def local_expand(s: QSum, q0: Fraction, spec: Specialization,
                 window: tuple[int, int] = (4, 4), active: str = Q) -> LocalSeries:
    """Expand a sum at active = q0(1+t) over orders [-window[0], window[1]].

    Cancellation between terms is respected: coefficients are summed
    exactly before the series is reported.
    """
    low, high = -window[0], window[1]
    s = spec.apply_subs(s)
    acc: dict[int, Fraction] = {}
    for term in s.terms:
        part = _term_local(term, Fraction(q0), spec.values, low, high, active)
        if part is None:
            continue
        for k, c in part.items():
            acc[k] = acc.get(k, Fraction(0)) + c
    coeffs = tuple(acc.get(k, Fraction(0)) for k in range(low, high + 1))
    return LocalSeries(Fraction(q0), low, high, coeffs)


def _max_pole_bound(s: QSum) -> int:
    """Upper bound for the pole order of any single term at a finite point:
    each denominator factor vanishes to order at most one in t."""
    bound = 0
    for t in s.terms:
        bound = max(bound, sum(-f.exponent for f in t.factors if f.exponent < 0))
    return bound


def residue_dq_over_q(s: QSum, q0: Fraction, spec: Specialization,
                      active: str = Q) -> tuple[Fraction, int]:
    """Exact residue of s * d(active)/active at active = q0, with pole order.

    With active = q0(1+t) the form is s * dt/(1+t); the residue is the
    t^{-1} coefficient of the expansion of s/(1+t).
    """
    k = _max_pole_bound(spec.apply_subs(s))
    series = local_expand(s, q0, spec, window=(k + 1, 0), active=active)
    res = Fraction(0)
    sign = 1
    # 1/(1+t) = sum (-t)^i; pick out the t^{-1} coefficient of the product
    for i in range(0, k + 1):
        res += sign * series.coeff(-1 - i)
        sign = -sign
    v = series.valuation()
    pole_order = -v if v is not None and v < 0 else 0
    return res, pole_order


# ---------------------------------------------------------------------------
# probabilistic identity testing

def _sample_value(rng: random.Random, size: int) -> Fraction:
    return Fraction(rng.randint(1, size), rng.randint(1, size))


def qsum_equal(a: QSum, b: QSum, degree_hint: int = 64, trials: int = 8,
               seed: int = 0, values: Optional[Mapping[str, Fraction]] = None,
               max_rejects: int = 200) -> bool:
    """Schwartz-Zippel style equality test for factored q-rational sums.

    Variables are sampled uniformly from {p/r : 1 <= p, r <= S} with
    S = max(10^4, 8 * degree_hint * trials), and a sample is rejected when
    any factor of either side vanishes there (so both sides are evaluated
    away from their visible zeros and poles).  For a nonzero difference of
    total degree <= degree_hint the chance a single accepted sample lies on
    its zero locus is at most degree_hint/S, so the probability that all
    `trials` independent samples miss a genuine difference is bounded by
    (degree_hint/S)^trials < 10^{-29} at the defaults.
    """
    rng = random.Random(seed)
    size = max(10_000, 8 * degree_hint * trials)
    diff = a + b.scale(-1)
    vars_needed = sorted(diff.variables() - {Q})
    done = 0
    rejects = 0
    while done < trials:
        if rejects > max_rejects:
            raise RejectionExhaustedError("too many samples hit zeros/poles")
        vals = dict(values or {})
        for v in vars_needed:
            vals.setdefault(v, _sample_value(rng, size))
        q_val = _sample_value(rng, size)
        spec = Specialization(values=vals)
        ok = True
        total = Fraction(0)
        for term in diff.terms:
            v = eval_term(term, q_val, spec)
            if v is ZERO or v is POLE:
                ok = False
                break
            total += v
        if not ok:
            rejects += 1
            continue
        if total != 0:
            return False
        done += 1
    return True


# ---------------------------------------------------------------------------
# exact fallback: sparse Laurent-polynomial expansion for small sums

def _poly_mul(a: dict[Monomial, Fraction], b: dict[Monomial, Fraction]
              ) -> dict[Monomial, Fraction]:
    out: dict[Monomial, Fraction] = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = ma * mb
            c = out.get(m, Fraction(0)) + ca * cb
            if c == 0:
                out.pop(m, None)
            else:
                out[m] = c
    return out


def expand_exact(s: QSum, max_terms: int = 200_000) -> dict[Monomial, Fraction]:
    """Clear denominators across the sum and expand the numerator exactly.

    Returns the sparse Laurent polynomial  s * (common denominator); it is
    identically zero iff s is.  Intended for small expressions (the size
    guard raises CoreError when expansion grows past max_terms).
    """
    # common denominator: max multiplicity of each inverted factor
    den: dict[Monomial, int] = {}
    for t in s.terms:
        for f in t.factors:
            if f.exponent < 0:
                den[f.monomial] = max(den.get(f.monomial, 0), -f.exponent)
    total: dict[Monomial, Fraction] = {}
    for t in s.terms:
        if t.is_exact_zero():
            continue
        if t.is_ill_defined():
            raise IllDefinedTermError("cannot expand an ill-defined term")
        poly = {t.lead: t.scalar}
        mult: dict[Monomial, int] = dict(den)
        for f in t.factors:
            mult[f.monomial] = mult.get(f.monomial, 0) + f.exponent
        for mono, e in mult.items():
            base = {Monomial.one(): Fraction(1), mono: Fraction(-1)}
            for _ in range(e):
                poly = _poly_mul(poly, base)
                if len(poly) > max_terms:
                    raise CoreError("exact expansion exceeded size guard")
        for m, c in poly.items():
            c2 = total.get(m, Fraction(0)) + c
            if c2 == 0:
                total.pop(m, None)
            else:
                total[m] = c2
    return total


def qsum_equal_exact(a: QSum, b: QSum, max_terms: int = 200_000) -> bool:
    """Exact equality by full expansion over a common denominator."""
    return not expand_exact(a + b.scale(-1), max_terms=max_terms)


def format_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s: str) -> Fraction:
    if "/" in s:
        num, den = s.split("/")
        return Fraction(int(num), int(den))
    return Fraction(int(s))
