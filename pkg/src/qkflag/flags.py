"""Combinatorial geometry of partial flag varieties and their abelian quotients.

Conventions.  A shape is 0 < v_1 < ... < v_n < N with v_{n+1} := N.  The
flag variety X carries the torus T with characters L_{n+1}_r (r = 1..N);
the abelianized quotient Y carries the bigger torus with characters L_a_r
for a = 2..n+1, r = 1..v_a.  Chern roots of the tautological bundles are
the variables P_i_s (i = 1..n, s = 1..v_i).

Torus-fixed points of X are chains S_1 < ... < S_n of subsets of {1..N};
fixed points of Y are tuples of maps f_i : {1..v_i} -> {1..v_{i+1}}
("one 1 per column"), nondegenerate exactly when every f_i is injective.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial, prod

from .core import Monomial


class GeometryError(Exception):
    pass


def L(a: int, r: int) -> str:
    return f"L_{a}_{r}"


def P(i: int, s: int) -> str:
    return f"P_{i}_{s}"


def U(a: int, r: int) -> str:
    """Root witness for L(a, r): recursions at cover degree m set L = U^m."""
    return f"U_{a}_{r}"


@dataclass(frozen=True)
class FlagShape:
    v: tuple[int, ...]
    N: int

    def __post_init__(self):
        if not self.v or any(a <= 0 for a in self.v):
            raise GeometryError("dimensions must be positive")
        if any(a >= b for a, b in zip(self.v, self.v[1:])) or self.v[-1] >= self.N:
            raise GeometryError("dimensions must satisfy v_1 < ... < v_n < N")

    @staticmethod
    def parse(text: str) -> "FlagShape":
        """Parse '1,2:3' (or '1,2;3') into Flag(1,2;3)."""
        text = text.replace(";", ":")
        if ":" not in text:
            raise GeometryError(f"bad shape {text!r}; expected 'v1,...,vn:N'")
        dims, n_str = text.split(":")
        return FlagShape(tuple(int(x) for x in dims.split(",")), int(n_str))

    @property
    def n(self) -> int:
        return len(self.v)

    def v_ext(self, i: int) -> int:
        """v_i for 1 <= i <= n+1, with v_{n+1} = N."""
        return self.N if i == self.n + 1 else self.v[i - 1]

    def dim_x(self) -> int:
        return sum(self.v_ext(i) * (self.v_ext(i + 1) - self.v_ext(i))
                   for i in range(1, self.n + 1))

    def dim_y(self) -> int:
        return sum(self.v_ext(i) * (self.v_ext(i + 1) - 1)
                   for i in range(1, self.n + 1))

    def weyl_order(self) -> int:
        return prod(factorial(self.v_ext(i)) for i in range(1, self.n + 1))

    def degree_slots(self) -> list[tuple[int, int]]:
        """(i, j) index pairs of the Y degree lattice, level-major order."""
        return [(i, j) for i in range(1, self.n + 1)
                for j in range(1, self.v_ext(i) + 1)]

    def dual(self) -> "FlagShape":
        return FlagShape(tuple(self.N - vi for vi in reversed(self.v)), self.N)

    def __str__(self):
        return ",".join(map(str, self.v)) + f":{self.N}"


@dataclass(frozen=True)
class DegreeVector:
    """Nonnegative degrees d_{ij}, one per Chern root P_i_j."""

    rows: tuple[tuple[int, ...], ...]

    @staticmethod
    def make(shape: FlagShape, entries) -> "DegreeVector":
        rows = tuple(tuple(int(x) for x in row) for row in entries)
        if tuple(len(r) for r in rows) != tuple(shape.v):
            raise GeometryError("degree vector does not match shape")
        if any(x < 0 for r in rows for x in r):
            raise GeometryError("degrees must be nonnegative")
        return DegreeVector(rows)

    @staticmethod
    def zero(shape: FlagShape) -> "DegreeVector":
        return DegreeVector(tuple((0,) * vi for vi in shape.v))

    def d(self, i: int, j: int) -> int:
        """d_{ij} with the convention d_{n+1, j} = 0."""
        if i == len(self.rows) + 1:
            return 0
        return self.rows[i - 1][j - 1]

    def total(self) -> int:
        return sum(sum(r) for r in self.rows)

    def level_sums(self) -> tuple[int, ...]:
        return tuple(sum(r) for r in self.rows)

    def add(self, other: "DegreeVector") -> "DegreeVector":
        return DegreeVector(tuple(tuple(a + b for a, b in zip(ra, rb))
                                  for ra, rb in zip(self.rows, other.rows)))

    def scale(self, m: int) -> "DegreeVector":
        return DegreeVector(tuple(tuple(m * a for a in r) for r in self.rows))


def enumerate_degrees(shape: FlagShape, bound: int) -> list[DegreeVector]:
    """All degree vectors with total degree <= bound, graded then lex."""
    slots = shape.degree_slots()
    out = []
    for total in range(bound + 1):
        for flat in _compositions(total, len(slots)):
            rows, k = [], 0
            for vi in shape.v:
                rows.append(tuple(flat[k:k + vi]))
                k += vi
            out.append(DegreeVector(tuple(rows)))
    return out


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# fixed points of X

@dataclass(frozen=True)
class FixedPointX:
    """Chain of subsets as ordered tuples; the j-th entry of chain[i-1]
    labels the Chern root P_i_j at this point."""

    chain: tuple[tuple[int, ...], ...]

    def sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(c) for c in self.chain)

    def canonical(self) -> "FixedPointX":
        return FixedPointX(tuple(tuple(sorted(c)) for c in self.chain))


def fixed_points_X(shape: FlagShape) -> list[FixedPointX]:
    """All torus-fixed chains, count prod_i C(v_{i+1}, v_i).

    Built top-down: choose S_n inside {1..N}, then S_{n-1} inside S_n, ...
    """
    out = []
    def down(suffix: list[tuple[int, ...]], level: int):
        if level == 0:
            out.append(FixedPointX(tuple(suffix)))
            return
        pool = suffix[0] if suffix else tuple(range(1, shape.N + 1))
        for pick in itertools.combinations(pool, shape.v_ext(level)):
            down([pick] + suffix, level - 1)
    down([], shape.n)
    return out


def point_A_X(shape: FlagShape) -> FixedPointX:
    return FixedPointX(tuple(tuple(range(1, vi + 1)) for vi in shape.v))


def subs_X(shape: FlagShape, fp: FixedPointX) -> dict[str, Monomial]:
    """Chern-root restriction P_i_j -> L_{n+1}_{chain_i[j]} at a fixed chain."""
    out = {}
    for i in range(1, shape.n + 1):
        for j, t in enumerate(fp.chain[i - 1], start=1):
            out[P(i, j)] = Monomial.var(L(shape.n + 1, t))
    return out


@dataclass(frozen=True)
class TangentChar:
    char: Monomial
    label: tuple[int, int, int]  # (level i, target r, source s)


def tangent_chars_X(shape: FlagShape, fp: FixedPointX) -> list[TangentChar]:
    """Characters {L_r / L_s : s in S_i, r in S_{i+1} \\ S_i}; all distinct."""
    sets = fp.sets() + (frozenset(range(1, shape.N + 1)),)
    out = []
    for i in range(1, shape.n + 1):
        for s in sorted(sets[i - 1]):
            for r in sorted(sets[i] - sets[i - 1]):
                mono = Monomial.var(L(shape.n + 1, r)) / Monomial.var(L(shape.n + 1, s))
                out.append(TangentChar(mono, (i, r, s)))
    if len(out) != shape.dim_x():
        raise GeometryError("tangent character count mismatch")
    return out


# ---------------------------------------------------------------------------
# fixed points of Y

@dataclass(frozen=True)
class FixedPointY:
    """maps[i-1][s-1] = f_i(s) in {1..v_{i+1}}."""

    maps: tuple[tuple[int, ...], ...]

    def f(self, i: int, s: int) -> int:
        return self.maps[i - 1][s - 1]

    def nondegenerate(self) -> bool:
        return all(len(set(row)) == len(row) for row in self.maps)


def fixed_points_Y(shape: FlagShape) -> list[FixedPointY]:
    level_choices = []
    for i in range(1, shape.n + 1):
        codomain = range(1, shape.v_ext(i + 1) + 1)
        level_choices.append(list(itertools.product(codomain, repeat=shape.v_ext(i))))
    return [FixedPointY(tuple(rows)) for rows in itertools.product(*level_choices)]


def point_A_Y(shape: FlagShape) -> FixedPointY:
    """All canonical inclusions: f_i(s) = s."""
    return FixedPointY(tuple(tuple(range(1, vi + 1)) for vi in shape.v))


def path_char(shape: FlagShape, fp: FixedPointY, i: int, start: int) -> Monomial:
    """prod_{a=i+1}^{n+1} L_{a, g_a} with g_{i+1} = start, g_{a+1} = f_a(g_a)."""
    g = start
    mono = Monomial.one()
    for a in range(i + 1, shape.n + 2):
        mono = mono * Monomial.var(L(a, g))
        if a <= shape.n:
            g = fp.f(a, g)
    return mono


def restrict_P_Y(shape: FlagShape, fp: FixedPointY, i: int, s: int) -> Monomial:
    """Value of the Chern root P_i_s at a fixed point of Y."""
    if i == shape.n + 1:
        return Monomial.one()
    return path_char(shape, fp, i, fp.f(i, s))


def subs_Y(shape: FlagShape, fp: FixedPointY) -> dict[str, Monomial]:
    return {P(i, s): restrict_P_Y(shape, fp, i, s)
            for i in range(1, shape.n + 1)
            for s in range(1, shape.v_ext(i) + 1)}


def tangent_chars_Y(shape: FlagShape, fp: FixedPointY) -> list[TangentChar]:
    """Characters of T_fp Y: for each (i, s) the directions r != f_i(s),
    with the single trivial direction r = f_i(s) removed.  Under the big
    torus all remaining characters are nontrivial, also at degenerate
    points; degenerate_directions reports which die under restriction."""
    out = []
    for i in range(1, shape.n + 1):
        for s in range(1, shape.v_ext(i) + 1):
            base = path_char(shape, fp, i, fp.f(i, s))
            for r in range(1, shape.v_ext(i + 1) + 1):
                if r == fp.f(i, s):
                    continue
                char = path_char(shape, fp, i, r) / base
                if char.is_one():
                    raise GeometryError(
                        f"DEGENERATE_TRIVIAL_CHAR at {(i, r, s)}")
                out.append(TangentChar(char, (i, r, s)))
    if len(out) != shape.dim_y():
        raise GeometryError("tangent character count mismatch")
    return out


def degenerate_directions(shape: FlagShape, fp: FixedPointY) -> list[tuple[int, int, int]]:
    """Directions whose character becomes trivial once the off-diagonal
    torus factors are switched off (L_a_r -> 1 for a <= n); these are the
    non-isolated directions at a degenerate fixed point."""
    small = {L(a, r): Monomial.one()
             for a in range(2, shape.n + 1)
             for r in range(1, shape.v_ext(a) + 1)}
    return [tc.label for tc in tangent_chars_Y(shape, fp)
            if tc.char.subs(small).is_one()]


def count_fixed_points_X(shape: FlagShape) -> int:
    return prod(comb(shape.v_ext(i + 1), shape.v_ext(i))
                for i in range(1, shape.n + 1))
