"""Exact arithmetic in a monogenic order Z[x]/(f).

Elements are integer coordinate vectors over the power basis 1, t, ..., t^(d-1)
where t is the class of x. Ideals are full-rank sublattices kept in a
canonical upper-triangular column Hermite normal form: column j is supported
on rows 0..j, the diagonal is positive, and every entry to the right of a
diagonal entry is reduced into [0, diagonal).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd, prod
from typing import Iterable, Iterator, Sequence

import sympy
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_factor

from .errors import (
    CoordinateOverflow,
    DegreeTooLarge,
    EmptyFamily,
    NotCoprime,
    NotMonic,
    NotPrime,
    Reducible,
    UnsafePrime,
    ZeroElement,
)

INT64_MAX = 2**63 - 1
DEFAULT_DEGREE_CAP = 6


# --------------------------------------------------------------------------
# orders and elements


@dataclass(frozen=True, eq=False)
class FieldOrder:
    """The order Z[t] = Z[x]/(f) for a monic irreducible f.

    ``f_coeffs`` is lowest degree first. ``mul_table[i][j]`` holds the
    coordinates of t^i * t^j. ``maximal`` records the caller's assertion that
    the order is the full ring of integers; only prime factorization uses it.
    """

    f_coeffs: tuple[int, ...]
    mul_table: tuple[tuple[tuple[int, ...], ...], ...] = field(repr=False)
    wide: bool = False
    maximal: bool = False

    @property
    def degree(self) -> int:
        return len(self.f_coeffs) - 1

    def __eq__(self, other):
        return isinstance(other, FieldOrder) and self.f_coeffs == other.f_coeffs

    def __hash__(self):
        return hash(("FieldOrder", self.f_coeffs))

    def element(self, value) -> RingElement:
        if isinstance(value, RingElement):
            if value.order != self:
                raise ValueError("element belongs to a different order")
            return value
        if isinstance(value, int):
            coords = (value,) + (0,) * (self.degree - 1)
        else:
            coords = tuple(int(c) for c in value)
            if len(coords) > self.degree:
                raise ValueError(f"expected at most {self.degree} coordinates, got {len(coords)}")
            coords = coords + (0,) * (self.degree - len(coords))
        return RingElement(self, coords)

    @property
    def zero(self) -> RingElement:
        return RingElement(self, (0,) * self.degree)

    @property
    def one(self) -> RingElement:
        return self.element(1)

    @property
    def theta(self) -> RingElement:
        if self.degree == 1:
            return self.element(-self.f_coeffs[0])
        return self.element((0, 1))

    def eval_poly(self, coeffs_low: Sequence[int]) -> RingElement:
        """g(t) for g given lowest degree first (Horner in the order)."""
        acc = self.zero
        t = self.theta
        for c in reversed(list(coeffs_low)):
            acc = acc * t + self.element(int(c))
        return acc

    def discriminant(self) -> int:
        x = sympy.Symbol("x")
        return int(sympy.discriminant(sympy.Poly(list(reversed(self.f_coeffs)), x)))


def _powers_mod_f(f: tuple[int, ...]) -> list[tuple[int, ...]]:
    d = len(f) - 1
    powers = []
    cur = [1] + [0] * (d - 1)
    for _ in range(2 * d - 1):
        powers.append(tuple(cur))
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * fc for c, fc in zip(cur, f[:-1])]
    return powers


def make_order(
    f_coeffs: Sequence[int],
    degree_cap: int = DEFAULT_DEGREE_CAP,
    wide: bool = False,
    maximal: bool = False,
) -> FieldOrder:
    f = tuple(int(c) for c in f_coeffs)
    if len(f) < 2:
        raise ValueError("need a polynomial of degree >= 1")
    if f[-1] != 1:
        raise NotMonic(f"leading coefficient is {f[-1]}, expected 1")
    d = len(f) - 1
    if d > degree_cap:
        raise DegreeTooLarge(f"degree {d} exceeds cap {degree_cap}")
    if d > 1:
        x = sympy.Symbol("x")
        if not sympy.Poly(list(reversed(f)), x, domain="QQ").is_irreducible:
            raise Reducible(f"{f} factors over the rationals")
    if d == 1:
        # Z[x]/(x + c) is Z with t = -c
        table = (((1,),),)
    else:
        powers = _powers_mod_f(f)
        table = tuple(tuple(powers[i + j] for j in range(d)) for i in range(d))
    return FieldOrder(f, table, wide=wide, maximal=maximal)


def _checked(order: FieldOrder, coords: tuple[int, ...]) -> tuple[int, ...]:
    if not order.wide:
        for c in coords:
            if c > INT64_MAX or c < -INT64_MAX - 1:
                raise CoordinateOverflow(f"coordinate {c} exceeds 64 bits; use a wide order")
    return coords


@dataclass(frozen=True)
class RingElement:
    order: FieldOrder = field(repr=False)
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != self.order.degree:
            raise ValueError("coordinate length does not match the order degree")

    def __add__(self, other):
        return elem_add(self, self.order.element(other))

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.order, tuple(-c for c in self.coords))

    def __sub__(self, other):
        return elem_add(self, -self.order.element(other))

    def __rsub__(self, other):
        return elem_add(self.order.element(other), -self)

    def __mul__(self, other):
        if isinstance(other, int):
            return RingElement(self.order, _checked(self.order, tuple(other * c for c in self.coords)))
        return elem_mul(self, other)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)

    def norm(self) -> int:
        """Absolute field norm, |det| of multiplication by self."""
        if self.is_zero():
            return 0
        return principal_ideal(self).norm


def elem_add(a: RingElement, b: RingElement) -> RingElement:
    if a.order != b.order:
        raise ValueError("elements belong to different orders")
    return RingElement(a.order, _checked(a.order, tuple(x + y for x, y in zip(a.coords, b.coords))))


def elem_mul(a: RingElement, b: RingElement) -> RingElement:
    if a.order != b.order:
        raise ValueError("elements belong to different orders")
    order = a.order
    d = order.degree
    out = [0] * d
    table = order.mul_table
    for i, ai in enumerate(a.coords):
        if not ai:
            continue
        row = table[i]
        for j, bj in enumerate(b.coords):
            if not bj:
                continue
            s = ai * bj
            for k, t in enumerate(row[j]):
                if t:
                    out[k] += s * t
    return RingElement(order, _checked(order, tuple(out)))


# --------------------------------------------------------------------------
# Hermite normal form


def _hnf(cols: list[list[int]], d: int, tracks: list[list[int]] | None = None):
    """Column HNF of the lattice spanned by ``cols``.

    Returns (pivot columns, pivot tracks). ``tracks`` records the column
    operations, so pivot i equals sum_k tracks[i][k] * input column k.
    """
    cols = [list(c) for c in cols]
    tracks = [list(t) for t in tracks] if tracks is not None else None
    active = list(range(len(cols)))
    pivots = [0] * d

    def axpy(dst: int, q: int, src: int) -> None:
        cd, cs = cols[dst], cols[src]
        for r in range(d):
            cd[r] -= q * cs[r]
        if tracks is not None:
            td, ts = tracks[dst], tracks[src]
            for r in range(len(td)):
                td[r] -= q * ts[r]

    for i in range(d - 1, -1, -1):
        nz = [k for k in active if cols[k][i]]
        while len(nz) > 1:
            k0 = min(nz, key=lambda k: abs(cols[k][i]))
            a = cols[k0][i]
            for k in nz:
                if k != k0:
                    q = cols[k][i] // a
                    if q:
                        axpy(k, q, k0)
            nz = [k for k in nz if cols[k][i]]
        if not nz:
            raise ValueError("generators do not span a full-rank lattice")
        k = nz[0]
        if cols[k][i] < 0:
            cols[k] = [-c for c in cols[k]]
            if tracks is not None:
                tracks[k] = [-t for t in tracks[k]]
        pivots[i] = k
        active.remove(k)

    for i in range(d - 1, -1, -1):
        pi = pivots[i]
        h = cols[pi][i]
        for j in range(i + 1, d):
            q = cols[pivots[j]][i] // h
            if q:
                axpy(pivots[j], q, pi)

    out_cols = [cols[pivots[i]] for i in range(d)]
    out_tracks = [tracks[pivots[i]] for i in range(d)] if tracks is not None else None
    return out_cols, out_tracks


def hnf(columns: Iterable[Sequence[int]], d: int) -> tuple[tuple[int, ...], ...]:
    """Canonical HNF basis (as rows) of the lattice spanned by ``columns``."""
    cols, _ = _hnf([list(c) for c in columns], d)
    return tuple(tuple(cols[c][r] for c in range(d)) for r in range(d))


def _reduce(basis: tuple[tuple[int, ...], ...], coords: Sequence[int]) -> list[int]:
    v = list(coords)
    for i in range(len(v) - 1, -1, -1):
        h = basis[i][i]
        q = v[i] // h
        if q:
            for r in range(i + 1):
                v[r] -= q * basis[r][i]
    return v


# --------------------------------------------------------------------------
# ideals


@dataclass(frozen=True, eq=False)
class IdealLattice:
    order: FieldOrder = field(repr=False)
    basis: tuple[tuple[int, ...], ...]
    norm: int

    def __eq__(self, other):
        return isinstance(other, IdealLattice) and self.order == other.order and self.basis == other.basis

    def __hash__(self):
        return hash((self.order, self.basis))

    @classmethod
    def from_generators(cls, order: FieldOrder, gens: Iterable, check: bool = True) -> IdealLattice:
        gens = [order.element(g) for g in gens]
        gens = [g for g in gens if not g.is_zero()]
        if not gens:
            raise ZeroElement("the zero ideal is not a lattice")
        t = order.theta
        cols = []
        for g in gens:
            cur = g
            for _ in range(order.degree):
                cols.append(list(cur.coords))
                cur = _wide_mul(cur, t)
        return cls.from_columns(order, cols, check=check)

    @classmethod
    def from_columns(cls, order: FieldOrder, cols, check: bool = True) -> IdealLattice:
        basis = hnf(cols, order.degree)
        ideal = cls(order, basis, prod(basis[i][i] for i in range(order.degree)))
        if check:
            t = order.theta
            for c in ideal.columns():
                if any(_reduce(basis, _wide_mul(RingElement(order, c), t).coords)):
                    raise ValueError("lattice is not closed under multiplication by t")
        return ideal

    def columns(self) -> list[tuple[int, ...]]:
        d = len(self.basis)
        return [tuple(self.basis[r][c] for r in range(d)) for c in range(d)]

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.basis[i][i] for i in range(len(self.basis)))

    def sort_key(self):
        return (self.norm, tuple(x for row in self.basis for x in row))

    def __contains__(self, a) -> bool:
        return contains(self, self.order.element(a))

    def __add__(self, other: IdealLattice) -> IdealLattice:
        return ideal_sum(self, other)

    def __mul__(self, other: IdealLattice) -> IdealLattice:
        return ideal_product(self, other)

    def __pow__(self, k: int) -> IdealLattice:
        if k < 1:
            raise ValueError("only positive powers")
        out = self
        for _ in range(k - 1):
            out = ideal_product(out, self)
        return out

    def __repr__(self):
        return f"IdealLattice(norm={self.norm}, basis={self.basis})"


def _wide_mul(a: RingElement, b: RingElement) -> RingElement:
    # lattice bookkeeping is never width-checked
    if a.order.wide:
        return elem_mul(a, b)
    wide = FieldOrder(a.order.f_coeffs, a.order.mul_table, wide=True)
    return RingElement(a.order, elem_mul(RingElement(wide, a.coords), RingElement(wide, b.coords)).coords)


def unit_ideal(order: FieldOrder) -> IdealLattice:
    return IdealLattice.from_generators(order, [1], check=False)


def principal_ideal(a: RingElement) -> IdealLattice:
    if a.is_zero():
        raise ZeroElement("(0) is not a nonzero ideal")
    return IdealLattice.from_generators(a.order, [a])


def ideal_norm(b: IdealLattice) -> int:
    return b.norm


def _same_order(a: IdealLattice, b: IdealLattice) -> None:
    if a.order != b.order:
        raise ValueError("ideals belong to different orders")


def ideal_sum(a: IdealLattice, b: IdealLattice) -> IdealLattice:
    _same_order(a, b)
    return IdealLattice.from_columns(a.order, a.columns() + b.columns(), check=False)


def is_coprime(a: IdealLattice, b: IdealLattice) -> bool:
    _same_order(a, b)
    # N(a) lies in a, so coprime norms already give 1 in a + b
    if gcd(a.norm, b.norm) == 1:
        return True
    return ideal_sum(a, b).norm == 1


def ideal_product(a: IdealLattice, b: IdealLattice) -> IdealLattice:
    _same_order(a, b)
    order = a.order
    cols = []
    for x in a.columns():
        ex = RingElement(order, x)
        for y in b.columns():
            cols.append(list(_wide_mul(ex, RingElement(order, y)).coords))
    # a.norm * b.norm lies in the product; keeping it as generator bounds entries
    n = a.norm * b.norm
    for i in range(order.degree):
        cols.append([n if r == i else 0 for r in range(order.degree)])
    return IdealLattice.from_columns(order, cols, check=False)


def contains(b: IdealLattice, a: RingElement) -> bool:
    if a.order != b.order:
        raise ValueError("element and ideal belong to different orders")
    return not any(_reduce(b.basis, a.coords))


def residue_rep(a: RingElement, b: IdealLattice) -> RingElement:
    if a.order != b.order:
        raise ValueError("element and ideal belong to different orders")
    return RingElement(a.order, tuple(_reduce(b.basis, a.coords)))


def residues(b: IdealLattice) -> Iterator[RingElement]:
    """All N(b) canonical representatives; coordinate 0 varies fastest."""
    ranges = [range(h) for h in reversed(b.diagonal)]
    for rev in product(*ranges):
        yield RingElement(b.order, tuple(reversed(rev)))


def residue_index(a: RingElement, b: IdealLattice) -> int:
    """Mixed-radix index of a mod b, consistent with the order of ``residues``."""
    idx, scale = 0, 1
    for r, h in zip(_reduce(b.basis, a.coords), b.diagonal):
        idx += r * scale
        scale *= h
    return idx


def _split_one(a: IdealLattice, b: IdealLattice) -> tuple[RingElement, RingElement]:
    """u in a, v in b with u + v = 1."""
    d = a.order.degree
    cols = a.columns() + b.columns()
    tracks = [[1 if r == k else 0 for r in range(2 * d)] for k in range(2 * d)]
    piv, tr = _hnf([list(c) for c in cols], d, tracks)
    if prod(piv[i][i] for i in range(d)) != 1:
        raise NotCoprime("ideals are not coprime")
    coeff = tr[0]
    u = [0] * d
    v = [0] * d
    for k, c in enumerate(coeff):
        if not c:
            continue
        tgt = u if k < d else v
        for r in range(d):
            tgt[r] += c * cols[k][r]
    return RingElement(a.order, tuple(u)), RingElement(a.order, tuple(v))


def crt(residues_: Sequence, ideals: Sequence[IdealLattice]) -> RingElement:
    if len(residues_) != len(ideals) or not ideals:
        raise ValueError("need equally many residues and ideals, at least one")
    order = ideals[0].order
    for i in range(len(ideals)):
        for j in range(i + 1, len(ideals)):
            if not is_coprime(ideals[i], ideals[j]):
                raise NotCoprime(f"ideals {i} and {j} are not coprime")
    x = residue_rep(order.element(residues_[0]), ideals[0])
    modulus = ideals[0]
    for r, b in zip(residues_[1:], ideals[1:]):
        r = order.element(r)
        u, v = _split_one(modulus, b)
        x = _wide_add(_wide_mul(x, v), _wide_mul(r, u))
        modulus = ideal_product(modulus, b)
        x = residue_rep(x, modulus)
    return x


def _wide_add(a: RingElement, b: RingElement) -> RingElement:
    return RingElement(a.order, tuple(x + y for x, y in zip(a.coords, b.coords)))


# --------------------------------------------------------------------------
# prime factorization (Kummer-Dedekind)


def factor_rational_prime(p: int, order: FieldOrder, assume_maximal: bool | None = None):
    """Prime ideals above p as (ideal, ramification e, residue degree f).

    Valid when p does not divide the index [O_K : Z[t]]. Safe mode refuses p
    with p^2 | disc(f) unless the order is asserted maximal.
    """
    if not sympy.isprime(p):
        raise NotPrime(f"{p} is not prime")
    if assume_maximal is None:
        assume_maximal = order.maximal
    if not assume_maximal and order.discriminant() % (p * p) == 0:
        raise UnsafePrime(f"{p}^2 divides disc(f); assert maximality to factor")
    f_high = [ZZ(c % p) for c in reversed(order.f_coeffs)]
    _, factors = gf_factor(f_high, p, ZZ)
    out = []
    for g_high, e in factors:
        g_low = [int(c) for c in reversed(g_high)]
        deg = len(g_low) - 1
        ideal = IdealLattice.from_generators(order, [p, order.eval_poly(g_low)])
        if ideal.norm != p**deg:
            raise ArithmeticError(f"norm {ideal.norm} != {p}^{deg}; order is not maximal at {p}")
        out.append((ideal, int(e), deg))
    out.sort(key=lambda t: t[0].sort_key())
    return out


# --------------------------------------------------------------------------
# B-families


@dataclass(frozen=True)
class ExplicitSpec:
    """One entry per ideal; each entry is a sequence of generators."""

    generators: tuple


@dataclass(frozen=True)
class PrimePowerSpec:
    k: int
    norm_bound: int


@dataclass(frozen=True)
class BFamily:
    ideals: tuple[IdealLattice, ...]
    partial_sum: Fraction
    provenance: dict = field(compare=False)
    # upper bound for sum 1/N(b) over ideals of the infinite family not stored
    declared_tail: Fraction = Fraction(0)

    @property
    def order(self) -> FieldOrder:
        return self.ideals[0].order

    def __len__(self):
        return len(self.ideals)

    def __iter__(self):
        return iter(self.ideals)

    def __getitem__(self, i):
        return self.ideals[i]

    @property
    def norms(self) -> list[int]:
        return [b.norm for b in self.ideals]

    def resolve(self, L: int | None) -> int:
        if L is None:
            return len(self.ideals)
        if not 0 <= L <= len(self.ideals):
            raise ValueError(f"truncation {L} outside 0..{len(self.ideals)}")
        return L

    def tail_sum(self, L: int | None = None) -> Fraction:
        L = self.resolve(L)
        return sum((Fraction(1, b.norm) for b in self.ideals[L:]), Fraction(0)) + self.declared_tail

    def truncation_for_norm(self, cutoff: int) -> int:
        return sum(1 for b in self.ideals if b.norm <= cutoff)


def _iroot(n: int, k: int) -> int:
    return int(sympy.integer_nthroot(n, k)[0])


def family_from_ideals(ideals: Iterable[IdealLattice], provenance=None, declared_tail=Fraction(0)) -> BFamily:
    ideals = sorted(ideals, key=lambda b: b.sort_key())
    if not ideals:
        raise EmptyFamily("a B-family needs at least one ideal")
    for b in ideals:
        if b.norm == 1:
            raise ValueError("family members must be proper ideals")
    for i in range(len(ideals)):
        for j in range(i + 1, len(ideals)):
            if not is_coprime(ideals[i], ideals[j]):
                raise NotCoprime(f"{ideals[i]} and {ideals[j]} are not coprime")
    return BFamily(
        tuple(ideals),
        sum((Fraction(1, b.norm) for b in ideals), Fraction(0)),
        dict(provenance or {"kind": "explicit"}),
        Fraction(declared_tail),
    )


def build_bfamily(order: FieldOrder, spec, assume_maximal: bool | None = None) -> BFamily:
    if isinstance(spec, ExplicitSpec):
        ideals = []
        for gens in spec.generators:
            if isinstance(gens, (int, RingElement)):
                gens = [gens]
            ideals.append(IdealLattice.from_generators(order, gens))
        return family_from_ideals(ideals, {"kind": "explicit", "size": len(ideals)})
    if isinstance(spec, PrimePowerSpec):
        k, bound = spec.k, spec.norm_bound
        if k < 2:
            raise ValueError("prime-power families need k >= 2")
        root = _iroot(bound, k)
        ideals = []
        for p in sympy.primerange(2, root + 1):
            for P, _, _ in factor_rational_prime(int(p), order, assume_maximal):
                if P.norm**k <= bound:
                    ideals.append(P**k)
        # unstored prime ideals have N(P) >= root + 1; at most d of them per norm
        tail = Fraction(order.degree, (k - 1) * root ** (k - 1)) if root >= 1 else None
        if not ideals:
            raise EmptyFamily(f"no prime powers of norm <= {bound}")
        return family_from_ideals(
            ideals, {"kind": "prime_power", "k": k, "norm_bound": bound}, declared_tail=tail
        )
    raise TypeError(f"unknown family spec {spec!r}")


def is_bfree(a: RingElement, family: BFamily, L: int | None = None) -> bool:
    return not any(contains(b, a) for b in family.ideals[: family.resolve(L)])
