"""The B-free indicator on boxes, Mirsky cylinder measures, and empirical
frequencies along boxes."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import EmptyInterior, NotDisjoint
from .geometry import DEFAULT_POINT_BUDGET, Box, check_budget
from .ring_algebra import BFamily, FieldOrder, IdealLattice, RingElement

PATTERN_HIST_MAX = 20


class MeasureValue(NamedTuple):
    """An exact truncated value; the untruncated quantity is within
    ``value ± halfwidth``."""

    value: Fraction
    halfwidth: Fraction

    @property
    def lo(self) -> Fraction:
        return self.value - self.halfwidth

    @property
    def hi(self) -> Fraction:
        return self.value + self.halfwidth

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True, eq=False)
class Window:
    """Restriction of a 0/1 configuration to a box; ``bits`` is flat uint8
    in the box's enumeration order."""

    box: Box
    bits: np.ndarray = field(repr=False)
    family: BFamily | None = field(default=None, repr=False)
    L: int | None = None

    def __post_init__(self):
        if self.bits.shape != (self.box.size,):
            raise ValueError("bits length must equal the box size")

    def bit(self, coords) -> int:
        return int(self.bits[self.box.index(_coords(coords))])

    def nd(self) -> np.ndarray:
        return self.bits.reshape(self.box.shape)

    def support(self) -> np.ndarray:
        """Coordinates of the 1-bits as an (n, d) array."""
        idx = np.flatnonzero(self.bits)
        return self.box.lo + np.stack(np.unravel_index(idx, self.box.shape), axis=1).astype(np.int64)

    def with_bit(self, coords, value: int) -> Window:
        bits = self.bits.copy()
        bits[self.box.index(_coords(coords))] = value
        return Window(self.box, bits, self.family, self.L)

    def density(self) -> Fraction:
        return Fraction(int(self.bits.sum()), self.box.size)


def synthetic_window(box: Box, bits=None) -> Window:
    arr = np.zeros(box.size, np.uint8) if bits is None else np.asarray(bits, dtype=np.uint8).ravel().copy()
    return Window(box, arr)


def _coords(a) -> tuple[int, ...]:
    if isinstance(a, RingElement):
        return a.coords
    if isinstance(a, (int, np.integer)):
        return (int(a),)
    return tuple(int(x) for x in a)


@dataclass(frozen=True)
class Pattern:
    """Cylinder data: 1 on ``ones``, 0 on ``zeros`` (coordinate tuples)."""

    ones: frozenset
    zeros: frozenset = frozenset()

    def __post_init__(self):
        if self.ones & self.zeros:
            raise NotDisjoint(f"positions {sorted(self.ones & self.zeros)} are in both A and B")

    @classmethod
    def of(cls, ones: Iterable = (), zeros: Iterable = ()) -> Pattern:
        return cls(frozenset(_coords(a) for a in ones), frozenset(_coords(b) for b in zeros))

    @property
    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.ones | self.zeros)


def ideal_matrix(b: IdealLattice) -> np.ndarray:
    H = np.array(b.basis, dtype=object)
    if np.abs(H).max() >= kernels.LIMIT:
        raise OverflowError("ideal basis does not fit the 64-bit kernels")
    return H.astype(np.int64)


# --------------------------------------------------------------------------
# sieving


def mark_translates(bits: np.ndarray, box: Box, ideals: Sequence[IdealLattice], offsets=None) -> None:
    """Zero every point of offsets[l] + b_l inside ``box`` (offset 0 by default)."""
    d = box.dim
    for k, b in enumerate(ideals):
        off = np.zeros(d, np.int64) if offsets is None else np.asarray(offsets[k], dtype=np.int64)
        kernels.mark_lattice(bits, box.lo, box.shape, ideal_matrix(b), off)


def _slabs(box: Box, parts: int) -> list[tuple[int, int]]:
    n0 = box.shape[0]
    parts = max(1, min(parts, n0))
    edges = [n0 * k // parts for k in range(parts + 1)]
    return [(edges[k], edges[k + 1]) for k in range(parts) if edges[k + 1] > edges[k]]


def sieve_bits(
    box: Box,
    ideals: Sequence[IdealLattice],
    offsets=None,
    partition: int = 1,
    threads: int = 1,
    budget: int = DEFAULT_POINT_BUDGET,
) -> np.ndarray:
    """Indicator of the complement of the union of the translates, on ``box``.

    The box is cut into ``partition`` slabs along axis 0; each slab is a
    contiguous block of the row-major array, so results do not depend on the
    partition.
    """
    check_budget(box, budget)
    bits = np.ones(box.size, np.uint8)
    row = box.size // box.shape[0]

    def work(slab):
        a, b = slab
        sub = Box((box.lo[0] + a,) + box.lo[1:], (b - a,) + box.shape[1:])
        mark_translates(bits[a * row : b * row], sub, ideals, offsets)

    slabs = _slabs(box, partition)
    if threads > 1 and len(slabs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(work, slabs))
    else:
        for s in slabs:
            work(s)
    return bits


def sieve_window(
    family: BFamily,
    box: Box,
    L: int | None = None,
    partition: int = 1,
    threads: int = 1,
    budget: int = DEFAULT_POINT_BUDGET,
) -> Window:
    """eta restricted to ``box`` for the truncated family b_1..b_L."""
    L = family.resolve(L)
    if box.dim != family.order.degree:
        raise ValueError("box dimension differs from the order degree")
    bits = sieve_bits(box, family.ideals[:L], partition=partition, threads=threads, budget=budget)
    return Window(box, bits, family, L)


# --------------------------------------------------------------------------
# residue counting and the Mirsky measure


def _points_array(A, d: int) -> np.ndarray:
    if isinstance(A, np.ndarray):
        return A.astype(np.int64).reshape(-1, d)
    pts = [_coords(a) for a in A]
    if not pts:
        return np.zeros((0, d), np.int64)
    return np.array(pts, dtype=np.int64).reshape(-1, d)


def d_count(b: IdealLattice, A) -> int:
    """Number of residue classes mod b met by the finite set A."""
    pts = _points_array(A, b.order.degree)
    if len(pts) == 0:
        return 0
    return int(np.unique(kernels.residue_indices(pts, ideal_matrix(b))).size)


def _class_table(points: Sequence[tuple[int, ...]], ideals: Sequence[IdealLattice]) -> list[np.ndarray]:
    pts = np.array(points, dtype=np.int64).reshape(len(points), -1)
    return [kernels.residue_indices(pts, ideal_matrix(b)) for b in ideals]


def _product_for(mask_idx: list[int], classes: list[np.ndarray], norms: list[int]) -> Fraction:
    out = Fraction(1)
    for cls, n in zip(classes, norms):
        hit = len(set(cls[mask_idx].tolist())) if mask_idx else 0
        if hit:
            out *= Fraction(n - hit, n)
            if not out:
                break
    return out


def mirsky_cylinder(pattern: Pattern, family: BFamily, L: int | None = None) -> MeasureValue:
    """Mirsky measure of the cylinder {x : x = 1 on A, x = 0 on B}.

    Inclusion-exclusion over A ⊆ D ⊆ A ∪ B of the class-avoidance products,
    truncated at L; the halfwidth bounds the effect of the omitted ideals.
    """
    L = family.resolve(L)
    ideals = family.ideals[:L]
    norms = [b.norm for b in ideals]
    pts = pattern.support
    pos = {p: k for k, p in enumerate(pts)}
    classes = _class_table(pts, ideals) if pts else []
    a_idx = [pos[a] for a in sorted(pattern.ones)]
    b_idx = [pos[b] for b in sorted(pattern.zeros)]
    value = Fraction(0)
    for r in range(len(b_idx) + 1):
        sign = -1 if r % 2 else 1
        for extra in combinations(b_idx, r):
            value += sign * _product_for(a_idx + list(extra), classes, norms)
    return MeasureValue(value, len(pts) * family.tail_sum(L))


def product_formula(family: BFamily, L: int | None = None, s: Sequence[int] | None = None) -> MeasureValue:
    """prod_{l<=L} (1 - s_l / N(b_l)), with the tail of the infinite product
    (s = 1 beyond L) folded into the halfwidth."""
    L = family.resolve(L)
    s = [1] * L if s is None else list(s)
    if len(s) != L:
        raise ValueError(f"s has length {len(s)}, expected {L}")
    value = Fraction(1)
    for b, sl in zip(family.ideals[:L], s):
        if not 1 <= sl <= b.norm:
            raise ValueError(f"s entry {sl} outside 1..{b.norm}")
        value *= Fraction(b.norm - sl, b.norm)
    # prod(1 - x_i) >= 1 - sum x_i over the omitted factors
    return MeasureValue(value, value * family.tail_sum(L))


def density(family: BFamily, L: int | None = None, s: Sequence[int] | None = None) -> MeasureValue:
    """Density of B_L-free points (or of the complement of Z_L for general s)."""
    if s is None:
        return mirsky_cylinder(Pattern.of([(0,) * family.order.degree]), family, L)
    return product_formula(family, L, s)


# --------------------------------------------------------------------------
# empirical frequencies


def cylinder_counts(window: Window, shape_points: Sequence) -> tuple[np.ndarray, int]:
    """Histogram over interior positions of the codes sum_j x(a + c_j) << j."""
    offs = _points_array(shape_points, window.box.dim)
    hist = kernels.pattern_histogram(window.bits, window.box.shape, offs)
    return hist, int(hist.sum())


def _match_count_large(window: Window, ones: np.ndarray, zeros: np.ndarray) -> tuple[int, int]:
    allo = np.concatenate([ones, zeros])
    shape = np.array(window.box.shape)
    start = np.maximum(0, -allo.min(axis=0))
    stop = np.minimum(shape, shape - allo.max(axis=0))
    if np.any(stop <= start):
        return 0, 0
    arr = window.nd()
    ok = np.ones(tuple(stop - start), dtype=bool)
    for o in ones:
        ok &= arr[tuple(slice(s + x, e + x) for s, e, x in zip(start, stop, o))] == 1
    for o in zeros:
        ok &= arr[tuple(slice(s + x, e + x) for s, e, x in zip(start, stop, o))] == 0
    return int(ok.sum()), ok.size


def pattern_matches(window: Window, pattern: Pattern) -> tuple[int, int]:
    """(matching interior positions, interior positions)."""
    pts = pattern.support
    if len(pts) > PATTERN_HIST_MAX:
        d = window.box.dim
        return _match_count_large(
            window, _points_array(sorted(pattern.ones), d), _points_array(sorted(pattern.zeros), d)
        )
    hist, total = cylinder_counts(window, pts)
    code = sum(1 << k for k, p in enumerate(pts) if p in pattern.ones)
    return int(hist[code]), total


def empirical_frequency(window: Window, pattern: Pattern) -> Fraction:
    hits, total = pattern_matches(window, pattern)
    if total == 0:
        raise EmptyInterior("no position keeps the pattern inside the window")
    return Fraction(hits, total)


def all_cylinders(shape_points: Sequence) -> list[Pattern]:
    """The 2^k patterns supported on a shape, indexed by their bit code."""
    pts = [_coords(p) for p in shape_points]
    out = []
    for code in range(1 << len(pts)):
        ones = [p for k, p in enumerate(pts) if code >> k & 1]
        zeros = [p for k, p in enumerate(pts) if not code >> k & 1]
        out.append(Pattern.of(ones, zeros))
    return out


def missing_classes(window: Window, b: IdealLattice) -> int:
    """N(b) - D(b | supp window)."""
    return b.norm - d_count(b, window.support())


def element_of(order: FieldOrder, coords) -> RingElement:
    return RingElement(order, _coords(coords))
