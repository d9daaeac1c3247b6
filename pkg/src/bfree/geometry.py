"""Boxes in the order via power-basis coordinates, tilings, and the bridge
between abstract label lattices and the order."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import prod
from typing import Sequence

import numpy as np

from .errors import SizeOverflow
from .kernels import row_major_strides
from .ring_algebra import FieldOrder, IdealLattice, RingElement

DEFAULT_POINT_BUDGET = 10**8


@dataclass(frozen=True)
class Box:
    """Axis-parallel box lo + prod_t [0, shape_t) in coordinates.

    Points are enumerated row-major, axis 0 slowest. ``radius`` is set for
    the centered boxes H_n = [-n, n]^d.
    """

    lo: tuple[int, ...]
    shape: tuple[int, ...]
    radius: int | None = None

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return prod(self.shape)

    @property
    def hi(self) -> tuple[int, ...]:
        return tuple(l + s - 1 for l, s in zip(self.lo, self.shape))

    def contains(self, coords: Sequence[int]) -> bool:
        return all(l <= c < l + s for c, l, s in zip(coords, self.lo, self.shape))

    def index(self, coords: Sequence[int]) -> int:
        if not self.contains(coords):
            raise IndexError(f"{tuple(coords)} is outside {self}")
        idx = 0
        for c, l, s in zip(coords, self.lo, self.shape):
            idx = idx * s + (c - l)
        return idx

    def coords_of(self, index: int) -> tuple[int, ...]:
        out = []
        for l, s in zip(reversed(self.lo), reversed(self.shape)):
            index, r = divmod(index, s)
            out.append(l + r)
        return tuple(reversed(out))

    def points_array(self, budget: int = DEFAULT_POINT_BUDGET) -> np.ndarray:
        """(size, d) int64 array of coordinates in enumeration order."""
        check_budget(self, budget)
        axes = [np.arange(l, l + s, dtype=np.int64) for l, s in zip(self.lo, self.shape)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def translate(self, offset: Sequence[int]) -> Box:
        return Box(tuple(l + o for l, o in zip(self.lo, offset)), self.shape)

    def strides(self) -> np.ndarray:
        return row_major_strides(self.shape)


def check_budget(box: Box, budget: int = DEFAULT_POINT_BUDGET) -> None:
    if box.size > budget:
        raise SizeOverflow(f"box has {box.size} points, budget is {budget}")


def folner_box(d: int | FieldOrder, n: int, budget: int = DEFAULT_POINT_BUDGET) -> Box:
    """H_n: all points whose coordinates have absolute value at most n."""
    if isinstance(d, FieldOrder):
        d = d.degree
    if n < 0:
        raise ValueError("radius must be nonnegative")
    box = Box((-n,) * d, (2 * n + 1,) * d, radius=n)
    check_budget(box, budget)
    return box


def segment_box(d: int | FieldOrder, lo: Sequence[int] | int, shape: Sequence[int] | int) -> Box:
    if isinstance(d, FieldOrder):
        d = d.degree
    lo = (lo,) * d if isinstance(lo, int) else tuple(lo)
    shape = (shape,) * d if isinstance(shape, int) else tuple(shape)
    if len(lo) != d or len(shape) != d or min(shape) < 1:
        raise ValueError("box lo/shape must have one positive entry per coordinate")
    return Box(lo, shape)


def box_points(box: Box, order: FieldOrder | None = None, budget: int = DEFAULT_POINT_BUDGET):
    """Yield the box points as RingElements (or coordinate tuples without an order)."""
    check_budget(box, budget)
    for coords in product(*(range(l, l + s) for l, s in zip(box.lo, box.shape))):
        yield RingElement(order, coords) if order is not None else coords


def tile_translates(n: int, m: int, d: int) -> list[tuple[int, ...]]:
    """Centers n*u with u_t = 2 j_t - m - 1; H_n shifted there covers H_{nm}."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    us = [n * (2 * j - m - 1) for j in range(1, m + 1)]
    return [tuple(c) for c in product(us, repeat=d)]


def folner_overlap(a: Sequence[int], n: int) -> float:
    """|(a + H_n) ∩ H_n| / |H_n|."""
    side = 2 * n + 1
    return prod(max(0, side - abs(x)) for x in a) / side ** len(a)


@dataclass(frozen=True)
class LatticeBridge:
    """Group isomorphism j from integer labels to order coordinates,
    given by a unimodular integer matrix (label -> matrix @ label)."""

    order: FieldOrder
    matrix: tuple[tuple[int, ...], ...]

    @classmethod
    def identity(cls, order: FieldOrder) -> LatticeBridge:
        d = order.degree
        return cls(order, tuple(tuple(int(i == j) for j in range(d)) for i in range(d)))

    def __post_init__(self):
        m = np.array(self.matrix, dtype=object)
        if m.shape != (self.order.degree, self.order.degree):
            raise ValueError("bridge matrix must be d x d")
        from sympy import Matrix

        if abs(Matrix(self.matrix).det()) != 1:
            raise ValueError("bridge matrix must be unimodular")

    def to_order(self, label: Sequence[int]) -> RingElement:
        coords = tuple(sum(r * x for r, x in zip(row, label)) for row in self.matrix)
        return RingElement(self.order, coords)

    def from_order(self, a: RingElement) -> tuple[int, ...]:
        from sympy import Matrix

        sol = Matrix(self.matrix).inv() * Matrix(a.coords)
        return tuple(int(x) for x in sol)


def bridge_ideal(bridge: LatticeBridge, b: int) -> IdealLattice:
    """Image of b * Lambda under j; always the ideal generated by b."""
    if b < 2:
        raise ValueError("b must be at least 2")
    d = bridge.order.degree
    cols = [[b * bridge.matrix[r][c] for r in range(d)] for c in range(d)]
    return IdealLattice.from_columns(bridge.order, cols)


def label_is_free(label: Sequence[int], bs: Sequence[int]) -> bool:
    """Label not in b Lambda for every b, i.e. not all coordinates divisible."""
    return not any(all(x % b == 0 for x in label) for b in bs)
