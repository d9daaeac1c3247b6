"""The coding map phi: G -> {0,1}^O, its partial inverse theta on windows,
zero-window scans and the fibers used for joinings.

A group point g = (g_l) has phi(g)(a) = 0 exactly when a lies in -g_l + b_l
for some l; phi(0) is the B-free indicator and phi(T_a g) = S_a phi(g)
with T_a g = g + a and (S_a x)(c) = x(c + a).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import EmptyInterior, Inconclusive
from .geometry import DEFAULT_POINT_BUDGET, Box
from .ring_algebra import BFamily, IdealLattice, RingElement, crt, ideal_product, residue_rep
from .sieve_measure import Window, _coords, ideal_matrix, sieve_bits


@dataclass(frozen=True)
class GroupPoint:
    """Canonical residues g_l mod b_l for l < L."""

    family: BFamily
    residues: tuple[RingElement, ...]

    def __post_init__(self):
        for r, b in zip(self.residues, self.family.ideals):
            if residue_rep(r, b) != r:
                raise ValueError(f"{r.coords} is not the canonical residue mod {b}")

    @property
    def L(self) -> int:
        return len(self.residues)

    @classmethod
    def of(cls, family: BFamily, values: Sequence) -> GroupPoint:
        order = family.order
        return cls(family, tuple(residue_rep(order.element(v), b) for v, b in zip(values, family.ideals)))

    @classmethod
    def zero(cls, family: BFamily, L: int | None = None) -> GroupPoint:
        L = family.resolve(L)
        return cls(family, tuple(family.order.zero for _ in range(L)))

    @classmethod
    def random(cls, family: BFamily, L: int | None, rng: np.random.Generator) -> GroupPoint:
        # the box prod [0, h_t) over the HNF diagonal is a complete residue system
        L = family.resolve(L)
        vals = [tuple(int(rng.integers(0, h)) for h in b.diagonal) for b in family.ideals[:L]]
        return cls.of(family, vals)

    def rotate(self, a) -> GroupPoint:
        """T_a g = g + a."""
        a = self.family.order.element(_coords(a) if not isinstance(a, RingElement) else a)
        return GroupPoint.of(self.family, [r + a for r in self.residues])

    def key(self) -> tuple[tuple[int, ...], ...]:
        return tuple(r.coords for r in self.residues)


def phi_window(g: GroupPoint, box: Box, budget: int = DEFAULT_POINT_BUDGET, partition: int = 1) -> Window:
    """phi(g) restricted to ``box``."""
    L = g.L
    ideals = g.family.ideals[:L]
    offsets = [residue_rep(-r, b).coords for r, b in zip(g.residues, ideals)]
    bits = sieve_bits(box, ideals, offsets=offsets, partition=partition, budget=budget)
    return Window(box, bits, g.family, L)


def shift_window(w: Window, a) -> Window:
    """S_a restricted to the box on which it is determined: (S_a x)(c) = x(c + a)."""
    a = _coords(a)
    box = w.box.translate([-x for x in a])
    return Window(box, w.bits, w.family, w.L)


def common_part(u: Window, v: Window) -> tuple[np.ndarray, np.ndarray, Box] | None:
    """Bits of two windows on the intersection of their boxes."""
    lo = tuple(max(a, b) for a, b in zip(u.box.lo, v.box.lo))
    hi = tuple(min(a, b) for a, b in zip(u.box.hi, v.box.hi))
    if any(h < l for l, h in zip(lo, hi)):
        return None
    box = Box(lo, tuple(h - l + 1 for l, h in zip(lo, hi)))

    def cut(w: Window) -> np.ndarray:
        sl = tuple(slice(l - wl, l - wl + s) for l, wl, s in zip(box.lo, w.box.lo, box.shape))
        return w.nd()[sl].ravel()

    return cut(u), cut(v), box


# --------------------------------------------------------------------------
# theta and fibers


@dataclass(frozen=True)
class FiberReport:
    """Per l: residues c (canonical coordinates) with no 1-bit of the window
    on -c + b_l; ``untested`` counts classes with no point in the window."""

    members: tuple[frozenset, ...]
    untested: tuple[int, ...]

    @property
    def complete(self) -> tuple[bool, ...]:
        return tuple(u == 0 for u in self.untested)

    def singletons(self) -> bool:
        return all(len(m) == 1 and u == 0 for m, u in zip(self.members, self.untested))

    def point(self, family: BFamily) -> GroupPoint:
        if not self.singletons():
            raise Inconclusive("theta is not single-valued on this window")
        return GroupPoint.of(family, [next(iter(m)) for m in self.members])


def _index_to_rep(idx: int, b: IdealLattice) -> tuple[int, ...]:
    out = []
    for h in b.diagonal:
        idx, r = divmod(idx, h)
        out.append(r)
    return tuple(out)


def _missed(w: Window, b: IdealLattice, pts: np.ndarray) -> tuple[frozenset, int]:
    H = ideal_matrix(b)
    idx = kernels.residue_indices(pts, H)
    present = np.unique(idx)
    hit = np.unique(idx[w.bits.astype(bool)])
    order = b.order
    out = set()
    for k in np.setdiff1d(present, hit).tolist():
        # class k holds x with x = -c mod b, so c is the residue of -x
        c = residue_rep(-RingElement(order, _index_to_rep(k, b)), b)
        out.add(c.coords)
    return frozenset(out), b.norm - len(present)


def theta_window(w: Window, family: BFamily, L: int | None = None) -> FiberReport:
    """For each l, the residues g_l with supp w ∩ (b_l - g_l) = ∅ among
    classes represented in the window."""
    L = family.resolve(L)
    pts = w.box.points_array()
    res = [_missed(w, b, pts) for b in family.ideals[:L]]
    return FiberReport(tuple(m for m, _ in res), tuple(u for _, u in res))


def joining_fiber(w: Window, family: BFamily, L: int | None = None) -> FiberReport:
    """F_l(x) = {c : x vanishes on -c + b_l}.

    The coset -c + b_l equals b_l - c, so these are the sets of
    ``theta_window`` without any change of sign.
    """
    return theta_window(w, family, L)


def check_phi_theta(w: Window, family: BFamily, L: int | None = None) -> bool:
    """w <= phi(theta(w)) pointwise on the window's box."""
    g = theta_window(w, family, L).point(family)
    ref = phi_window(g, w.box)
    return bool(np.all(w.bits <= ref.bits))


def recovery_radius(family: BFamily, L: int | None = None) -> int:
    """A radius n for which H_n holds a complete residue system modulo the
    product of b_1..b_L; from there theta(phi(g)) = g."""
    L = family.resolve(L)
    prodideal = family.ideals[0]
    for b in family.ideals[1:L]:
        prodideal = ideal_product(prodideal, b)
    return max(0, -(-(max(prodideal.diagonal) - 1) // 2))


# --------------------------------------------------------------------------
# zero windows


@dataclass(frozen=True)
class ZeroScan:
    extent: tuple[int, ...]
    positions: np.ndarray  # (k, d) lower corners, row-major order
    max_gaps: tuple[int | None, ...]  # per axis, None without two positions on a line

    @property
    def count(self) -> int:
        return len(self.positions)


def _axis_gaps(mask: np.ndarray, axis: int) -> int | None:
    moved = np.moveaxis(mask, axis, -1).reshape(-1, mask.shape[axis])
    best = None
    for line in moved:
        idx = np.flatnonzero(line)
        if len(idx) >= 2:
            g = int(np.diff(idx).max())
            best = g if best is None or g > best else best
    return best


def zero_window_scan(w: Window, extent: Sequence[int] | int | None = None, radius: int | None = None) -> ZeroScan:
    """Positions a with w = 0 on a + prod [0, extent_t).

    ``radius`` r is shorthand for extent 2r + 1 on every axis; positions are
    then reported as centers.
    """
    d = w.box.dim
    if (extent is None) == (radius is None):
        raise ValueError("give exactly one of extent and radius")
    ext = (2 * radius + 1,) * d if radius is not None else ((extent,) * d if isinstance(extent, int) else tuple(extent))
    if len(ext) != d or min(ext) < 1:
        raise ValueError("extent needs one positive entry per axis")
    if any(e > s for e, s in zip(ext, w.box.shape)):
        raise EmptyInterior(f"shape {ext} does not fit in the window {w.box.shape}")
    mask = kernels.zero_windows(w.bits, w.box.shape, ext)
    pos = np.argwhere(mask).astype(np.int64) + np.array(w.box.lo, dtype=np.int64)
    if radius is not None:
        pos += radius
    gaps = tuple(_axis_gaps(mask, t) for t in range(d))
    return ZeroScan(ext, pos, gaps)


def crt_zero_class(assignment: Sequence[tuple[Sequence[int], IdealLattice]]) -> tuple[RingElement, IdealLattice]:
    """a with a + c_j in b_j for every pair (c_j, b_j), and the modulus
    prod b_j of its class (the b_j must be pairwise coprime)."""
    order = assignment[0][1].order
    rs = [-order.element(_coords(c)) for c, _ in assignment]
    ideals = [b for _, b in assignment]
    a = crt(rs, ideals)
    modulus = ideals[0]
    for b in ideals[1:]:
        modulus = ideal_product(modulus, b)
    return a, modulus


def box_classes(box: Box, b: IdealLattice) -> int:
    """Number of residue classes mod b met by the box."""
    return int(np.unique(kernels.residue_indices(box.points_array(), ideal_matrix(b))).size)
