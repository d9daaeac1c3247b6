"""Admissible patterns: checking, exact counting on boxes, and entropy.

Counts are gamma_L^{>=s}(F) = #{W ⊆ F : W meets at most N(b_l) - s_l classes
mod b_l for every l <= L}. Two engines compute them: inclusion-exclusion over
sets of avoided classes, and brute force over all subsets of small boxes.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import comb, prod

import numpy as np

from . import kernels
from .errors import BudgetExceeded
from .geometry import Box, folner_box
from .sieve_measure import MeasureValue, d_count, ideal_matrix, product_formula
from .ring_algebra import BFamily

DEFAULT_TERM_BUDGET = 2**24
BRUTE_FORCE_MAX_POINTS = 22


@dataclass(frozen=True)
class SVector:
    entries: tuple[int, ...]

    @classmethod
    def ones(cls, L: int) -> SVector:
        return cls((1,) * L)

    def check(self, family: BFamily) -> None:
        if len(self.entries) > len(family):
            raise ValueError("s-vector longer than the family")
        for s, b in zip(self.entries, family.ideals):
            if not 1 <= s <= b.norm:
                raise ValueError(f"s entry {s} outside 1..{b.norm}")


@dataclass(frozen=True)
class AdmissibleCount:
    box: Box
    L: int
    s: tuple[int, ...]
    count: int
    method: str
    # the first effective_L ideals are the only ones the box can feel
    effective_L: int


def _svec(family: BFamily, L: int, s) -> tuple[int, ...]:
    if s is None:
        return (1,) * L
    entries = tuple(s.entries if isinstance(s, SVector) else s)
    if len(entries) < L:
        raise ValueError(f"s has {len(entries)} entries, truncation needs {L}")
    SVector(entries[:L]).check(family)
    return entries[:L]


def is_admissible(A, family: BFamily, L: int | None = None, s=None) -> bool:
    """D(b_l | A) <= N(b_l) - s_l for all l <= L (s = 1: misses a class)."""
    L = family.resolve(L)
    sv = _svec(family, L, s)
    return all(d_count(b, A) <= b.norm - sl for b, sl in zip(family.ideals[:L], sv))


# --------------------------------------------------------------------------
# constraint preprocessing


@dataclass
class _Constraint:
    index: int          # position l in the family
    classes: np.ndarray  # per box point, compact class id in 0..present-1
    present: int
    need: int           # classes among the present ones that W must avoid


def _constraints(box: Box, family: BFamily, L: int, sv) -> tuple[np.ndarray, list[_Constraint], int]:
    pts = box.points_array()
    out = []
    last = 0
    for l, (b, s) in enumerate(zip(family.ideals[:L], sv)):
        idx = kernels.residue_indices(pts, ideal_matrix(b))
        uniq, compact = np.unique(idx, return_inverse=True)
        need = s - (b.norm - len(uniq))
        if need > 0:
            out.append(_Constraint(l, compact.astype(np.int64), len(uniq), need))
            last = l + 1
    return pts, out, last


def effective_truncation(box: Box, family: BFamily, s=None) -> int:
    """Smallest L* with gamma_L = gamma_{L*} on ``box`` for every stored L >= L*."""
    L = len(family)
    _, cons, last = _constraints(box, family, L, _svec(family, L, s) if s is not None else (1,) * L)
    return last


def _weights(P: int, need: int) -> list[int]:
    # [m >= need] = sum_{t >= need} (-1)^(t - need) C(t-1, need-1) C(m, t)
    return [0 if t < need else (-1) ** (t - need) * comb(t - 1, need - 1) for t in range(P + 1)]


def _bottom(v: np.ndarray, weights: list[int], kmax: int) -> np.ndarray:
    """sum over T of weight(|T|) * [kept == k], kept = sum of v outside T."""
    P = len(v)
    dp = np.zeros((P + 1, kmax + 1), dtype=np.int64)
    dp[0, 0] = 1
    for r in range(P):
        vr = int(v[r])
        new = np.zeros_like(dp)
        new[1:, :] += dp[:-1, :]
        if vr:
            new[:, vr:] += dp[:, :-vr]
        else:
            new += dp
        dp = new
    w = np.array(weights, dtype=np.int64)
    return (w[:, None] * dp).sum(axis=0)


def _ie_rec(tensor: np.ndarray, cons: list[_Constraint], level: int, kmax: int) -> np.ndarray:
    c = cons[level]
    weights = _weights(c.present, c.need)
    if level == len(cons) - 1:
        return _bottom(tensor, weights, kmax)
    acc = np.zeros(kmax + 1, dtype=np.int64)
    P = c.present
    for mask in range(1 << P):
        t = bin(mask).count("1")
        w = weights[t]
        if not w:
            continue
        keep = [r for r in range(P) if not mask >> r & 1]
        reduced = tensor[keep].sum(axis=0) if keep else np.zeros(tensor.shape[1:], dtype=np.int64)
        acc += w * _ie_rec(reduced, cons, level + 1, kmax)
    return acc


def _count_ie(box: Box, cons: list[_Constraint], term_budget: int) -> int:
    n = box.size
    if not cons:
        return 2**n
    terms = prod(2**c.present for c in cons)
    if terms > term_budget:
        raise BudgetExceeded(f"inclusion-exclusion needs {terms} terms, budget {term_budget}")
    tensor = np.zeros(tuple(c.present for c in cons), dtype=np.int64)
    np.add.at(tensor, tuple(c.classes for c in cons), 1)
    coeff = _ie_rec(tensor, cons, 0, n)
    return sum(int(a) << k for k, a in enumerate(coeff.tolist()) if a)


def _count_brute(box: Box, cons: list[_Constraint]) -> int:
    n = box.size
    if n > BRUTE_FORCE_MAX_POINTS:
        raise BudgetExceeded(f"brute force needs at most {BRUTE_FORCE_MAX_POINTS} points, box has {n}")
    if not cons:
        return 2**n
    width = max(c.present for c in cons)
    masks = np.zeros((len(cons), width), dtype=np.int64)
    for j, c in enumerate(cons):
        for k, cls in enumerate(c.classes.tolist()):
            masks[j, cls] |= 1 << k
    nclasses = [c.present for c in cons]
    limits = [c.present - c.need for c in cons]
    return kernels.brute_count(n, masks, nclasses, limits)


def count_admissible(
    box: Box | int,
    family: BFamily,
    L: int | None = None,
    s=None,
    method: str = "auto",
    term_budget: int = DEFAULT_TERM_BUDGET,
) -> AdmissibleCount:
    """Exact gamma_L^{>=s} on ``box`` (an int means the centered box H_n).

    Constraints the box cannot violate are dropped and only residue classes
    present in the box are enumerated; both steps leave the count unchanged.
    """
    if isinstance(box, int):
        box = folner_box(family.order.degree, box)
    L = family.resolve(L)
    sv = _svec(family, L, s)
    _, cons, last = _constraints(box, family, L, sv)
    if method == "auto":
        try:
            count, used = _count_ie(box, cons, term_budget), "inclusion_exclusion"
        except BudgetExceeded:
            count, used = _count_brute(box, cons), "brute_force"
    elif method == "inclusion_exclusion":
        count, used = _count_ie(box, cons, term_budget), method
    elif method == "brute_force":
        count, used = _count_brute(box, cons), method
    else:
        raise ValueError(f"unknown counting method {method!r}")
    return AdmissibleCount(box, L, sv, count, used, last)


# --------------------------------------------------------------------------
# logarithms and entropy


def log2_bracket(n: int, bits: int = 48) -> tuple[Fraction, Fraction]:
    """Rational lo <= log2(n) <= hi with hi - lo <= 2^-bits, no floats.

    Repeated squaring of n / 2^e in fixed point, tracking a lower and an
    upper approximation; an undecidable comparison stops the refinement early.
    """
    if n < 1:
        raise ValueError("log2 needs a positive integer")
    e = n.bit_length() - 1
    prec = bits + 64
    shift = prec - e
    if shift >= 0:
        lo = hi = n << shift
    else:
        lo = n >> -shift
        hi = lo + (1 if n & ((1 << -shift) - 1) else 0)
    two = 2 << prec
    frac = 0
    for i in range(bits):
        lo = (lo * lo) >> prec
        hi = -((-(hi * hi)) >> prec)
        frac <<= 1
        if lo >= two:
            frac |= 1
            lo >>= 1
            hi = -((-hi) >> 1)
        elif hi >= two:
            # cannot tell which side of 2 the square lies on
            scale = 1 << (i + 1)
            return Fraction(e * scale + frac, scale), Fraction(e * scale + frac + 2, scale)
    scale = 1 << bits
    return Fraction(e * scale + frac, scale), Fraction(e * scale + frac + 1, scale)


@dataclass(frozen=True)
class EntropyEstimate:
    lo: Fraction
    hi: Fraction
    count: AdmissibleCount

    @property
    def value(self) -> Fraction:
        return (self.lo + self.hi) / 2


def entropy_estimate(
    family: BFamily,
    L: int | None,
    s,
    box: Box | int,
    method: str = "auto",
    term_budget: int = DEFAULT_TERM_BUDGET,
) -> EntropyEstimate:
    """(1/|F|) log2 gamma_L^{>=s}(F) as a rational bracket."""
    res = count_admissible(box, family, L, s, method=method, term_budget=term_budget)
    lo, hi = log2_bracket(res.count)
    n = res.box.size
    return EntropyEstimate(lo / n, hi / n, res)


def entropy_formula(family: BFamily, L: int | None = None, s=None) -> MeasureValue:
    """prod_{l <= L} (1 - s_l / N(b_l)) with the truncation tail as halfwidth."""
    L = family.resolve(L)
    return product_formula(family, L, _svec(family, L, s))


def class_choice_bracket(box: Box, family: BFamily, L: int | None = None, s=None, max_choices: int = 2**20):
    """Rigorous bracket for (1/|F|) log2 gamma_L^{>=s}(F).

    With K = max over class choices A (|A_l| = s_l) of |F \\ Z_L(A)|:
    K <= log2 gamma <= K + log2 prod C(N(b_l), s_l). Returns (lower, upper)
    as Fractions after dividing by |F|.
    """
    L = family.resolve(L)
    sv = _svec(family, L, s)
    n_choices = prod(comb(b.norm, sl) for b, sl in zip(family.ideals[:L], sv))
    if n_choices > max_choices:
        raise BudgetExceeded(f"{n_choices} class choices exceed {max_choices}")
    pts = box.points_array()
    classes = [kernels.residue_indices(pts, ideal_matrix(b)) for b in family.ideals[:L]]
    options = [list(combinations(range(b.norm), sl)) for b, sl in zip(family.ideals[:L], sv)]
    best = 0
    for choice in product(*options):
        kept = np.ones(len(pts), dtype=bool)
        for cls, avoided in zip(classes, choice):
            kept &= ~np.isin(cls, avoided)
        best = max(best, int(kept.sum()))
    _, extra = log2_bracket(n_choices)
    return Fraction(best, box.size), (best + extra) / box.size
