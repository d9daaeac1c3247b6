"""Invariants checked on generated inputs."""
from fractions import Fraction
from math import gcd

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from bfree import kernels
from bfree.dynamics import GroupPoint, common_part, phi_window, recovery_radius, shift_window, theta_window
from bfree.errors import BudgetExceeded
from bfree.entropy import count_admissible, is_admissible, log2_bracket
from bfree.geometry import folner_box, segment_box
from bfree.ring_algebra import (
    IdealLattice,
    contains,
    crt,
    family_from_ideals,
    ideal_product,
    ideal_sum,
    make_order,
    principal_ideal,
    residue_rep,
)
from bfree.sieve_measure import Pattern, all_cylinders, mirsky_cylinder, sieve_bits, sieve_window, synthetic_window
from bfree.wincache import decode_window, encode_window

Z = make_order([0, 1])
G = make_order([1, 0, 1], maximal=True)

small = st.integers(-12, 12)
gauss = st.tuples(small, small).filter(lambda c: c != (0, 0))


def zfamily(gens):
    return family_from_ideals([principal_ideal(Z.element(g)) for g in gens])


@st.composite
def coprime_moduli(draw, max_count=3, max_mod=30):
    mods = []
    for m in draw(st.lists(st.integers(2, max_mod), min_size=1, max_size=max_count)):
        if all(gcd(m, x) == 1 for x in mods):
            mods.append(m)
    return mods


@given(gauss, gauss)
def test_norm_multiplicative(a, b):
    I, J = principal_ideal(G.element(a)), principal_ideal(G.element(b))
    assert ideal_product(I, J).norm == I.norm * J.norm
    assert I.norm == G.element(a).norm()


@given(st.lists(gauss, min_size=1, max_size=3))
def test_hnf_independent_of_generator_order(gens):
    elems = [G.element(g) for g in gens]
    assert IdealLattice.from_generators(G, elems) == IdealLattice.from_generators(G, elems[::-1])


@given(gauss, gauss, st.tuples(small, small))
def test_membership_and_sum(a, b, x):
    I, J = principal_ideal(G.element(a)), principal_ideal(G.element(b))
    y = G.element(x) * G.element(a)
    assert contains(I, y) and contains(ideal_sum(I, J), y)


@given(coprime_moduli(), st.lists(st.integers(-100, 100), min_size=3, max_size=3))
def test_crt(mods, vals):
    ideals = [principal_ideal(Z.element(m)) for m in mods]
    rs = [Z.element(v) for v in vals[: len(mods)]]
    x = crt(rs, ideals)
    for r, b in zip(rs, ideals):
        assert contains(b, x - r)


@given(gauss, st.tuples(st.integers(-50, 50), st.integers(-50, 50)))
def test_residue_rep_canonical(a, x):
    b = principal_ideal(G.element(a))
    r = residue_rep(G.element(x), b)
    assert contains(b, r - G.element(x))
    assert residue_rep(r, b) == r
    assert all(0 <= c < h for c, h in zip(r.coords, b.diagonal))


@given(coprime_moduli(max_count=3, max_mod=12), st.integers(-15, 15), st.integers(1, 12))
def test_engines_agree(mods, lo, n):
    fam = zfamily(mods)
    box = segment_box(1, lo, n)
    try:
        ie = count_admissible(box, fam, method="inclusion_exclusion").count
    except BudgetExceeded:
        assume(False)
    assert ie == count_admissible(box, fam, method="brute_force").count


@given(coprime_moduli(max_count=3, max_mod=12), st.lists(st.integers(-20, 20), max_size=12), st.data())
def test_admissibility_hereditary(mods, A, data):
    fam = zfamily(mods)
    sub = data.draw(st.lists(st.sampled_from(A), unique=True)) if A else []
    if is_admissible(A, fam):
        assert is_admissible(sub, fam)


@given(coprime_moduli(max_count=2, max_mod=15), st.lists(st.integers(0, 5), min_size=1, max_size=4, unique=True))
def test_mirsky_partition_of_unity(mods, shape):
    fam = zfamily(mods)
    assert sum(mirsky_cylinder(p, fam).value for p in all_cylinders(shape)) == 1


@given(coprime_moduli(max_count=2, max_mod=15), st.lists(st.integers(0, 6), max_size=3, unique=True))
def test_mirsky_monotone(mods, ones):
    fam = zfamily(mods)
    base = mirsky_cylinder(Pattern.of(ones), fam).value
    assert mirsky_cylinder(Pattern.of(ones + [7]), fam).value <= base


@given(coprime_moduli(max_count=3, max_mod=40), st.integers(1, 9), st.integers(-50, 50))
def test_sieve_partition_invariant(mods, parts, lo):
    fam = zfamily(mods)
    box = segment_box(1, lo, 200)
    assert np.array_equal(sieve_bits(box, fam.ideals, partition=parts), sieve_bits(box, fam.ideals))


@given(coprime_moduli(max_count=3, max_mod=20), st.integers(0, 2**32), st.integers(-5, 5))
def test_equivariance(mods, seed, a):
    fam = zfamily(mods)
    g = GroupPoint.random(fam, None, np.random.default_rng(seed))
    box = folner_box(1, 30)
    u, v, _ = common_part(shift_window(phi_window(g, box), (a,)), phi_window(g.rotate((a,)), box))
    assert np.array_equal(u, v)


@given(coprime_moduli(max_count=2, max_mod=20), st.integers(0, 2**32))
def test_theta_recovers_phi(mods, seed):
    fam = zfamily(mods)
    g = GroupPoint.random(fam, None, np.random.default_rng(seed))
    box = folner_box(1, recovery_radius(fam))
    assert theta_window(phi_window(g, box), fam).point(fam) == g


@given(coprime_moduli(max_count=2, max_mod=20), st.integers(0, 2**32), st.integers(0, 40))
def test_phi_theta_dominates(mods, seed, n):
    fam = zfamily(mods)
    w = phi_window(GroupPoint.random(fam, None, np.random.default_rng(seed)), folner_box(1, 60))
    rng = np.random.default_rng(seed + 1)
    bits = w.bits & (rng.random(w.bits.size) < 0.7)
    rep = theta_window(synthetic_window(w.box, bits), fam)
    # thinning a phi-window keeps the true residue inside every fiber
    g = theta_window(w, fam).point(fam)
    for m, r in zip(rep.members, g.residues):
        assert r.coords in m


@given(st.integers(1, 2**200))
def test_log2_bracket_order(n):
    lo, hi = log2_bracket(n)
    lo2, hi2 = log2_bracket(n + 1)
    assert lo <= hi and lo <= hi2
    assert Fraction(n.bit_length() - 1) <= lo and hi <= n.bit_length()


@given(st.integers(1, 4), st.integers(0, 2**32))
def test_cache_roundtrip(d, seed):
    rng = np.random.default_rng(seed)
    shape = tuple(int(x) for x in rng.integers(1, 6, d))
    box = segment_box(d, tuple(int(x) for x in rng.integers(-9, 9, d)), shape)
    w = synthetic_window(box, rng.integers(0, 2, box.size))
    back, _ = decode_window(encode_window(w, bytes(32)))
    assert back.box == box and np.array_equal(back.bits, w.bits)


@given(st.integers(0, 2**32))
def test_kernel_backends_agree_on_marks(seed):
    rng = np.random.default_rng(seed)
    a, c = int(rng.integers(1, 7)), int(rng.integers(0, 7))
    H = np.array([[int(rng.integers(1, 9)), c % max(a, 1)], [0, a]], np.int64)
    lo = rng.integers(-10, 10, 2)
    shape = rng.integers(1, 12, 2)
    off = rng.integers(-5, 5, 2)
    outs = []
    for kb in (kernels.NUMBA, kernels.NUMPY):
        bits = np.ones(int(np.prod(shape)), np.uint8)
        kb.mark_lattice(bits, lo, shape, H, off)
        outs.append(bits)
    assert np.array_equal(*outs)


@given(coprime_moduli(max_count=2, max_mod=15))
def test_sieve_matches_congruences(mods):
    fam = zfamily(mods)
    w = sieve_window(fam, segment_box(1, -40, 81))
    for x in range(-40, 41):
        assert w.bit(x) == int(all(x % m for m in mods))
