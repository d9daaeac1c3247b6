import random
from fractions import Fraction
from math import gcd

import pytest

from bfree.errors import (
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
from bfree.ring_algebra import (
    ExplicitSpec,
    IdealLattice,
    PrimePowerSpec,
    build_bfamily,
    contains,
    crt,
    elem_add,
    elem_mul,
    factor_rational_prime,
    family_from_ideals,
    hnf,
    ideal_norm,
    ideal_product,
    ideal_sum,
    is_bfree,
    is_coprime,
    make_order,
    principal_ideal,
    residue_index,
    residue_rep,
    residues,
)


def gauss_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def gauss_divides(g, a):
    # g | a in Z[i] iff a * conj(g) / N(g) is integral
    n = g[0] ** 2 + g[1] ** 2
    num = gauss_mul(a, (g[0], -g[1]))
    return num[0] % n == 0 and num[1] % n == 0


class TestOrders:
    def test_gaussian_order(self, G):
        assert G.degree == 2
        assert G.mul_table is not None

    def test_degree_one_is_integers(self, Z):
        assert Z.degree == 1
        assert (Z.element(3) * Z.element(4)).coords == (12,)

    def test_reducible_rejected(self):
        with pytest.raises(Reducible):
            make_order([0, -1, 1])

    def test_not_monic_rejected(self):
        with pytest.raises(NotMonic):
            make_order([1, 0, 2])

    def test_degree_cap(self):
        with pytest.raises(DegreeTooLarge):
            make_order([2, 0, 0, 0, 0, 0, 0, 1])
        assert make_order([2, 0, 0, 0, 0, 0, 0, 1], degree_cap=7).degree == 7

    def test_mul_table_matches_reduction(self):
        # theta^3 = theta + 1 for x^3 - x - 1
        K = make_order([-1, -1, 0, 1])
        t = K.theta
        assert (t * t * t).coords == (1, 1, 0)

    def test_discriminant(self, G):
        assert G.discriminant() == -4


class TestElements:
    def test_gaussian_products(self, G):
        t = G.theta
        assert ((G.one + t) * (G.one - t)).coords == (2, 0)
        assert (t * t).coords == (-1, 0)

    def test_elem_functions(self, G):
        a, b = G.element((1, 2)), G.element((3, -1))
        assert elem_mul(a, b).coords == gauss_mul((1, 2), (3, -1))
        assert elem_add(a, b).coords == (4, 1)

    def test_overflow_detected(self, Z):
        big = Z.element(2**40)
        with pytest.raises(CoordinateOverflow):
            big * big

    def test_wide_mode(self):
        W = make_order([0, 1], wide=True)
        assert (W.element(2**40) * W.element(2**40)).coords == (2**80,)

    def test_random_gaussian_products(self, G):
        rng = random.Random(5)
        for _ in range(200):
            a = (rng.randint(-50, 50), rng.randint(-50, 50))
            b = (rng.randint(-50, 50), rng.randint(-50, 50))
            assert (G.element(a) * G.element(b)).coords == gauss_mul(a, b)
            assert G.element(a).norm() == a[0] ** 2 + a[1] ** 2


class TestIdeals:
    def test_principal_two(self, G):
        b = principal_ideal(G.element(2))
        assert b.basis == ((2, 0), (0, 2))
        assert b.norm == 4

    def test_principal_one_plus_i(self, G):
        b = principal_ideal(G.element((1, 1)))
        assert b.norm == 2
        assert ideal_norm(b) == 2

    def test_zero_rejected(self, G):
        with pytest.raises(ZeroElement):
            principal_ideal(G.zero)

    def test_sums(self, Z, G):
        assert is_coprime(principal_ideal(Z.element(2)), principal_ideal(Z.element(3)))
        s = ideal_sum(principal_ideal(Z.element(4)), principal_ideal(Z.element(6)))
        assert s == principal_ideal(Z.element(2))
        a = principal_ideal(G.element((1, 1)))
        b = principal_ideal(G.element((1, -1)))
        assert ideal_sum(a, b) == a
        assert not is_coprime(a, b)

    def test_products(self, Z, G):
        assert ideal_product(principal_ideal(Z.element(2)), principal_ideal(Z.element(3))) == principal_ideal(Z.element(6))
        p = principal_ideal(G.element((1, 1)))
        sq = ideal_product(p, p)
        assert sq == principal_ideal(G.element(2))
        assert sq.basis == ((2, 0), (0, 2))
        assert sq.norm == 4 and p**2 == sq

    def test_membership(self, Z, G):
        assert contains(principal_ideal(Z.element(2)), Z.element(6))
        two = principal_ideal(G.element(2))
        assert not contains(two, G.element((1, 1)))
        assert contains(principal_ideal(G.element((1, 1))), G.element(2))
        assert G.element(2) in principal_ideal(G.element((1, 1)))

    def test_membership_against_gaussian_divisibility(self, G):
        rng = random.Random(11)
        for _ in range(100):
            g = (rng.randint(-6, 6), rng.randint(-6, 6))
            if g == (0, 0):
                continue
            b = principal_ideal(G.element(g))
            for _ in range(10):
                a = (rng.randint(-40, 40), rng.randint(-40, 40))
                assert contains(b, G.element(a)) == gauss_divides(g, a)

    def test_residues(self, Z, G):
        assert residue_rep(Z.element(5), principal_ideal(Z.element(2))).coords == (1,)
        two = principal_ideal(G.element(2))
        assert residue_rep(G.theta, two).coords == (0, 1)
        reps = [r.coords for r in residues(two)]
        assert sorted(reps) == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert [residue_index(G.element(r), two) for r in reps] == list(range(4))

    def test_residues_complete_and_distinct(self, G):
        b = principal_ideal(G.element((2, 3)))
        reps = list(residues(b))
        assert len(reps) == b.norm == 13
        assert len({residue_rep(r, b) for r in reps}) == 13
        assert all(residue_rep(r, b) == r for r in reps)

    def test_hnf_idempotent(self, G):
        b = principal_ideal(G.element((3, 5)))
        assert hnf(b.columns(), 2) == b.basis

    def test_from_columns_checks_ideal_property(self, G):
        with pytest.raises(ValueError):
            IdealLattice.from_columns(G, [(2, 0), (0, 1)])


class TestCRT:
    def test_integer_crt(self, Z):
        two, three = principal_ideal(Z.element(2)), principal_ideal(Z.element(3))
        assert crt([1, 0], [two, three]).coords == (3,)
        # exhaustive oracle over residues 0..5
        for r2 in range(2):
            for r3 in range(3):
                x = crt([r2, r3], [two, three]).coords[0]
                assert [y for y in range(6) if y % 2 == r2 and y % 3 == r3] == [x]

    def test_zero_residues(self, Z):
        assert crt([0, 0], [principal_ideal(Z.element(4)), principal_ideal(Z.element(9))]).coords == (0,)

    def test_not_coprime(self, Z):
        with pytest.raises(NotCoprime):
            crt([1, 1], [principal_ideal(Z.element(4)), principal_ideal(Z.element(6))])

    def test_gaussian_crt(self, G):
        rng = random.Random(3)
        a = principal_ideal(G.element((2, 1)))
        b = principal_ideal(G.element(3))
        c = principal_ideal(G.element((1, 1)))
        for _ in range(50):
            rs = [G.element((rng.randint(-9, 9), rng.randint(-9, 9))) for _ in range(3)]
            x = crt(rs, [a, b, c])
            for r, ideal in zip(rs, [a, b, c]):
                assert residue_rep(x, ideal) == residue_rep(r, ideal)


class TestFactorization:
    def test_split(self, G):
        fs = factor_rational_prime(5, G)
        assert [(P.norm, e, f) for P, e, f in fs] == [(5, 1, 1), (5, 1, 1)]
        assert {P for P, _, _ in fs} == {principal_ideal(G.element((-2, 1))), principal_ideal(G.element((2, 1)))}

    def test_inert(self, G):
        (P, e, f), = factor_rational_prime(3, G)
        assert (P.norm, e, f) == (9, 1, 2)
        assert P == principal_ideal(G.element(3))

    def test_ramified_needs_assertion(self):
        K = make_order([1, 0, 1])
        with pytest.raises(UnsafePrime):
            factor_rational_prime(2, K)
        (P, e, f), = factor_rational_prime(2, K, assume_maximal=True)
        assert (P.norm, e, f) == (2, 2, 1)
        assert P == principal_ideal(K.element((1, 1)))

    def test_not_prime(self, G):
        with pytest.raises(NotPrime):
            factor_rational_prime(15, G)

    @pytest.mark.parametrize("f", [[1, 0, 1], [-2, 0, 1], [-1, -1, 0, 1], [5, 0, 1]])
    def test_product_recovers_p(self, f):
        K = make_order(f, maximal=True)
        for p in [2, 3, 5, 7, 11, 13, 17, 19, 23]:
            fs = factor_rational_prime(p, K, assume_maximal=True)
            assert sum(e * deg for _, e, deg in fs) == K.degree
            prod = None
            for P, e, _ in fs:
                term = P**e
                prod = term if prod is None else ideal_product(prod, term)
            assert prod == principal_ideal(K.element(p))


class TestFamilies:
    def test_gaussian_prime_squares(self, G):
        fam = build_bfamily(G, PrimePowerSpec(2, 100), assume_maximal=True)
        assert fam.norms == [4, 25, 25, 81]
        assert fam.ideals[0] == principal_ideal(G.element((1, 1))) ** 2
        assert fam.ideals[3] == principal_ideal(G.element(9))
        assert fam.partial_sum == Fraction(1, 4) + Fraction(2, 25) + Fraction(1, 81)

    def test_explicit(self, Z):
        fam = build_bfamily(Z, ExplicitSpec((4, 9)))
        assert fam.norms == [4, 9]
        assert fam.partial_sum == Fraction(13, 36)

    def test_explicit_not_coprime(self, Z):
        with pytest.raises(NotCoprime):
            build_bfamily(Z, ExplicitSpec((4, 6)))

    def test_empty(self, Z):
        with pytest.raises(EmptyFamily):
            build_bfamily(Z, PrimePowerSpec(2, 3))
        with pytest.raises(EmptyFamily):
            family_from_ideals([])

    def test_integer_prime_squares(self, Z):
        fam = build_bfamily(Z, PrimePowerSpec(2, 10**4))
        assert fam.norms == [p * p for p in range(2, 101) if all(p % q for q in range(2, p))]
        assert fam.declared_tail == Fraction(1, 100)

    def test_tail_dominates_omitted_terms(self, Z):
        small = build_bfamily(Z, PrimePowerSpec(2, 10**4))
        large = build_bfamily(Z, PrimePowerSpec(2, 10**6))
        omitted = large.partial_sum - small.partial_sum
        assert 0 < omitted <= small.declared_tail

    def test_ordering_is_canonical(self, G):
        fam = build_bfamily(G, PrimePowerSpec(2, 2000), assume_maximal=True)
        shuffled = list(fam.ideals)
        random.Random(1).shuffle(shuffled)
        again = family_from_ideals(shuffled)
        assert again.ideals == fam.ideals

    def test_is_bfree(self, Z):
        fam = build_bfamily(Z, ExplicitSpec((4, 9)))
        assert [a for a in range(12) if not is_bfree(Z.element(a), fam)] == [0, 4, 8, 9]


def test_degree_one_matches_integer_arithmetic(Z):
    rng = random.Random(7)
    for _ in range(1000):
        a, b = rng.randint(1, 500), rng.randint(1, 500)
        A, B = principal_ideal(Z.element(a)), principal_ideal(Z.element(b))
        assert ideal_sum(A, B).norm == gcd(a, b)
        assert ideal_product(A, B).norm == a * b
        assert is_coprime(A, B) == (gcd(a, b) == 1)
        x = rng.randint(-1000, 1000)
        assert contains(A, Z.element(x)) == (x % a == 0)
        assert residue_rep(Z.element(x), A).coords == (x % a,)
