import cmath
import itertools
import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from halfsup.arith import (GroupElement, IDENTITY, DirichletCharacter, NotInNormalizer,
                           atkin_lehner_matrix, cocycle_J, compose_normalizer, divisors, eps_d,
                           ext_gcd, factorize, gamma0_coset_reps, gamma0_generators,
                           gamma0_index, is_prime, jacobi, kronecker_symbol, matrix_A,
                           normalizer_decompose, primes_between, random_gamma0, slash,
                           theta_multiplier, volume)


def euler_legendre(a, p):
    v = pow(a % p, (p - 1) // 2, p)
    return 0 if a % p == 0 else (1 if v == 1 else -1)


def test_kronecker_examples():
    assert kronecker_symbol(2, 7) == 1
    assert kronecker_symbol(12, 7) == -1
    for d in (1, 3, 5, 15, 99):
        assert kronecker_symbol(1, d) == 1


def test_kronecker_matches_euler_at_odd_primes():
    for p in primes_between(3, 200):
        for a in range(-40, 41):
            assert kronecker_symbol(a, p) == euler_legendre(a, p)


def test_jacobi_is_multiplicative_in_the_modulus():
    for a in range(-10, 11):
        for m, n in ((3, 5), (7, 9), (15, 11)):
            assert jacobi(a, m * n) == jacobi(a, m) * jacobi(a, n)


def test_kronecker_extension_table():
    # (c/-1) = -1 for c < 0, (c/2) from c mod 8, (c/0) = 1 only for c = +-1
    assert kronecker_symbol(-3, -1) == -1
    assert kronecker_symbol(3, -1) == 1
    assert [kronecker_symbol(c, 2) for c in (1, 3, 5, 7)] == [1, -1, -1, 1]
    assert kronecker_symbol(1, 0) == 1 and kronecker_symbol(2, 0) == 0
    assert kronecker_symbol(0, 1) == 1 and kronecker_symbol(0, 3) == 0


def test_eps_d():
    assert eps_d(1) == 1 and eps_d(5) == 1
    assert eps_d(7) == 1j and eps_d(3) == 1j
    assert eps_d(-3) == 1 and eps_d(-1) == 1j
    with pytest.raises(ValueError):
        eps_d(4)


def test_small_number_theory():
    assert ext_gcd(240, 46)[0] == 2
    g, x, y = ext_gcd(240, 46)
    assert 240 * x + 46 * y == 2
    assert factorize(360) == {2: 3, 3: 2, 5: 1}
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert [p for p in range(30) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert primes_between(10, 20) == [11, 13, 17, 19]


def test_character_basics():
    chi = DirichletCharacter.kronecker(-4, 4)
    assert chi(1) == 1 and chi(3) == -1 and chi(2) == 0
    assert (chi * chi).is_trivial()
    assert chi.conj().same_as(chi)
    assert DirichletCharacter.from_json(chi.to_json()) == chi
    with pytest.raises(ValueError):
        DirichletCharacter(5, ((1, Fraction(0)), (2, Fraction(1, 2)), (3, Fraction(0)), (4, Fraction(0))))


def test_group_element_ops():
    g = GroupElement(2, 1, 1, 1)
    assert (g @ g.inverse()).tuple() == (1, 0, 0, 1)
    assert (g ** 3).tuple() == (g @ g @ g).tuple()
    assert abs(IDENTITY(0.3 + 1j) - (0.3 + 1j)) == 0
    assert GroupElement(0, -1, 1, 0)(1j) == 1j
    with pytest.raises(ValueError):
        GroupElement(1, 2, 2, 4)


def brute_cosets(M):
    """Orbit of (0:1) in P^1(Z/M) under SL2(Z): its size is the index."""
    seen = set()
    stack = [(0, 1)]
    while stack:
        c, d = stack.pop()
        key = None
        for u in range(1, M + 1):
            if math.gcd(u, M) == 1:
                k = (c * u % M, d * u % M)
                key = k if key is None or k < key else key
        if key in seen:
            continue
        seen.add(key)
        stack += [(d % M, -c % M), (c % M, (c + d) % M)]
    return len(seen)


@pytest.mark.parametrize("M", [1, 2, 4, 6, 12, 16, 36, 64])
def test_gamma0_index_matches_brute_force(M):
    assert gamma0_index(M) == brute_cosets(M)
    assert len(gamma0_coset_reps(M)) == gamma0_index(M)


def test_gamma0_index_examples():
    assert gamma0_index(4) == 6 and gamma0_index(12) == 24 and gamma0_index(1) == 1
    assert volume(1) == pytest.approx(math.pi / 3)


@pytest.mark.parametrize("M", [4, 12, 20])
def test_coset_reps_are_distinct_cosets(M):
    reps = gamma0_coset_reps(M)
    for g, h in itertools.combinations(reps, 2):
        assert not (g @ h.inverse()).in_gamma0(M)


@pytest.mark.parametrize("M", [4, 12, 64])
def test_generators_lie_in_gamma0(M):
    gens = gamma0_generators(M)
    assert gens and all(g.in_gamma0(M) for g in gens)


def test_theta_multiplier_against_mpmath():
    # theta(z) = sum q^(n^2), q = e(z): jtheta(3, 0, q)
    rng = random.Random(7)
    for _ in range(25):
        g = random_gamma0(4, rng, 6)
        c, d = g.c, g.d
        z = complex(-d / c, 0) + complex(rng.uniform(-0.2, 0.2), 0.7) / max(abs(c), 1) if c else \
            complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 1.5))
        q1 = mpmath.exp(2j * mpmath.pi * mpmath.mpc(g(z)))
        q0 = mpmath.exp(2j * mpmath.pi * mpmath.mpc(z))
        lhs = complex(mpmath.jtheta(3, 0, q1))
        rhs = theta_multiplier(g, z) * complex(mpmath.jtheta(3, 0, q0))
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_cocycle_examples():
    assert cocycle_J(IDENTITY, 0.2 + 1j) == 1
    assert cocycle_J(GroupElement(1, 1, 0, 1), 1j) == 1
    g = GroupElement(1, 0, 4, 1)
    th = lambda z: complex(mpmath.jtheta(3, 0, mpmath.exp(2j * mpmath.pi * z)))
    j = th(g(1j)) / th(1j)
    assert abs(cocycle_J(g, 1j) - j / abs(j)) < 1e-10
    # the unit part of j is the phase of (4i + 1)^(1/2) here (eps_1 = 1, (4/1) = 1)
    assert abs(cocycle_J(g, 1j) - cmath.sqrt(4j + 1) / abs(4j + 1) ** 0.5) < 1e-12


def test_cocycle_relation():
    # J(gh, z) = J(g, hz) J(h, z) for the theta multiplier
    rng = random.Random(3)
    for _ in range(50):
        g, h = random_gamma0(4, rng, 5), random_gamma0(4, rng, 5)
        z = complex(rng.uniform(-1, 1), rng.uniform(0.2, 2))
        lhs = cocycle_J(g @ h, z)
        rhs = cocycle_J(g, h(z)) * cocycle_J(h, z)
        assert abs(lhs - rhs) < 1e-12


def test_slash_examples():
    F = lambda z: z.imag ** 0.75 * cmath.exp(2j * math.pi * z)
    z = 0.3 + 0.7j
    assert abs(slash(F, Fraction(3, 2), IDENTITY, z) - F(z)) < 1e-15
    v = slash(F, Fraction(3, 2), GroupElement(2, 0, 0, 2), z)
    assert abs(abs(v) - abs(F(z))) < 1e-14
    v = slash(F, Fraction(3, 2), GroupElement(1, 1, 0, 1), z)
    assert abs(abs(v) - abs(F(z + 1))) < 1e-15


def test_atkin_lehner_examples():
    assert atkin_lehner_matrix(3, 3).tuple() == (81, 4, 60, 3)
    w2 = atkin_lehner_matrix(2, 3)
    a, b, c, d = w2.tuple()
    assert w2.det == 2 and a % 2 == 0 and c % 6 == 0 and d % 2 == 0
    for N in (1, 3, 5, 15):
        for Q in divisors(N):
            w = atkin_lehner_matrix(Q, N)
            a, b, c, d = w.tuple()
            assert w.det == Q and a % Q == 0 and d % Q == 0 and c % (4 * N) == 0
            assert Q > 1 or w == IDENTITY
    with pytest.raises(ValueError):
        atkin_lehner_matrix(3, 4)


def test_normalizer_examples():
    g, Q, i, j, s = normalizer_decompose(IDENTITY, 3)
    assert (g.tuple(), Q, i, j) == ((1, 0, 0, 1), 1, 0, 0)
    g, Q, i, j, s = normalizer_decompose(matrix_A(3), 3)
    assert (Q, i, j) == (1, 1, 0) and g.tuple() == (1, 0, 0, 1)
    with pytest.raises(NotInNormalizer):
        normalizer_decompose(GroupElement(1, 0, 1, 1), 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([1, 3, 5, 15]), st.integers(0, 1), st.integers(0, 1))
def test_normalizer_round_trip(seed, N, i, j):
    rng = random.Random(seed)
    g0 = random_gamma0(4 * N, rng, 4)
    Q = rng.choice(divisors(N))
    delta = compose_normalizer(g0, Q, i, j, N)
    g, Q2, i2, j2, s = normalizer_decompose(delta, N)
    assert g.in_gamma0(4 * N)
    back = compose_normalizer(g, Q2, i2, j2, N)
    assert all(Fraction(x) * s == y for x, y in zip(back.tuple(), delta.tuple())) or \
        all(-Fraction(x) * s == y for x, y in zip(back.tuple(), delta.tuple()))
