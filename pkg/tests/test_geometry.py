import math
import random

import pytest

from halfsup.arith import GroupElement, S, T, random_gamma0
from halfsup.geometry import (in_fundamental_set, laplacian_eigencheck, mobius_apply, parse_point,
                              reduce_to_F, u_distance)
from halfsup.qexp import eta8_cubed, theta_series

from oracles import brute_max_im


def test_parse_point():
    assert parse_point("5.3+0.2i") == complex(5.3, 0.2)
    assert parse_point("-0.5+2i") == complex(-0.5, 2)
    assert parse_point("i") == 1j
    with pytest.raises(ValueError):
        parse_point("1-2i")


def test_u_distance_examples():
    assert u_distance(1j, 1j) == 0
    assert u_distance(1j, 1 + 1j) == pytest.approx(0.25)
    assert u_distance(1j, 2j) == pytest.approx(0.125)


def test_mobius_examples():
    assert mobius_apply(GroupElement(1, 0, 0, 1), 0.3 + 1j) == 0.3 + 1j
    assert mobius_apply(S, 1j) == 1j
    assert mobius_apply(T, 1j) == 1 + 1j


def test_u_invariance():
    rng = random.Random(0)
    for _ in range(50):
        g = random_gamma0(1, rng, 5)
        z = complex(rng.uniform(-1, 1), rng.uniform(0.1, 2))
        w = complex(rng.uniform(-1, 1), rng.uniform(0.1, 2))
        assert u_distance(g(z), g(w)) == pytest.approx(u_distance(z, w), rel=1e-10)


def test_membership_examples():
    assert in_fundamental_set(2j, 1).inside
    r = in_fundamental_set(0.001j, 1)
    assert not r.inside and r.witness[0] == "im"
    for N in (1, 3, 5):
        assert not in_fundamental_set(1j / (10 * N), N).inside


def test_membership_witness_is_real():
    r = in_fundamental_set(0.45 + 0.5j, 1)
    assert not r.inside
    c, d = r.witness
    assert abs(c * (0.45 + 0.5j) + d) ** 2 < 0.5


def test_reduce_leaves_reduced_points():
    r = reduce_to_F(0.1 + 2j, 1)
    assert r.z == 0.1 + 2j and r.delta.tuple() == (1, 0, 0, 1)


def test_reduce_example():
    r = reduce_to_F(5.3 + 0.2j, 1)
    assert r.z.imag >= math.sqrt(3) / 4 and abs(r.z.real) <= 0.5 + 1e-12
    # the recorded delta really maps z to z'
    assert abs(mobius_apply(r.delta, 5.3 + 0.2j) - r.z) < 1e-12


@pytest.mark.parametrize("N", [1, 3, 5, 15])
def test_reduce_random_points(N):
    rng = random.Random(N)
    for _ in range(40):
        z = complex(rng.uniform(-5, 5), 10 ** rng.uniform(-4, 1))
        r = reduce_to_F(z, N)
        assert in_fundamental_set(r.z, N).inside
        assert abs(mobius_apply(r.delta, z) - r.z) < 1e-9 * max(1, abs(r.z))


@pytest.mark.parametrize("N", [1, 3])
def test_orbit_invariance_of_the_maximum(N):
    rng = random.Random(10 + N)
    for _ in range(20):
        w = reduce_to_F(complex(rng.uniform(-1, 1), rng.uniform(0.05, 1)), N).z
        g = random_gamma0(2 * N, rng, 4)
        r = reduce_to_F(g(w), N)
        assert abs(r.z.imag - w.imag) < 1e-9


@pytest.mark.parametrize("N", [1, 3])
def test_reduce_matches_word_search(N):
    rng = random.Random(20 + N)
    for _ in range(10):
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.05, 0.5))
        assert abs(reduce_to_F(z, N).z.imag - brute_max_im(z, N)) < 1e-9


def test_laplacian_examples():
    f = eta8_cubed(2000)
    F = lambda z: z.imag ** 0.75 * f.evaluate(z)
    assert laplacian_eigencheck(F, 1.5, 0.1 + 0.8j, 1e-4) < 1e-5
    th = theta_series(200)
    G = lambda z: z.imag ** 0.25 * th.evaluate(z)
    assert laplacian_eigencheck(G, 0.5, 1j, 1e-4) < 1e-5
    assert laplacian_eigencheck(lambda z: 0j, 1.5, 1j) == 0


def test_laplacian_detects_wrong_weight():
    f = eta8_cubed(2000)
    F = lambda z: z.imag ** 0.75 * f.evaluate(z)
    assert laplacian_eigencheck(F, 0.5, 0.1 + 0.8j, 1e-4) > 1e-2
