import cmath
import math
import random

import pytest

from halfsup.amplifier import AmplifierWeights
from halfsup.arith import GroupElement, cocycle_J, random_gamma0
from halfsup.kernel import (PointPairInvariant, geometric_side_R, kernel_sum_K,
                            phase_equivariance_residual, phase_factor, selberg_h, selberg_h_abel)


def test_profiles():
    g = PointPairInvariant("gaussian", 0.5)
    b = PointPairInvariant("bump", 0.2)
    assert g(0) == 1 and b(0) == 1
    assert b(0.2) == 0 and b(1.0) == 0 and b(0.1) == pytest.approx(0.125)
    assert g.sup_beyond(1.0) == pytest.approx(math.exp(-2))
    assert g(g.cutoff(1e-12)) <= 1e-12 * (1 + 1e-9)
    with pytest.raises(ValueError):
        PointPairInvariant("box", 1.0)
    with pytest.raises(ValueError):
        PointPairInvariant("bump", 0)


def test_phase_examples():
    assert phase_factor(0.3 + 1j, 0.1 + 2j, 0) == 1
    # (2i)^(3/2)/|2i|^(3/2) on the principal branch
    assert abs(phase_factor(1j, 1j, 1.5) - cmath.exp(0.75j * math.pi)) < 1e-15
    # with exponent 2 kappa = 3 one gets (2i)^3/8 = -i
    assert abs(phase_factor(1j, 1j, 1.5) ** 2 - (-1j)) < 1e-15
    assert abs(abs(phase_factor(0.2 + 0.4j, -1 + 3j, 2.5)) - 1) < 1e-15
    T = GroupElement(1, 1, 0, 1)
    assert phase_equivariance_residual(T, 0.1 + 1j, 0.4 + 0.3j, 1.5) < 1e-15


def test_phase_equivariance_random():
    rng = random.Random(2)
    worst = 0.0
    for _ in range(50):
        g = random_gamma0(4, rng, 6)
        z = complex(rng.uniform(-1, 1), rng.uniform(0.1, 2))
        w = complex(rng.uniform(-1, 1), rng.uniform(0.1, 2))
        worst = max(worst, phase_equivariance_residual(g, z, w, 1.5))
    assert worst < 1e-10


def test_phase_equivariance_against_cocycle():
    # for integer n, ((gz, gw))^n = (J(g, z) conj(J(g, w)))^(2n) ((z, w))^n:
    # the theta multiplier units cancel between the two J factors
    rng = random.Random(3)
    for _ in range(30):
        g = random_gamma0(4, rng, 5)
        z = complex(rng.uniform(-1, 1), rng.uniform(0.1, 2))
        w = complex(rng.uniform(-1, 1), rng.uniform(0.1, 2))
        lhs = phase_factor(g(z), g(w), 3.0)
        rhs = (cocycle_J(g, z) * cocycle_J(g, w).conjugate()) ** 6 * phase_factor(z, w, 3.0)
        assert abs(lhs - rhs) < 1e-10


def test_selberg_zero():
    assert selberg_h(PointPairInvariant("zero", 1.0), 0.3) == 0


@pytest.mark.parametrize("k", [PointPairInvariant("bump", 0.5), PointPairInvariant("gaussian", 0.3)])
def test_selberg_against_abel(k):
    for t in (0.0, 0.7, 2.0):
        assert selberg_h(k, t) == pytest.approx(selberg_h_abel(k, t), rel=1e-6, abs=1e-9)


def test_selberg_even_and_base_point_free():
    k = PointPairInvariant("gaussian", 0.3)
    assert abs(selberg_h(k, 0.7) - selberg_h(k, -0.7)) < 1e-8
    assert abs(selberg_h(k, 1.0) - selberg_h(k, 1.0, z=1 + 2j)) < 1e-6


def test_kernel_single_term_at_high_point():
    # z +- 1 sits at u = 1/100 from 5i, so radius 0.01 catches them on the
    # boundary where k vanishes; a smaller radius leaves only +-I
    z = 5j
    edge = kernel_sum_K(z, z, 1, 1.5, PointPairInvariant("bump", 0.01))
    assert edge.terms == 6
    k = PointPairInvariant("bump", 0.005)
    r = kernel_sum_K(z, z, 1, 1.5, k)
    assert r.terms == 2 and r.tail_bound == 0 and abs(edge.value - r.value) < 1e-15
    # +identity contributes ((z, z))^k; -identity picks up J(-I, z)^3
    J = cocycle_J(GroupElement(-1, 0, 0, -1), z)
    expected = phase_factor(z, z, 1.5) * (1 + J ** 3)
    assert abs(r.value - expected) < 1e-14


@pytest.mark.parametrize("N", [1, 3])
def test_kernel_automorphy(N):
    rng = random.Random(N)
    k = PointPairInvariant("bump", 2.0)
    z, w = 0.15 + 0.9j, -0.2 + 1.1j
    base = kernel_sum_K(z, w, N, 1.5, k)
    assert abs(base.value) > 1e-3
    for _ in range(10):
        g = random_gamma0(4 * N, rng, 6)
        a = kernel_sum_K(g(z), w, N, 1.5, k)
        b = kernel_sum_K(z, g(w), N, 1.5, k)
        tol = 1e-9 + base.tail_bound + a.tail_bound + b.tail_bound
        assert abs(abs(a.value) - abs(base.value)) < tol
        assert abs(abs(b.value) - abs(base.value)) < tol


def test_kernel_tail_bound_is_honest():
    k = PointPairInvariant("gaussian", 0.2)
    z, w = 0.1 + 0.8j, 0.3 + 1.2j
    a = kernel_sum_K(z, w, 1, 1.5, k, tol=1e-6)
    b = kernel_sum_K(z, w, 1, 1.5, k, U=2 * a.U, tol=1e-6)
    assert abs(a.value - b.value) <= a.tail_bound


def test_kernel_tail_error():
    k = PointPairInvariant("gaussian", 1.0)
    with pytest.raises(ArithmeticError, match="try U"):
        kernel_sum_K(1j, 1j, 1, 1.5, k, U=0.5, tol=1e-12)


def weights(y, const):
    return AmplifierWeights(10, 1, [], [], [], {}, y, const)


def test_geometric_side_examples():
    k = PointPairInvariant("bump", 0.01)
    z = 2j
    r = geometric_side_R(z, weights({}, 8), 1, k)
    # only the scalars +-I lie that close to 2i at l = 1 (modulus 2)
    assert r.value == pytest.approx(8 * 2 * 1.0)
    assert geometric_side_R(z, weights({}, 0), 1, k).value == 0
    r2 = geometric_side_R(z, weights({}, 8), 1, k.scaled(2.0))
    assert r2.value == pytest.approx(2 * r.value)


def test_geometric_side_monotone():
    z = 0.1 + 0.7j
    ys = {121: 1.0, 169: -1.5}
    prev = 0.0
    for rad in (0.1, 0.5, 1.0, 2.0):
        v = geometric_side_R(z, weights(ys, 4), 1, PointPairInvariant("bump", rad)).value
        assert v >= prev
        prev = v
    bigger = geometric_side_R(z, weights({121: 2.0, 169: -1.5}, 4), 1, PointPairInvariant("bump", 2.0))
    assert bigger.value >= prev


def test_geometric_side_budget():
    z = 0.1 + 0.7j
    r = geometric_side_R(z, weights({10**8: 1.0}, 1), 1, PointPairInvariant("bump", 1.0), budget=1e3)
    assert r.partial and r.skipped == [10**8]
