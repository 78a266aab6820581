"""A quick invariant suite, run by `halfsup selftest`.

Each check returns (name, ok, detail).  Sizes are small so the whole suite
takes well under a minute; tests/test_acceptance.py runs the full sizes.
"""
from __future__ import annotations

import math
import random

import numpy as np

from .amplifier import amplified_square, amplifier_value, build_amplifier, synthetic_system
from .arith import (atkin_lehner_matrix, eps_d, jacobi, kronecker_symbol, normalizer_decompose,
                    primes_between, random_gamma0, theta_multiplier)
from .geometry import in_fundamental_set, reduce_to_F
from .hecke import eigenvalue_tau, hecke_operator
from .kernel import PointPairInvariant, kernel_sum_K, phase_factor
from .latcount import count_matrices, count_matrices_naive
from .qexp import eta8_cubed, theta_series
from .supnorm import evaluate_F, evaluation_floor, l2_norm, l2_rankin_selberg


def check_kronecker():
    bad = 0
    for p in primes_between(3, 200):
        for a in range(1, 30):
            euler = pow(a, (p - 1) // 2, p)
            ref = 0 if a % p == 0 else (1 if euler == 1 else -1)
            bad += kronecker_symbol(a, p) != ref or jacobi(a, p) != ref
    return "kronecker vs Euler criterion", bad == 0, "%d mismatches" % bad


def check_theta_multiplier(count: int = 40, seed: int = 1):
    th = theta_series(400)
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(count):
        g = random_gamma0(4, rng, 12)
        z = complex(-g.d / g.c if g.c else 0.0, 0.0) + complex(rng.uniform(-0.05, 0.05),
                                                              0.5 / max(abs(g.c), 1) ** 2)
        gz = g(z)
        if min(z.imag, gz.imag) < 0.05:
            continue
        lhs = th.evaluate(gz)
        rhs = theta_multiplier(g, z) * th.evaluate(z)
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return "theta multiplier", worst < 1e-8, "max relative residual %.2e" % worst


def check_eps():
    ok = eps_d(1) == 1 and eps_d(3) == 1j and eps_d(-1) == 1j and eps_d(5) == 1
    return "eps_d table", ok, ""


def check_hecke():
    f = eta8_cubed(2000)
    worst = 0.0
    for p in (3, 5):
        r = eigenvalue_tau(f, p, method="cosets") if p == 3 else eigenvalue_tau(f, p, method="relation")
        worst = max(worst, abs(r.tau_p2 ** 2 - r.tau_p4 - r.eta_p2))
    a = hecke_operator(hecke_operator(f, 9), 25)
    b = hecke_operator(hecke_operator(f, 25), 9)
    comm = a.equal_coeffs(b)
    return "Hecke relation and commutativity", worst < 1e-9 and comm, "residual %.2e" % worst


def check_amplifier(seed: int = 2):
    rng = np.random.default_rng(seed)

    def eta(n):
        return 1 + 0j if math.gcd(n, 4) == 1 else 0j
    worst = 0.0
    for _ in range(5):
        tau = synthetic_system(primes_between(10, 20), eta, rng)
        taus = {}
        for p in primes_between(10, 20):
            taus[p * p], taus[p**4] = tau(p * p), tau(p**4)
        w = build_amplifier(taus, 10, 1, eta)
        worst = max(worst, abs(amplifier_value(w, tau) - amplified_square(w, tau)))
    return "amplifier identity", worst < 1e-9 and abs(w.y_const - 8) < 1e-12, "residual %.2e" % worst


def check_counting():
    bad = []
    for z in (1j, 0.3 + 0.9j):
        for ell in (1, 4, 9):
            for N in (1, 4):
                a = count_matrices(z, ell, N, 0.5)[0]
                b = count_matrices_naive(z, ell, N, 0.5)
                if a != b:
                    bad.append((z, ell, N, a, b))
    stab = (count_matrices(1j, 1, 1, 1e-9)[0], count_matrices(1j, 1, 4, 1e-9)[0])
    return "pruned count = naive count", not bad and stab == (4, 2), "stabilizers %r %r" % (stab, bad)


def check_reduction(seed: int = 3):
    rng = random.Random(seed)
    worst = None
    for N in (1, 3):
        for _ in range(20):
            z = complex(rng.uniform(-3, 3), 10 ** rng.uniform(-3, 1))
            r = reduce_to_F(z, N)
            if not in_fundamental_set(r.z, N).inside:
                worst = (z, N)
    w = atkin_lehner_matrix(3, 3)
    g, Q, i, j, s = normalizer_decompose(w, 3)
    return "reduction into F(2N)", worst is None and (Q, i, j) == (3, 0, 0), "%r" % (worst,)


def check_kernel(seed: int = 4):
    rng = random.Random(seed)
    k = PointPairInvariant("bump", 3.0)
    z, w = 0.2 + 0.8j, -0.1 + 1.1j
    base = kernel_sum_K(z, w, 1, 1.5, k).value
    worst = 0.0
    for _ in range(4):
        g = random_gamma0(4, rng, 8)
        v = kernel_sum_K(g(z), w, 1, 1.5, k).value
        worst = max(worst, abs(abs(v) - abs(base)) / abs(base))
    ph = abs(phase_factor(1j, 1j, 1.5) - complex(-math.sqrt(0.5), math.sqrt(0.5)))
    return "kernel automorphy", worst < 1e-9 and ph < 1e-14, "residual %.2e" % worst


def check_supnorm():
    f = eta8_cubed(400)
    g = eta8_cubed(800)
    fl = evaluation_floor(f)
    worst = 0.0
    for x in np.linspace(-0.5, 0.5, 5):
        z = complex(x, 1.01 * fl)
        v, t = evaluate_F(f, z)
        worst = max(worst, abs(v - evaluate_F(g, z)[0]) / t)
    l2 = l2_norm(f, check=False).V_included
    rs = l2_rankin_selberg(eta8_cubed(4000))
    return "sup norm pieces", worst < 1 and abs(l2 / rs - 1) < 0.02, \
        "tail ratio %.2e, L2 %.6f vs %.6f" % (worst, l2, rs)


CHECKS = [check_kronecker, check_eps, check_theta_multiplier, check_hecke, check_amplifier,
          check_counting, check_reduction, check_kernel, check_supnorm]


def run_all():
    out = []
    for chk in CHECKS:
        try:
            out.append(chk())
        except Exception as exc:    # a crash is a failed check
            out.append((chk.__name__, False, "%s: %s" % (type(exc).__name__, exc)))
    return out
