from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from halfsup.arith import DirichletCharacter, GroupElement, gamma0_generators
from halfsup.qexp import (FormatError, _mul_int, dilate, dump_form, eta8_cubed, eta_product,
                          form_from_json, form_to_json, load_form, theta_series,
                          verify_modularity)


def naive_series_product(factors, P):
    """Expand prod (1 - q^(m n))^r by repeated polynomial multiplication."""
    out = [1] + [0] * (P - 1)
    for m, r in factors:
        base = [1] + [0] * (P - 1)
        n = 1
        while m * n < P:
            nxt = base[:]
            for i in range(P - m * n):
                nxt[i + m * n] -= base[i]
            base = nxt
            n += 1
        if r < 0:
            inv = [0] * P
            inv[0] = 1
            for i in range(1, P):
                inv[i] = -sum(base[j] * inv[i - j] for j in range(1, i + 1))
            base, r = inv, -r
        for _ in range(r):
            out = [sum(out[j] * base[i - j] for j in range(i + 1)) for i in range(P)]
    return out


def test_theta_coefficients():
    assert [int(c) for c in theta_series(10).coeffs] == [1, 2, 0, 0, 2, 0, 0, 0, 0, 2]


def test_eta_coefficients():
    f = eta_product([(1, 1)], 8)
    assert f.offset == Fraction(1, 24)
    assert [int(c) for c in f.coeffs] == [1, -1, -1, 0, 0, 1, 0, 1]


def test_eta8_cubed_matches_product():
    f = eta_product([(8, 3)], 30)
    g = eta8_cubed(30)
    assert f.offset == 1 and f.coeffs == g.coeffs
    nz = {int(f.offset) + n: int(c) for n, c in enumerate(f.coeffs) if c}
    assert nz == {1: 1, 9: -3, 25: 5}


def test_empty_eta_product_is_one():
    f = eta_product([], 5)
    assert f.offset == 0 and [int(c) for c in f.coeffs] == [1, 0, 0, 0, 0]


@pytest.mark.parametrize("spec", [[(1, -2), (2, 5), (4, -2)], [(1, 2), (11, 2)], [(2, 3), (1, -1)]])
def test_eta_products_match_naive_expansion(spec):
    P = 60
    f = eta_product(spec, P)
    assert [int(c) for c in f.coeffs] == naive_series_product(spec, P)


def test_theta_as_eta_quotient():
    P = 200
    assert eta_product([(1, -2), (2, 5), (4, -2)], P).coeffs == theta_series(P).coeffs


def test_negative_offset_rejected():
    with pytest.raises(ValueError):
        eta_product([(1, -1)], 10)


def test_arithmetic():
    th = theta_series(30)
    assert (th + th.scale(-1)).is_zero()
    assert [int(c) for c in (th * th).coeffs[:6]] == [1, 4, 4, 0, 4, 8]
    eta = eta_product([(1, 1)], 10)
    assert eta.scale(2).coeffs == tuple(2 * c for c in eta.coeffs)


def r2(n):
    return sum(1 for x in range(-10, 11) for y in range(-10, 11) if x * x + y * y == n)


def test_theta_square_counts_two_squares():
    sq = theta_series(60) * theta_series(60)
    assert [int(c) for c in sq.coeffs[:60]] == [r2(n) for n in range(60)]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-10**12, 10**12), min_size=1, max_size=40),
       st.lists(st.integers(-10**12, 10**12), min_size=1, max_size=40))
def test_kronecker_substitution_product(a, b):
    P = min(len(a), len(b))
    ref = [sum(a[j] * b[i - j] for j in range(i + 1)) for i in range(P)]
    assert _mul_int(a[:P], b[:P], P) == ref


def test_json_round_trip(tmp_path):
    th = theta_series(40)
    path = tmp_path / "theta.json"
    dump_form(th, path)
    back = load_form(path)
    assert back.coeffs == th.coeffs and back.level == 4 and back.eta_spec == th.eta_spec


def test_json_rational_and_errors(tmp_path):
    obj = form_to_json(theta_series(5))
    obj["coefficients"][2] = "1/3"
    assert form_from_json(obj).coeffs[2] == Fraction(1, 3)
    bad = dict(obj)
    del bad["level"]
    with pytest.raises(FormatError) as e:
        form_from_json(bad)
    assert e.value.field == "level"
    bad = dict(obj, coefficients=["1", "x", "0", "0", "1"])
    with pytest.raises(FormatError) as e:
        form_from_json(bad)
    assert e.value.field == "coefficients[1]"
    bad = dict(obj, weight_num=1, level=6)
    with pytest.raises(FormatError) as e:
        form_from_json(bad)
    assert e.value.field == "level"
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(FormatError):
        load_form(p)


def test_evaluate_against_mpmath():
    f = eta8_cubed(500)
    for z in (0.1 + 0.3j, -0.37 + 0.05j, 0.49 + 1.2j):
        # eta(8z)^3 = e(z) prod (1 - e(8nz))^3
        q = mpmath.exp(2j * mpmath.pi * mpmath.mpc(8 * z))
        ref = complex(mpmath.exp(2j * mpmath.pi * mpmath.mpc(z)) * mpmath.qp(q) ** 3)
        assert abs(f.evaluate(z) - ref) < 1e-12 * max(1, abs(ref))


def test_evaluate_is_periodic_for_large_shift():
    f = eta8_cubed(300)
    z = 0.123 + 0.04j
    assert abs(f.evaluate(z) - f.evaluate(z + 1000)) < 1e-12


def test_dilation():
    f = eta8_cubed(50)
    g = dilate(f, 3)
    assert g.level == 192 and g.offset == 3 and g.precision == 150
    z = 0.2 + 0.1j
    assert abs(g.evaluate(z) - f.evaluate(3 * z)) < 1e-13


def test_verify_modularity_examples():
    th = theta_series(2000)
    rep = verify_modularity(th, [GroupElement(1, 0, 4, 1)], tol=1e-8)
    assert rep.passed
    f = eta8_cubed(4000)
    assert verify_modularity(f, [GroupElement(1, 1, 0, 1)]).passed
    bad = verify_modularity(f, [GroupElement(1, 0, 8, 1)])
    assert not bad.passed and bad.failures[0][0] == (1, 0, 8, 1)


def test_verify_modularity_on_all_generators():
    f = eta8_cubed(40000)
    assert verify_modularity(f, gamma0_generators(64), npoints=2).passed


def test_dilated_character_is_needed():
    # theta(3z) has character (12/.) on Gamma_0(12); the trivial one must fail
    g = dilate(theta_series(3000), 3)
    gens = gamma0_generators(12)
    assert verify_modularity(g, gens, npoints=2).passed
    wrong = g.with_coeffs(g.coeffs, character=DirichletCharacter.trivial(12), eta=True)
    assert not verify_modularity(wrong, gens, npoints=2).passed
