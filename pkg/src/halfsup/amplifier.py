"""The amplifier: prime sets, weights x_l, and the collected coefficients y_l.

For primes p in [Lam, 2 Lam] not dividing 4N the amplifier is supported on
P2 = {p^2} and P4 = {p^4} with x_l = sgn(tau_f(l)).  Expanding
|sum_l conj(x_l) tau(l)|^2 with the product relations

    conj(tau(l1)) tau(l2) = conj(eta(l1)) tau(l1 l2)                  (coprime)
    conj(tau(p^2)) tau(p^2) = conj(eta(p^2)) tau(p^4) + 1
    conj(tau(p^2)) tau(p^4) = conj(eta(p^2)) tau(p^6) + tau(p^2)
    conj(tau(p^4)) tau(p^2) = conj(eta(p^4)) tau(p^6) + conj(eta(p^2)) tau(p^2)
    conj(tau(p^4)) tau(p^4) = conj(eta(p^4)) tau(p^8) + conj(eta(p^2)) tau(p^4) + 1

gives sum_l y_l tau(l) + y_const.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .arith import primes_between


def sgn(v: complex) -> complex:
    a = abs(v)
    return 1 + 0j if a == 0 else v / a


def _p_part(ell: int, p: int) -> int:
    e = 0
    while ell % p == 0:
        ell //= p
        e += 1
    return e


def relation_expand(l1: int, l2: int, p1: int, p2: int, eta) -> list[tuple[complex, int]]:
    """conj(tau(l1)) tau(l2) as [(coefficient, l)], l = 1 meaning the constant."""
    if p1 != p2:
        return [(eta(l1).conjugate(), l1 * l2)]
    p = p1
    e1, e2 = _p_part(l1, p), _p_part(l2, p)
    h2, h4 = eta(p**2).conjugate(), eta(p**4).conjugate()
    if (e1, e2) == (2, 2):
        return [(h2, p**4), (1, 1)]
    if (e1, e2) == (2, 4):
        return [(h2, p**6), (1, p**2)]
    if (e1, e2) == (4, 2):
        return [(h4, p**6), (h2, p**2)]
    if (e1, e2) == (4, 4):
        return [(h4, p**8), (h2, p**4), (1, 1)]
    raise ValueError("unexpected pair (%d, %d)" % (l1, l2))


@dataclass
class AmplifierWeights:
    Lam: float
    N: int
    primes: list
    P2: list
    P4: list
    x: dict
    y: dict
    y_const: complex
    degenerate: bool = False

    def support(self):
        return sorted(self.x)

    def to_json(self) -> dict:
        def c(v):
            return [float(complex(v).real), float(complex(v).imag)]
        return {"Lambda": self.Lam, "N": self.N, "primes": self.primes,
                "x": {str(k): c(v) for k, v in sorted(self.x.items())},
                "y": {str(k): c(v) for k, v in sorted(self.y.items())},
                "y_const": c(self.y_const)}

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def amplifier_primes(Lam: float, N: int) -> list[int]:
    """Primes in [Lam, 2 Lam] coprime to 4N."""
    if Lam < 2:
        raise ValueError("Lambda must be >= 2")
    return [p for p in primes_between(Lam, 2 * Lam) if (4 * N) % p]


def build_amplifier(taus: dict, Lam: float, N: int, eta=None) -> AmplifierWeights:
    if eta is None:
        def eta(n):
            return 1 + 0j if math.gcd(n, 4 * N) == 1 else 0j
    ps = amplifier_primes(Lam, N)
    P2 = [p * p for p in ps]
    P4 = [p**4 for p in ps]
    x = {}
    owner = {}
    for p in ps:
        for ell in (p * p, p**4):
            if ell not in taus:
                raise KeyError("missing tau value for l = %d" % ell)
            x[ell] = sgn(complex(taus[ell]))
            owner[ell] = p
    y: dict[int, complex] = {}
    const = 0j
    for l1 in x:
        for l2 in x:
            w = x[l1] * x[l2].conjugate()
            for c, ell in relation_expand(l1, l2, owner[l1], owner[l2], eta):
                if ell == 1:
                    const += w * c
                else:
                    y[ell] = y.get(ell, 0j) + w * c
    return AmplifierWeights(Lam, N, ps, P2, P4, x, y, const, degenerate=not ps)


def amplifier_value(w: AmplifierWeights, tau) -> complex:
    """sum_l y_l tau(l) + y_const for an eigenvalue system tau: l -> value."""
    return sum(c * tau(ell) for ell, c in w.y.items()) + w.y_const


def amplified_square(w: AmplifierWeights, tau) -> float:
    """|sum_l conj(x_l) tau(l)|^2."""
    s = sum(xv.conjugate() * tau(ell) for ell, xv in w.x.items())
    return abs(s) ** 2


def amplifier_length_bound(taus: dict, Lam: float, N: int, eta=None, tol: float = 1e-9):
    """Return (S, bound, degenerate) with S = sum |tau(l)| over P2 and P4.

    Each prime contributes at least 1/2 because tau(p^2)^2 - tau(p^4) is a
    unit; refuses to certify if that relation fails.
    """
    if eta is None:
        def eta(n):
            return 1 + 0j if math.gcd(n, 4 * N) == 1 else 0j
    ps = amplifier_primes(Lam, N)
    S = 0.0
    for p in ps:
        t2, t4 = complex(taus[p * p]), complex(taus[p**4])
        if abs(t2 * t2 - t4 - eta(p * p)) > tol:
            raise ValueError("relation tau(p^2)^2 - tau(p^4) = eta(p^2) fails at p = %d" % p)
        S += abs(t2) + abs(t4)
    bound = 0.5 * len(ps)
    assert S >= bound - tol
    return S, bound, not ps


def partition_Li(w: AmplifierWeights) -> dict[int, list[int]]:
    """Sort supp(y) by total prime exponent: L_i has Lam^i <= l <= 2^i Lam^i."""
    out = {0: [1], 2: [], 4: [], 6: [], 8: []}
    for ell in sorted(w.y):
        e = 0
        rest = ell
        for p in w.primes:
            k = _p_part(rest, p)
            rest //= p**k
            e += k
        if rest != 1 or e not in out:
            raise ValueError("cannot classify l = %d" % ell)
        if not (w.Lam**e * (1 - 1e-12) <= ell <= (2 * w.Lam) ** e * (1 + 1e-12)):
            raise ValueError("l = %d outside the range of L_%d" % (ell, e))
        out[e].append(ell)
    return out


def synthetic_system(primes, eta, rng, top: int = 8):
    """A random eigenvalue system obeying the relations exactly.

    tau(p^2) = s sqrt(eta(p^2)) with s real; higher powers by
    tau(p^(2j+2)) = tau(p^2) tau(p^(2j)) - eta(p^2) tau(p^(2j-2)); products
    over distinct primes multiply.
    """
    table = {}
    for p in primes:
        e2 = complex(eta(p * p))
        t2 = rng.uniform(-2.5, 2.5) * e2 ** 0.5
        seq = [1 + 0j, t2]
        while 2 * len(seq) <= top:
            seq.append(t2 * seq[-1] - e2 * seq[-2])
        table[p] = seq

    def tau(ell: int) -> complex:
        v = 1 + 0j
        for p in primes:
            k = _p_part(ell, p)
            if k:
                if k % 2:
                    return 0j
                v *= table[p][k // 2]
                ell //= p**k
        if ell != 1:
            raise KeyError(ell)
        return v

    return tau
