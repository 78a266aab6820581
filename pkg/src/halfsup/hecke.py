"""Hecke operators T(p^2) on half-integral weight q-expansions.

Two independent routes:
  * `hecke_T`: the exact coefficient formula for T(p^2),
        b(n) = a(p^2 n) + eta(p) ((-1)^lam n / p) p^(lam-1) a(n) + eta(p^2) p^(2 lam - 1) a(n/p^2)
    with kappa = lam + 1/2;
  * `hecke_T_cosets`: the metaplectic double coset operator for
    Gamma_0(M) diag(1, m) Gamma_0(M), computed numerically from explicit
    coset representatives.  For m = p^4 this is the operator whose sum with
    eta(p^2) p^(2 kappa - 3) Id gives the Hecke algebra element T(p^4).
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import (GroupElement, ext_gcd, factorize, is_prime, kronecker_symbol,
                    theta_multiplier)
from .qexp import QExpansion


def coset_reps(ell: int, M: int) -> list[GroupElement]:
    """[[a, b], [0, d]] with ad = ell, 0 <= b < d, gcd(a, b, d) = 1."""
    if ell < 1:
        raise ValueError("ell must be positive")
    if math.gcd(ell, M) != 1:
        raise ValueError("gcd(ell, level) > 1 is not supported")
    out = []
    for a in range(1, ell + 1):
        if ell % a:
            continue
        d = ell // a
        for b in range(d):
            if math.gcd(math.gcd(a, b), d) == 1:
                out.append(GroupElement(a, b, 0, d))
    return out


def _check_prime(p: int, f: QExpansion):
    if not is_prime(p):
        raise ValueError("%d is not prime" % p)
    if f.level % p == 0:
        raise ValueError("p = %d divides the level %d: unsupported" % (p, f.level))


def _real_char(chi, n: int) -> int:
    v = chi(n)
    if abs(v.imag) > 1e-12 or abs(abs(v.real) - 1) > 1e-12:
        raise ValueError("exact Hecke formula needs a real character value at %d" % n)
    return int(round(v.real))


def hecke_T(f: QExpansion, p: int) -> QExpansion:
    """T(p^2) f by the exact coefficient formula (integer offsets only)."""
    _check_prime(p, f)
    if f.offset.denominator != 1:
        raise ValueError("hecke_T needs an integer offset")
    if f.weight_num % 2 == 0:
        raise ValueError("hecke_T is for half-integral weight")
    lam = (f.weight_num - 1) // 2
    o = int(f.offset)
    P = f.precision
    p2 = p * p
    e1 = _real_char(f.character, p)
    e2 = e1 * e1
    mid = Fraction(e1) * Fraction(p) ** (lam - 1)
    last = Fraction(e2) * Fraction(p) ** (2 * lam - 1)
    sgn = -1 if lam % 2 else 1

    def a(t):  # coefficient at total exponent t (t < o + P assumed)
        return f.coeffs[t - o] if t >= o else Fraction(0)

    start = -(-o // p2)
    stop = -(-(o + P) // p2)   # t < (o + P)/p^2
    out = []
    for t in range(start, stop):
        v = a(p2 * t)
        if t >= o:
            k = kronecker_symbol(sgn * t, p)
            if k:
                v += k * mid * a(t)
        if t % p2 == 0 and t // p2 >= o:
            v += last * a(t // p2)
        out.append(v)
    return QExpansion(Fraction(start), tuple(out), f.weight_num, f.level, f.character,
                      name=f.name)


def hecke_operator(f: QExpansion, ell: int) -> QExpansion:
    """T(ell): zero unless ell is a square; prime squares use the formula."""
    r = math.isqrt(ell)
    if r * r != ell:
        return f.with_coeffs([0] * f.precision)
    if ell == 1:
        return f
    if is_prime(r):
        return hecke_T(f, r)
    out = f
    for q, e in factorize(r).items():
        if e != 1:
            raise ValueError("only squarefree square roots are supported by the formula route")
        out = hecke_T(out, q)
    return out


# ------------------------------------------------------- double cosets

def _decompose(a: int, b: int, d: int, M: int):
    """alpha = [[a, b], [0, d]] = g1 diag(1, m) g2 with g1, g2 in Gamma_0(M)."""
    m = a * d
    r = M * d
    t = 0
    while True:
        s = -M * b + a * t
        if math.gcd(s, r) == 1:
            break
        t += 1
    g, x, y = ext_gcd(s, r)
    p_, q_ = x, -y              # p s - q r = 1
    g1 = GroupElement(s, -q_, -r, p_)
    ginv = GroupElement(p_, q_, r, s)
    beta = ginv @ GroupElement(a, b, 0, d)
    assert beta.c % (M * m) == 0 and beta.d % m == 0
    g2 = GroupElement(beta.a, beta.b, beta.c // m, beta.d // m)
    assert g2.det == 1 and g2.c % M == 0
    return g1, g2


def _phase(a, b, d, M):
    """Unit u with phi_alpha = u * sqrt(d / sqrt(m)), phi the lifted factor."""
    m = a * d
    g1, g2 = _decompose(a, b, d, M)
    z = 1j
    w = g2(z)
    phi = theta_multiplier(g1, w / m) * m ** 0.25 * theta_multiplier(g2, z)
    u = phi / math.sqrt(d / math.sqrt(m))
    units = (1, 1j, -1, -1j)
    k = min(range(4), key=lambda i: abs(u - units[i]))
    if abs(u - units[k]) > 1e-6:
        raise ArithmeticError("metaplectic phase did not snap: %r" % u)
    return units[k]


@dataclass
class CosetOperator:
    m: int
    level: int
    reps: list          # (a, b, d, unit)


def coset_operator(m: int, level: int) -> CosetOperator:
    reps = []
    for g in coset_reps(m, level):
        reps.append((g.a, g.b, g.d, _phase(g.a, g.b, g.d, level)))
    return CosetOperator(m, level, reps)


def hecke_T_cosets(f: QExpansion, m: int, exponents=None, op: CosetOperator | None = None):
    """Coefficients of the double coset operator diag(1, m) applied to f.

    (T f)(z) = m^(k/4 - 1) sum_alpha eta(a) phi_alpha^(-k) f(alpha z), k = weight_num.
    Returns {t: complex coefficient} for the requested total exponents t.
    """
    if f.offset.denominator != 1:
        raise ValueError("integer offsets only")
    if op is None:
        op = coset_operator(m, f.level)
    k = f.weight_num
    o = int(f.offset)
    if exponents is None:
        exponents = [t for t in range(max(o, 1), o + f.precision) if t * m < o + f.precision]
    out = {}
    pre = m ** (k / 4 - 1)
    for t in exponents:
        s = 0j
        for a, b, d, u in op.reps:
            if (t * d) % a:
                continue
            n = t * d // a
            if n < o:
                continue
            if n - o >= f.precision:
                raise ValueError("precision too low for exponent %d of T(%d)" % (t, m))
            c = f.coeffs[n - o]
            if not c:
                continue
            phi_k = u ** (-k) * (d / math.sqrt(m)) ** (-k / 2)
            s += f.character(a) * phi_k * float(c) * cmath.exp(2j * math.pi * (n * b % d) / d)
        out[t] = s * pre
    return out


# ----------------------------------------------------------- eigenvalues

@dataclass
class EigenvalueRecord:
    p: int
    tau_p2: complex
    tau_p4: complex
    eta_p2: complex
    lam_p2: complex
    lam_p4: complex
    residuals: dict = field(default_factory=dict)
    is_eigen: bool = True
    method: str = "cosets"
    tau_p4_double_coset: complex | None = None


def _proportionality(g: dict, f: dict):
    """Least-squares c with g = c f, and the relative residual."""
    keys = [t for t in g if t in f]
    fv = np.array([complex(f[t]) for t in keys])
    gv = np.array([complex(g[t]) for t in keys])
    nf = np.vdot(fv, fv)
    if abs(nf) == 0:
        raise ValueError("f vanishes on the shared coefficients")
    c = np.vdot(fv, gv) / nf
    res = float(np.max(np.abs(gv - c * fv)) / np.max(np.abs(fv)))
    return complex(c), res


def eigenvalue_exact(f: QExpansion, p: int):
    """lambda(p^2) as an exact rational when T(p^2) f is proportional to f."""
    g = hecke_T(f, p)
    o = int(f.offset)
    shared = [t for t in range(int(g.offset), int(g.offset) + g.precision)
              if o <= t < o + f.precision]
    lam = None
    for t in shared:
        if f.coeffs[t - o]:
            lam = g.coeffs[t - int(g.offset)] / f.coeffs[t - o]
            break
    if lam is None:
        raise ValueError("f vanishes on the coefficients shared with T(p^2) f")
    worst = Fraction(0)
    scale = max(abs(c) for c in f.coeffs)
    for t in shared:
        diff = abs(g.coeffs[t - int(g.offset)] - lam * f.coeffs[t - o])
        worst = max(worst, diff)
    return lam, float(worst / scale)


def eigenvalue_tau(f: QExpansion, p: int, tol: float = 1e-9,
                   method: str = "cosets") -> EigenvalueRecord:
    """Normalised eigenvalues tau(p^2), tau(p^4) with tau(l) = lambda(l)/l^((kappa-1)/2).

    method "cosets": lambda(p^4) from the degree-p^4 double coset operator
    plus eta(p^2) p^(2 kappa - 3), an independent computation.
    method "relation": tau(p^4) := tau(p^2)^2 - eta(p^2) (no check possible).
    """
    _check_prime(p, f)
    kappa = f.weight_num / 2
    lam2, res2 = eigenvalue_exact(f, p)
    eta2 = f.character(p * p)
    tau2 = complex(float(lam2)) / p ** (kappa - 1)
    residuals = {"p2": res2}
    rec_method = method
    dc = None
    if method == "relation":
        tau4 = tau2 * tau2 - eta2
        lam4 = tau4 * p ** (2 * (kappa - 1))
    elif method == "cosets":
        m = p**4
        o = int(f.offset)
        ts = [t for t in range(max(o, 1), o + f.precision) if t * m < o + f.precision]
        if not ts:
            raise ValueError("precision %d too low for T(p^4) at p=%d (need > %d)"
                             % (f.precision, p, m + o))
        g = hecke_T_cosets(f, m, ts)
        fd = {t: f.coeffs[t - o] for t in ts}
        lam_dc, res4 = _proportionality(g, fd)
        lam4 = lam_dc + eta2 * p ** (2 * kappa - 3)
        tau4 = lam4 / p ** (2 * (kappa - 1))
        dc = lam_dc / p ** (2 * (kappa - 1))
        residuals["p4"] = res4
    else:
        raise ValueError("unknown method %r" % method)
    eig = all(r <= tol for r in residuals.values())
    return EigenvalueRecord(p, tau2, complex(tau4), eta2, complex(float(lam2)), complex(lam4),
                            residuals, eig, rec_method, dc)


def tau_product(f: QExpansion, p: int, q: int) -> complex:
    """tau(p^2 q^2) from the double coset operator of degree p^2 q^2."""
    m = (p * q) ** 2
    o = int(f.offset)
    ts = [t for t in range(max(o, 1), o + f.precision) if t * m < o + f.precision and f.coeffs[t - o]]
    if not ts:
        raise ValueError("precision too low for T(%d)" % m)
    g = hecke_T_cosets(f, m, ts)
    lam, _ = _proportionality(g, {t: f.coeffs[t - o] for t in ts})
    kappa = f.weight_num / 2
    return lam / (p * q) ** (kappa - 1)


# ------------------------------------------------------ relation checks

@dataclass
class RelationReport:
    passed: bool
    checks: list = field(default_factory=list)   # (name, args, residual, ok)

    @property
    def failures(self):
        return [c for c in self.checks if not c[3]]


def verify_hecke_relations(recs, eta=None, products=None, tol: float = 1e-9) -> RelationReport:
    """Check the relations used by the amplifier.

    (i)   conj(tau(p^2)) tau(q^2) = conj(eta(p^2)) tau(p^2 q^2)   [needs `products`]
    (ii)  tau(p^2)^2 - tau(p^4) = eta(p^2)
    (iii) max(|tau(p^2)|, |tau(p^4)|) >= 1/2
    plus conj(lambda(p^2)) = conj(eta(p^2)) lambda(p^2).
    """
    checks = []

    def ev(p):
        if eta is None:
            return recs_by[p].eta_p2
        return eta(p * p)

    recs_by = {r.p: r for r in recs}
    for r in recs:
        e = ev(r.p)
        res = abs(r.tau_p2 ** 2 - r.tau_p4 - e)
        checks.append(("identity (ii)", (r.p,), res, res <= tol))
        m = max(abs(r.tau_p2), abs(r.tau_p4))
        checks.append(("identity (iii)", (r.p,), m, m >= 0.5 - tol))
        adj = abs(r.tau_p2.conjugate() - e.conjugate() * r.tau_p2)
        checks.append(("adjoint", (r.p,), adj, adj <= tol))
    for (p, q), tpq in (products or {}).items():
        lhs = recs_by[p].tau_p2.conjugate() * recs_by[q].tau_p2
        rhs = ev(p).conjugate() * tpq
        res = abs(lhs - rhs)
        checks.append(("identity (i)", (p, q), res, res <= tol * max(1, abs(lhs))))
    return RelationReport(all(c[3] for c in checks), checks)


def records_to_csv(recs, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "re_tau_p2", "im_tau_p2", "re_tau_p4", "im_tau_p4",
                    "residual_p2", "residual_p4"])
        for r in recs:
            w.writerow([r.p, "%.15g" % r.tau_p2.real, "%.15g" % r.tau_p2.imag,
                        "%.15g" % r.tau_p4.real, "%.15g" % r.tau_p4.imag,
                        "%.3g" % r.residuals.get("p2", 0.0), "%.3g" % r.residuals.get("p4", 0.0)])
