"""Upper half plane helpers and reduction into the set F(2N).

F(2N) is the set of points whose imaginary part is maximal in their orbit
under A_0(2N), the group generated by Gamma_0(2N), the W(Q) for Q | N and
W(2).  Such points satisfy Im z >= sqrt(3)/(4N) and |cz+d|^2 >= 1/(2N).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import (GroupElement, IDENTITY, _check_level, divisors, ext_gcd,
                    normalizer_decompose)

MARGIN = 1e-12


def uhp(z) -> complex:
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("point must lie in the upper half plane: %r" % z)
    return z


def parse_point(s: str) -> complex:
    """Parse "x+yi" (also accepts a trailing j)."""
    t = s.strip().replace(" ", "").replace("i", "j")
    if t.endswith("j") and not any(ch.isdigit() for ch in t[-2:-1]):
        t = t[:-1] + "1j"
    return uhp(complex(t))


def u_distance(z, w):
    """|z - w|^2 / (4 Im z Im w); cosh d(z, w) = 2u + 1."""
    return abs(z - w) ** 2 / (4 * np.imag(z) * np.imag(w))


def hyperbolic_distance(z, w):
    return np.arccosh(1 + 2 * u_distance(z, w))


def mobius_apply(g: GroupElement, z):
    return (g.a * z + g.b) / (g.c * z + g.d)


# --------------------------------------------------------- fundamental set

@dataclass
class MembershipReport:
    inside: bool
    witness: tuple | None   # (c, d) violating pair, or ("im", bound)
    min_value: float        # min over checked (c, d) of |cz+d|^2


def in_fundamental_set(z: complex, N: int, margin: float = MARGIN) -> MembershipReport:
    """Check Im z >= sqrt(3)/(4N) and |cz+d|^2 >= 1/(2N) for all (c, d) != 0.

    For |c| > 1/(y sqrt(2N)) the second inequality holds automatically, and
    for fixed c the minimum over d is attained at one of the two integers
    next to -cx, so the check is a finite loop.
    """
    x, y = z.real, z.imag
    bound = 1 / (2 * N)
    if y < math.sqrt(3) / (4 * N) - margin:
        return MembershipReport(False, ("im", math.sqrt(3) / (4 * N)), y * y)
    cmax = int(math.floor(1 / (y * math.sqrt(2 * N)) + 1e-9))
    best = (math.inf, None)
    for c in range(0, cmax + 1):
        ds = {math.floor(-c * x), math.floor(-c * x) + 1} if c else {1}
        for d in ds:
            if c == 0 and d == 0:
                continue
            v = (c * x + d) ** 2 + (c * y) ** 2
            if v < best[0]:
                best = (v, (c, d))
    if best[0] < bound - margin:
        return MembershipReport(False, best[1], best[0])
    return MembershipReport(True, None, best[0])


# -------------------------------------------------------------- reduction

@dataclass
class ReductionResult:
    z: complex
    delta: GroupElement
    trace: list = field(default_factory=list)
    decomposition: tuple | None = None
    report: MembershipReport | None = None


def _best_move(z: complex, N: int):
    """Element delta of A_0(2N) maximising Im(delta z).

    delta = [[Q x, y], [2N z', Q w]] with det Q for Q | 2N; Im(delta z) is
    Q Im z / |2N z' z + Q w|^2, so only bottom rows with
    |2N z' z + Q w|^2 < Q can beat the identity.  All such rows are
    enumerated; ties keep the current point.
    """
    M = 2 * N
    x, y = z.real, z.imag
    best = (1.0, None)  # ratio Im(delta z)/Im z, row data
    for Q in divisors(M):
        if math.gcd(Q, M // Q) != 1:
            continue
        rq = math.sqrt(Q)
        zmax = int(math.floor(rq / (M * y) + 1e-9))
        for zz in range(-zmax, zmax + 1):
            cx = M * zz * x
            lo = math.ceil((-cx - rq) / Q - 1e-9)
            hi = math.floor((-cx + rq) / Q + 1e-9)
            for w in range(lo, hi + 1):
                if zz == 0 and Q * abs(w) != 1:
                    continue
                if math.gcd(Q * w, (M // Q) * zz) != 1:
                    continue
                den = (cx + Q * w) ** 2 + (M * zz * y) ** 2
                r = Q / den
                if r > best[0] * (1 + MARGIN):
                    best = (r, (Q, zz, w))
    if best[1] is None:
        return None
    Q, zz, w = best[1]
    # solve Q x w - (M/Q) y zz = 1
    g, a, b = ext_gcd(Q * w, (M // Q) * zz)
    assert g == 1
    xx, yy = a, -b
    delta = GroupElement(Q * xx, yy, M * zz, Q * w)
    assert delta.det == Q
    return delta, best[0]


def reduce_to_F(z, N: int, max_moves: int = 10_000) -> ReductionResult:
    """Move z into F(2N) by an element of A_0(2N).

    One exhaustive search over bottom rows gives the global maximum of Im in
    the orbit; it is repeated until no move improves Im (normally one round),
    then x is translated into [-1/2, 1/2).
    """
    _check_level(N)
    z = uhp(z)
    total = IDENTITY
    trace = []
    for _ in range(max_moves):
        mv = _best_move(z, N)
        if mv is None:
            break
        delta, ratio = mv
        z = mobius_apply(delta, z)
        total = delta @ total
        trace.append(("move", delta.tuple(), ratio))
    else:
        raise RuntimeError("reduction did not terminate; trace=%r" % trace[-5:])
    k = -math.floor(z.real + 0.5)
    if k:
        z = z + k
        total = GroupElement(1, k, 0, 1) @ total
        trace.append(("translate", k))
    total, _ = total.primitive()
    rep = in_fundamental_set(z, N)
    if not rep.inside:
        raise AssertionError("reduced point %r violates F(2N): %r" % (z, rep.witness))
    dec = normalizer_decompose(total, N)
    return ReductionResult(z, total, trace, dec[1:4], rep)


# ---------------------------------------------------------------- Laplacian

def laplacian_eigencheck(F, kappa: float, z: complex, h: float = 1e-4) -> float:
    """Relative residual of Delta_k F - s(1-s) F at z, s = kappa/2.

    Delta_k = -y^2 (d_xx + d_yy) + i k y d_x, central differences with step h.
    """
    kappa = float(kappa)
    s = kappa / 2
    f0 = F(z)
    fxp, fxm = F(z + h), F(z - h)
    fyp, fym = F(z + 1j * h), F(z - 1j * h)
    y = z.imag
    fxx = (fxp - 2 * f0 + fxm) / h**2
    fyy = (fyp - 2 * f0 + fym) / h**2
    fx = (fxp - fxm) / (2 * h)
    lap = -y * y * (fxx + fyy) + 1j * kappa * y * fx
    r = abs(lap - s * (1 - s) * f0)
    if abs(f0) < 1e-300:
        return r
    return r / abs(f0)
