"""Point-pair invariants, the Selberg transform and the automorphic kernel.

K(z, w) = sum_{g in Gamma_0(4N)} eta(g) J(g, w)^(2k) ((z, gw))^k k(u(z, gw))

with ((z, w))^k = ((w - conj z)/|w - conj z|)^k on the principal branch.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .arith import GroupElement, cocycle_J
from .latcount import count_matrices


@dataclass(frozen=True)
class PointPairInvariant:
    """k(u) = exp(-u/scale) ("gaussian") or (1 - u/scale)^3 for u < scale ("bump")."""
    kind: str
    scale: float

    def __post_init__(self):
        if self.kind not in ("gaussian", "bump", "zero"):
            raise ValueError("unknown profile %r" % self.kind)
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "gaussian":
            out = np.exp(-u / self.scale)
        elif self.kind == "bump":
            out = np.where(u < self.scale, np.clip(1 - u / self.scale, 0, None) ** 3, 0.0)
        else:
            out = np.zeros_like(u)
        return float(out) if out.ndim == 0 else out

    @property
    def support(self) -> float | None:
        """Radius in u beyond which k vanishes, if any."""
        if self.kind == "bump":
            return self.scale
        if self.kind == "zero":
            return 0.0
        return None

    def sup_beyond(self, U: float) -> float:
        """Decay certificate: sup_{u >= U} k(u)."""
        if self.kind == "gaussian":
            return math.exp(-U / self.scale)
        if self.kind == "bump":
            return max(0.0, 1 - U / self.scale) ** 3
        return 0.0

    def cutoff(self, eps: float = 1e-17) -> float:
        """U with k(u) <= eps for u >= U."""
        if self.kind == "gaussian":
            return self.scale * math.log(1 / eps)
        return self.support

    def scaled(self, factor: float) -> "ScaledInvariant":
        return ScaledInvariant(self, factor)


@dataclass(frozen=True)
class ScaledInvariant:
    base: PointPairInvariant
    factor: float

    def __call__(self, u):
        return self.factor * self.base(u)

    @property
    def support(self):
        return self.base.support

    def cutoff(self, eps: float = 1e-17):
        return self.base.cutoff(eps)

    def sup_beyond(self, U):
        return self.factor * self.base.sup_beyond(U)


def phase_factor(z: complex, w: complex, kappa: float) -> complex:
    """((z, w))^kappa = ((w - conj z)/|w - conj z|)^kappa, principal branch."""
    v = w - z.conjugate()
    return cmath.exp(1j * kappa * cmath.phase(v))


def phase_equivariance_residual(g: GroupElement, z: complex, w: complex, kappa: float) -> float:
    """|((gz, gw))^k - ((z, w))^k exp(ik(arg(cz+d) - arg(cw+d)))|.

    From gw - conj(gz) = (w - conj z)/((cw+d)(c conj z+d)); all arguments stay
    in (0, pi) so no branch correction appears.
    """
    lhs = phase_factor(g(z), g(w), kappa)
    alpha = cmath.phase(g.c * z + g.d) - cmath.phase(g.c * w + g.d)
    return abs(lhs - phase_factor(z, w, kappa) * cmath.exp(1j * kappa * alpha))


# ----------------------------------------------------------- Selberg pair

def selberg_h(k, t: float, z: complex = 1j, tol: float = 1e-10) -> float:
    """h(t) from h(t) Im(z)^(1/2+it) = int k(u(z, w)) Im(w)^(1/2+it) dmu(w).

    The x-integral is done first (it depends only on v = Im w), then the
    v-integral in the variable s = log v.  Both with adaptive quadrature.
    """
    U = k.cutoff(1e-18)
    if U == 0:
        return 0.0
    y = z.imag
    # u(z, w) <= U  <=>  (x - x0)^2 + (v - y)^2 <= 4 U y v
    r = U + U * U
    vlo = y * (1 + 2 * U - 2 * math.sqrt(r))
    vhi = y * (1 + 2 * U + 2 * math.sqrt(r))

    def inner(v):
        half2 = 4 * U * y * v - (v - y) ** 2
        if half2 <= 0:
            return 0.0
        half = math.sqrt(half2)

        def f(dx):
            return float(k((dx * dx + (v - y) ** 2) / (4 * y * v)))
        val, err = integrate.quad(f, 0, half, epsabs=tol, epsrel=tol, limit=200)
        return 2 * val

    def outer(s, part):
        v = math.exp(s)
        # dmu = dx dv / v^2, v^(1/2+it) dv = v^(3/2+it) ds
        ph = (s - math.log(y)) * t
        w = math.cos(ph) if part == 0 else math.sin(ph)
        return inner(v) * v ** -0.5 * w / math.sqrt(y)

    a, b = math.log(max(vlo, 1e-300)), math.log(vhi)
    re, err = integrate.quad(outer, a, b, args=(0,), epsabs=tol, epsrel=tol, limit=200)
    if err > 1e3 * tol + 1e-8 * abs(re):
        raise ArithmeticError("selberg_h quadrature reached only %.3g" % err)
    return re


def selberg_h_abel(k, t: float) -> float:
    """Same transform by the Abel route: Q(v) = int_v^inf k(u)(u - v)^(-1/2) du,
    g(r) = 2 Q(sinh^2(r/2)), h(t) = int g(r) e^(irt) dr.  Used as an oracle."""
    U = k.cutoff(1e-18)

    def Q(v):
        if v >= U:
            return 0.0
        val, _ = integrate.quad(lambda s: float(k(v + s * s)) * 2, 0, math.sqrt(U - v),
                                epsabs=1e-13, epsrel=1e-12, limit=200)
        return val

    R = 2 * math.asinh(math.sqrt(U))
    val, _ = integrate.quad(lambda r: 2 * Q(math.sinh(r / 2) ** 2) * math.cos(r * t) * 2, 0, R,
                            epsabs=1e-12, epsrel=1e-11, limit=200)
    return val


# ----------------------------------------------------------- kernel sum

@dataclass
class KernelSum:
    value: complex
    terms: int
    U: float
    tail_bound: float


def _terms(z, w, N, kappa, k, U, eta):
    _, mats = count_matrices(z, 1, 4 * N, U, listing=True, w=w)
    total = 0j
    for a, b, c, d in mats:
        g = GroupElement(a, b, c, d)
        gw = g(w)
        u = abs(z - gw) ** 2 / (4 * z.imag * gw.imag)
        chi = 1 if eta is None else eta(d)
        total += chi * cocycle_J(g, w) ** round(2 * kappa) * phase_factor(z, gw, kappa) * k(u)
    return total, len(mats)


def kernel_sum_K(z: complex, w: complex, N: int, kappa: float, k, eta=None,
                 U: float | None = None, tol: float = 1e-8) -> KernelSum:
    """Truncated K(z, w): all g in Gamma_0(4N) with u(z, gw) <= U.

    The tail is zero for compactly supported k.  Otherwise it is bounded by
    sum_j n(U + j + 1) sup_{u >= U + j} k(u) where n(X) is the number of g
    with u <= X, estimated from the count at U by linear growth with a
    factor-2 safety margin.
    """
    sup = k.support
    if U is None:
        U = sup if sup is not None else k.cutoff(tol * 1e-3)
    total, n = _terms(z, w, N, kappa, k, U, eta)
    if sup is not None and U >= sup:
        tail = 0.0
    else:
        rate = 2 * max(n, 1) / (1 + U)
        tail = sum(rate * (U + j + 2) * k.sup_beyond(U + j) for j in range(200))
        if tail > tol:
            raise ArithmeticError("tail bound %.3g above tolerance; try U > %.3g" % (tail, 2 * U))
    return KernelSum(total, n, U, tail)


# ------------------------------------------------------- geometric side

@dataclass
class GeometricSide:
    value: float
    partial: bool
    skipped: list
    per_ell: dict


def geometric_side_R(z: complex, weights, N: int, k, modulus: int | None = None,
                     budget: float = 5e6) -> GeometricSide:
    """sum_l |y_l|/sqrt(l) sum_{g in M(z, l, N')} |k(u(gz, z))|, N' = 2N by default.

    Each l costs roughly pi S l/(y N') candidate pairs; terms above the
    budget are skipped and the result is flagged partial.
    """
    Np = 2 * N if modulus is None else modulus
    U = k.cutoff(1e-17) if k.support is None else k.support
    ys = dict(weights.y)
    if weights.y_const:
        ys[1] = ys.get(1, 0) + weights.y_const
    total = 0.0
    skipped = []
    per = {}
    for ell in sorted(ys):
        c = abs(ys[ell])
        if c == 0:
            continue
        cost = math.pi * 2 * (2 * U + 1) * ell / (z.imag * Np)
        if cost > budget:
            skipped.append(ell)
            continue
        _, mats = count_matrices(z, ell, Np, U, listing=True)
        s = 0.0
        for a, b, cc, d in mats:
            gz = (a * z + b) / (cc * z + d)
            s += abs(k(abs(gz - z) ** 2 / (4 * gz.imag * z.imag)))
        per[ell] = c / math.sqrt(ell) * s
        total += per[ell]
    return GeometricSide(total, bool(skipped), skipped, per)
