"""Sup norms, L2 norms and the level scan for F = y^(k/2) f.

Values near the cusp at infinity come from the q-expansion with an explicit
tail bound.  For eta products F can be evaluated anywhere: for each factor
Im(w)^(1/4)|eta(w)| is invariant under SL2(Z), so it is computed after
moving w into the standard fundamental domain.  This gives the L2 norm by
quadrature over coset representatives and the sup over all of the
quotient, not only over the strip near infinity.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .arith import gamma0_coset_reps, gamma0_index, volume
from .qexp import QExpansion

EPS = np.finfo(float).eps


# ------------------------------------------------------ truncated series

def _coeff_arrays(f: QExpansion):
    idx, val = f._sparse
    m = idx + float(f.offset)
    keep = m > 0
    return m[keep], val[keep], m, val


def coefficient_constant(f: QExpansion) -> float:
    """C_f = 2 max |a(m)|/m^(k/2) over the stored exponents m > 0."""
    m, a, _, _ = _coeff_arrays(f)
    if m.size == 0:
        return 0.0
    return 2 * float(np.max(np.abs(a) / m ** (float(f.kappa) / 2)))


def _tail_sum(s: float, a: float, M0: float) -> float:
    """Majorant of sum_{j >= 0} (M0 + j)^s exp(-a (M0 + j)) for M0 >= s/a."""
    g = M0 ** s * math.exp(-a * M0)
    integral = a ** (-(s + 1)) * special.gammaincc(s + 1, a * M0) * special.gamma(s + 1)
    return g + integral


def tail_bound(f: QExpansion, y: float) -> float:
    """Bound for y^(k/2) |sum over omitted exponents|; inf below the floor."""
    s = float(f.kappa) / 2
    a = 2 * math.pi * y
    M0 = f.precision + float(f.offset)
    if M0 < s / a:
        return math.inf
    return y ** s * coefficient_constant(f) * _tail_sum(s, a, M0)


def evaluation_floor(f: QExpansion, tol: float = 1e-10) -> float:
    """Smallest y with tail_bound(f, y) <= tol (found by bisection)."""
    if coefficient_constant(f) == 0:
        return 0.0
    lo, hi = 1e-8, 1.0
    while tail_bound(f, hi) > tol:
        hi *= 2
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        if tail_bound(f, mid) > tol:
            lo = mid
        else:
            hi = mid
    return hi


def _rounding_bound(f, x, y):
    _, _, m, a = _coeff_arrays(f)
    if m.size == 0:
        return 0.0
    w = np.abs(a) * np.exp(-2 * np.pi * m * y)
    per = f.offset.denominator
    xr = abs(((x + per / 2) % per) - per / 2)
    return 2 * EPS * float(np.sum(w * (2 * np.pi * m * (xr + y) + 2 * m.size + 10))) * y ** (float(f.kappa) / 2)


def evaluate_F(f: QExpansion, z: complex, tol: float = 1e-10):
    """(y^(k/2) |f(z)| from the stored coefficients, error bound).

    The bound covers the omitted tail (heuristic constant C_f) and floating
    point rounding.  Raises below the evaluation floor.
    """
    y = z.imag
    if f.is_zero():
        return 0.0, 0.0
    tb = tail_bound(f, y)
    if tb > tol:
        raise ValueError("Im z = %.4g is below the evaluation floor %.4g for precision %d"
                         % (y, evaluation_floor(f, tol), f.precision))
    v = abs(f.evaluate(z)) * y ** (float(f.kappa) / 2)
    return float(v), tb + _rounding_bound(f, z.real, y)


def F_values(f: QExpansion, z) -> np.ndarray:
    """Vectorised y^(k/2)|f(z)| by the truncated series (no checks)."""
    z = np.asarray(z, dtype=complex)
    return np.abs(f.evaluate(z)) * z.imag ** (float(f.kappa) / 2)


# ------------------------------------------------- eta products anywhere

def _reduce_sl2z(w: np.ndarray) -> np.ndarray:
    """Move points into the standard fundamental domain (vectorised)."""
    w = w.copy()
    for _ in range(500):
        w = w - np.round(w.real)
        inside = np.abs(w) >= 1 - 1e-14
        if inside.all():
            return w
        w = np.where(inside, w, -1 / w)
    raise RuntimeError("SL2(Z) reduction did not converge")


_PENT = [(k * (3 * k - 1) // 2, -1 if k % 2 else 1) for k in range(-8, 9)]


def log_eta_G(w: np.ndarray) -> np.ndarray:
    """log(Im(w)^(1/4) |eta(w)|), an SL2(Z)-invariant function."""
    w = _reduce_sl2z(np.asarray(w, dtype=complex))
    s = np.zeros_like(w)
    for e, c in _PENT:
        s = s + c * np.exp(2j * np.pi * e * w)
    return 0.25 * np.log(w.imag) - 2 * np.pi * w.imag / 24 + np.log(np.abs(s))


def eta_G(w: np.ndarray) -> np.ndarray:
    return np.exp(log_eta_G(w))


def _coset_images(g, z):
    a, b, c, d = g
    den = np.abs(c * z + d) ** 2
    re = ((a * z.real + b) * (c * z.real + d) + a * c * z.imag ** 2) / den
    return re + 1j * z.imag / den


def F_anywhere(f: QExpansion):
    """Vectorised z -> y^(k/2)|f(z)| valid on all of the upper half plane."""
    if f.eta_spec is None:
        raise ValueError("F_anywhere needs an eta product (eta_spec)")
    spec = f.eta_spec
    scale = abs(float(f.eta_scale))

    def F(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape)
        for m, r in spec:
            out += r * (log_eta_G(m * z) - 0.25 * math.log(m))
        return scale * np.exp(out)
    return F


# ----------------------------------------------------------- L2 norm

@dataclass
class L2Result:
    V_included: float
    V_excluded: float
    cosets: int
    Ymax: float
    resolution: int
    converged: bool = True
    change: float = 0.0


def _phi(F, reps, z):
    tot = np.zeros(z.shape)
    for g in reps:
        tot += F(_coset_images(g, z)) ** 2
    return tot


def _l2_once(F, reps, res: int, Ymax: float) -> float:
    nx = 16 * res
    xg, xw = np.polynomial.legendre.leggauss(nx)
    xs, xw = xg / 2, xw / 2
    ny = 12 * res
    yg, yw = np.polynomial.legendre.leggauss(ny)
    # region y in [sqrt(1 - x^2), 1]
    lo = np.sqrt(1 - xs ** 2)
    Y = lo[:, None] + (1 - lo[:, None]) * (yg[None, :] + 1) / 2
    W = xw[:, None] * ((1 - lo[:, None]) / 2) * yw[None, :] / Y ** 2
    Z = xs[:, None] + 1j * Y
    total = float(np.sum(W * _phi(F, reps, Z)))
    # region y in [1, Ymax] in s = log y
    smax = math.log(Ymax)
    panels = max(1, int(math.ceil(smax / 0.5)))
    edges = np.linspace(0, smax, panels + 1)
    sg, sw = np.polynomial.legendre.leggauss(ny)
    S = ((edges[:-1, None] + edges[1:, None]) / 2 + (edges[1:, None] - edges[:-1, None]) / 2 * sg[None, :]).ravel()
    SW = ((edges[1:, None] - edges[:-1, None]) / 2 * sw[None, :]).ravel()
    Yv = np.exp(S)
    Z = xs[:, None] + 1j * Yv[None, :]
    W = xw[:, None] * SW[None, :] / Yv[None, :]
    total += float(np.sum(W * _phi(F, reps, Z)))
    return total


def l2_norm(f: QExpansion, resolution: int = 1, check: bool = True, reps=None) -> L2Result:
    """||F||_2 by quadrature over g F_std for coset representatives g.

    Both conventions: V_included = sqrt((1/V) int |F|^2 dmu), V = (pi/3) psi(level),
    and V_excluded without the 1/V.  With check=True the quadrature is
    repeated at twice the resolution and the relative change reported.
    """
    if not f.is_cuspidal():
        raise ValueError("not a cusp form: the quadrature needs decay at every cusp")
    F = F_anywhere(f)
    if reps is None:
        reps = [g.tuple() for g in gamma0_coset_reps(f.level)]
    assert len(reps) == gamma0_index(f.level)
    # height where every cusp contribution is negligible
    peak = float(np.max(_phi(F, reps, np.array([0.0 + 1j, 0.5 + 1.2j, 0.25 + 2j]))))
    Y = 2.0
    while True:
        probe = np.array([x + 1j * Y for x in (-0.5, -0.25, 0.0, 0.25)])
        if float(np.max(_phi(F, reps, probe))) < 1e-18 * max(peak, 1e-300):
            break
        if Y > 1e6:
            raise ArithmeticError("no decay up to Im = 1e6: f is not cuspidal at some cusp")
        Y *= 1.5
    if peak == 0:
        return L2Result(0.0, 0.0, len(reps), Y, resolution)
    I1 = _l2_once(F, reps, resolution, Y)
    change = 0.0
    if check:
        I2 = _l2_once(F, reps, 2 * resolution, Y)
        change = abs(I2 - I1) / abs(I2)
        I1 = I2
    V = volume(f.level)
    return L2Result(math.sqrt(I1 / V), math.sqrt(I1), len(reps), Y, resolution,
                    change < 1e-6, change)


def l2_rankin_selberg(f: QExpansion, X: int | None = None) -> float:
    """V-included L2 norm from the residue of sum |A(n)|^2 n^-s at s = 1.

    With A(n) = a(n) n^((1-k)/2) the residue is (4 pi)^k/Gamma(k) ||F||^2;
    it is estimated by the Cesaro mean (2/X) sum_{n <= X} |A(n)|^2 (1 - n/X).
    """
    kappa = float(f.kappa)
    _, _, m, a = _coeff_arrays(f)
    if X is None:
        X = f.precision + float(f.offset) - 1
    keep = (m > 0) & (m <= X)
    A2 = a[keep] ** 2 * m[keep] ** (1 - kappa)
    res = 2 / X * float(np.sum(A2 * (1 - m[keep] / X)))
    return math.sqrt(res * math.gamma(kappa) / (4 * math.pi) ** kappa)


# ------------------------------------------------------------ sup search

@dataclass
class SupNormResult:
    form: str
    level: int
    sup_value: float
    argmax: complex
    l2_V_included: float
    l2_V_excluded: float
    grid: tuple
    depth: int
    region: str
    gap: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.level // 4

    @property
    def ratio(self) -> float:
        return self.sup_value / self.l2_V_included

    @property
    def ratio_V_excluded(self) -> float:
        return self.sup_value / self.l2_V_excluded


def y_top(f: QExpansion, share: float = 0.05) -> float:
    """Height above which the leading term dominates and F decreases."""
    m, a, _, _ = _coeff_arrays(f)
    if m.size == 0:
        return 1.0
    s = float(f.kappa) / 2
    m0, a0 = m[0], abs(a[0])
    ystar = s / (2 * math.pi * m0)

    def rest(y):
        return float(np.sum(np.abs(a[1:]) * (m[1:] / m0) ** s * np.exp(-2 * math.pi * (m[1:] - m0) * y))) / a0

    lo, hi = 1e-6, max(ystar, 1e-3)
    while rest(hi) > share:
        hi *= 2
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        if rest(mid) > share:
            lo = mid
        else:
            hi = mid
    return max(hi, ystar)


def _derivative_bound(f, y):
    m, a, _, _ = _coeff_arrays(f)
    s = float(f.kappa) / 2
    e = np.abs(a) * np.exp(-2 * np.pi * m * y)
    Lx = y ** s * float(np.sum(2 * np.pi * m * e))
    Ly = s * y ** (s - 1) * float(np.sum(e)) + Lx
    return Lx, Ly


def _refine(fun, z0: complex, dx: float, dy: float, depth: int, ylo: float):
    """Alternate bounded 1-D maximisations in x and y around z0."""
    x, y = z0.real, z0.imag
    best = fun(x, y)
    for _ in range(depth):
        r = optimize.minimize_scalar(lambda t: -fun(t, y), bounds=(x - dx, x + dx),
                                     method="bounded", options={"xatol": 1e-10})
        if -r.fun > best:
            best, x = -r.fun, r.x
        r = optimize.minimize_scalar(lambda t: -fun(x, t), bounds=(max(ylo, y - dy), y + dy),
                                     method="bounded", options={"xatol": 1e-10})
        if -r.fun > best:
            best, y = -r.fun, r.x
    return best, complex(x, y)


def sup_search(f: QExpansion, grid=(41, 41), refine_depth: int = 3, region: str = "strip",
               l2: L2Result | None = None, tol: float = 1e-10) -> SupNormResult:
    """Largest grid value of F, locally refined.

    region "strip": {sqrt(3)/(4N) <= y <= Y_top, |x| <= 1/2} through the
    truncated series, with a Lipschitz gap estimate.
    region "full": the whole quotient Gamma_0(4N)\\H, i.e. g F_std over coset
    representatives g (eta products only).
    """
    N = f.level // 4
    nx, ny = grid
    if f.is_zero():
        raise ValueError("zero form has no meaningful ratio")
    if not f.is_cuspidal():
        raise ValueError("not a cusp form: y^(k/2)|f| is unbounded near the cusps")
    if region == "strip":
        ylo = math.sqrt(3) / (4 * N)
        floor = evaluation_floor(f, tol)
        if ylo < floor:
            raise ValueError("evaluation floor %.4g is above the strip bottom %.4g; raise the precision"
                             % (floor, ylo))
        ytop = max(y_top(f), 1.5 * ylo)
        per = f.offset.denominator
        xs = np.linspace(-per / 2, per / 2, nx)
        ys = np.geomspace(ylo, ytop, ny)
        Z = xs[:, None] + 1j * ys[None, :]
        vals = F_values(f, Z)
        i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
        z0 = complex(Z[i, j])

        def fun(x, y):
            return float(F_values(f, complex(x, y)))
        dx = xs[1] - xs[0]
        dy = ys[min(j + 1, ny - 1)] - ys[max(j - 1, 0)]
        best, zb = _refine(fun, z0, dx, dy, refine_depth, ylo)
        best = max(best, float(vals[i, j]))
        Lx, Ly = _derivative_bound(f, ylo)
        gap = Lx * dx / 2 + Ly * float(np.max(np.diff(ys))) / 2
        meta = {"y_low": ylo, "y_top": ytop, "tail_bound": tail_bound(f, ylo)}
    elif region == "full":
        F = F_anywhere(f)
        reps = [g.tuple() for g in gamma0_coset_reps(f.level)]
        # cusp heights: the widest cusp has width level
        ymax = max(2.0, float(f.kappa) * f.level / (4 * math.pi * max(float(f.offset), 1 / 24)) * 2)
        xs = np.linspace(-0.5, 0.5, nx)
        ys = np.geomspace(math.sqrt(3) / 2, ymax, ny)
        Z = xs[:, None] + 1j * ys[None, :]
        best, zb, gb = -1.0, None, None
        for g in reps:
            v = F(_coset_images(g, Z))
            k = int(np.argmax(v))
            if v.flat[k] > best:
                best, zb, gb = float(v.flat[k]), complex(Z.flat[k]), g

        def fun(x, y):
            return float(F(_coset_images(gb, np.array([complex(x, y)])))[0])
        dx = xs[1] - xs[0]
        j = int(np.argmin(np.abs(ys - zb.imag)))
        dy = ys[min(j + 1, ny - 1)] - ys[max(j - 1, 0)]
        b2, z2 = _refine(fun, zb, dx, dy, refine_depth, math.sqrt(3) / 2 * 0.9)
        if b2 > best:
            best, zb = b2, z2
        zb = complex(_coset_images(gb, np.array([zb]))[0])
        gap = None
        meta = {"y_max_std": ymax, "cosets": len(reps)}
    else:
        raise ValueError("region must be 'strip' or 'full'")
    if l2 is None:
        l2 = l2_norm(f)
    meta.update(weight_num=f.weight_num, C_f=coefficient_constant(f), precision=f.precision)
    return SupNormResult(f.name or "form", f.level, best, zb, l2.V_included, l2.V_excluded,
                         (nx, ny), refine_depth, region, gap, meta)


# ----------------------------------------------------- localized bound

@dataclass
class LocalizedReport:
    values: list     # (z, c(z))
    max_c: float
    ceiling: float
    passed: bool


def localized_bound_check(f: QExpansion, samples, l2: float | None = None,
                          ceiling: float = 10.0) -> LocalizedReport:
    """c(z) = F(z) sqrt(y) / ||F||_2 (V included) at each sample."""
    if f.is_zero():
        return LocalizedReport([(z, 0.0) for z in samples], 0.0, ceiling, True)
    if l2 is None:
        l2 = l2_norm(f, check=False).V_included
    out = []
    for z in samples:
        v, _ = evaluate_F(f, z)
        out.append((z, v * math.sqrt(z.imag) / l2))
    mx = max(c for _, c in out)
    return LocalizedReport(out, mx, ceiling, mx <= ceiling)


# -------------------------------------------------------------- the fit

@dataclass
class ExponentFit:
    alpha: float
    intercept: float
    residuals: list
    convention: str


def level_exponent_fit(Ns, ratios, convention: str = "V_included") -> ExponentFit:
    Ns = np.asarray(Ns, dtype=float)
    r = np.asarray(ratios, dtype=float)
    if len(set(Ns.tolist())) < 3:
        raise ValueError("degenerate design matrix: need at least 3 distinct levels")
    A = np.vstack([np.log(Ns), np.ones_like(Ns)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(r), rcond=None)
    res = np.log(r) - A @ coef
    return ExponentFit(float(coef[0]), float(coef[1]), res.tolist(), convention)


def fit_results(results, convention: str = "V_included") -> ExponentFit:
    weights = {r.meta.get("weight_num") for r in results}
    if len(weights) > 1:
        raise ValueError("results mix different weights")
    Ns = [r.N for r in results]
    rs = [r.ratio if convention == "V_included" else r.ratio_V_excluded for r in results]
    return level_exponent_fit(Ns, rs, convention)


def band_check(results, exponent: float = 0.6, safety: float = 2.0, convention: str = "V_included"):
    """Fit C on the smallest level (times `safety`) and test ratio <= C N^exponent."""
    rs = sorted(results, key=lambda r: r.N)

    def ratio(r):
        return r.ratio if convention == "V_included" else r.ratio_V_excluded
    C = safety * ratio(rs[0]) / rs[0].N ** exponent
    rows = [(r.N, ratio(r), C * r.N ** exponent, ratio(r) <= C * r.N ** exponent) for r in rs]
    return C, rows, all(row[3] for row in rows)


def write_results_csv(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["form", "N", "sup", "argmax_x", "argmax_y", "l2_V_included",
                    "l2_V_excluded", "ratio", "grid", "depth"])
        for r in results:
            w.writerow([r.form, r.N, "%.12g" % r.sup_value, "%.12g" % r.argmax.real,
                        "%.12g" % r.argmax.imag, "%.12g" % r.l2_V_included,
                        "%.12g" % r.l2_V_excluded, "%.12g" % r.ratio,
                        "%dx%d" % r.grid, r.depth])
