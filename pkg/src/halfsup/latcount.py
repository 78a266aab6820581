"""Counting integral matrices of determinant l that move z a bounded distance.

For g = [[a, b], [c, d]] with det l put (all divided by sqrt(l))

    C = c sqrt(yw yz)
    D = (c xw + d) sqrt(yz / yw)
    A = (a - c xz) sqrt(yw / yz)
    B = (a xw + b - c xz xw - d xz) / sqrt(yw yz)

Then A^2 + B^2 + C^2 + D^2 = 2(2 u(gw, z) + 1).  We enumerate c (multiples
of the modulus) and d from the (C, D) disc; for each pair the solutions of
ad - bc = l form one arithmetic progression (a, b) = (a0, b0) + t (c, d)/g,
and the admissible t form an interval found from a quadratic.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import in_fundamental_set, u_distance

INCLUSION = 1e-12


def _xgcd_vec(a: np.ndarray, b: np.ndarray):
    """Vectorised extended gcd: a x + b y = g with g >= 0."""
    r0, r1 = a.copy(), b.copy()
    s0, s1 = np.ones_like(a), np.zeros_like(a)
    t0, t1 = np.zeros_like(a), np.ones_like(a)
    act = np.nonzero(r1)[0]
    while act.size:
        q = r0[act] // r1[act]
        r0[act], r1[act] = r1[act], r0[act] - q * r1[act]
        s0[act], s1[act] = s1[act], s0[act] - q * s1[act]
        t0[act], t1[act] = t1[act], t0[act] - q * t1[act]
        act = act[r1[act] != 0]
    neg = r0 < 0
    return np.where(neg, -r0, r0), np.where(neg, -s0, s0), np.where(neg, -t0, t0)


_INV_TABLE = {"cmax": 0, "flat": np.zeros(1, np.int64), "start": np.zeros(1, np.int64)}


def _inverse_lookup(c: np.ndarray, d: np.ndarray) -> np.ndarray:
    """d^-1 mod c for coprime pairs, from a flat table grown on demand."""
    cmax = int(c.max())
    tab = _INV_TABLE
    if cmax > tab["cmax"]:
        top = max(cmax, 2 * tab["cmax"])
        start = np.zeros(top + 2, np.int64)
        parts = []
        pos = 0
        for m in range(1, top + 1):
            start[m] = pos
            inv = np.zeros(m, np.int64)
            for r in range(m):
                if math.gcd(r, m) == 1:
                    inv[r] = pow(r, -1, m) if m > 1 else 0
            parts.append(inv)
            pos += m
        tab.update(cmax=top, flat=np.concatenate(parts), start=start)
    return tab["flat"][tab["start"][c] + d % c]


def _pairs(z: complex, w: complex, ell: int, modulus: int, S: float):
    """All (c, d) with C^2 + D^2 <= S and c = 0 mod modulus."""
    yz, xw, yw = z.imag, w.real, w.imag
    sl = math.sqrt(ell)
    kmax = int(math.floor(math.sqrt(S) * sl / math.sqrt(yw * yz) / modulus + 1e-9))
    cs, ds = [], []
    for k in range(0, kmax + 1):
        c = k * modulus
        C = c * math.sqrt(yw * yz) / sl
        rem = S - C * C
        if rem < 0:
            continue
        half = math.sqrt(rem) * sl * math.sqrt(yw / yz)
        lo = math.ceil(-c * xw - half - 1e-9)
        hi = math.floor(-c * xw + half + 1e-9)
        if hi < lo:
            continue
        d = np.arange(lo, hi + 1, dtype=np.int64)
        cs.append(np.full(d.shape, c, dtype=np.int64))
        ds.append(d)
    if not cs:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    return np.concatenate(cs), np.concatenate(ds)


def _solve(z, w, ell, modulus, delta):
    """Per (c, d) pair: progression data and the admissible t-interval."""
    S = 2 * (2 * (delta + INCLUSION) + 1)
    c, d = _pairs(z, w, ell, modulus, S)
    # g and -g act identically, so keep one of each pair (c, d), (-c, -d)
    keep = (c > 0) | ((c == 0) & (d > 0))
    c, d = c[keep], d[keep]
    g = np.gcd(c, d)
    ok = (ell % g) == 0
    c, d, g = c[ok], d[ok], g[ok]
    cp, dp = c // g, d // g
    q = ell // g
    # a0 = q * dp^-1 mod cp, then b0 from the determinant; unit pairs use a
    # cached table of inverses, the rest the extended gcd
    a0 = np.zeros_like(c)
    unit = (g == 1) & (c > 0)
    if unit.any():
        a0[unit] = (q[unit] % c[unit]) * _inverse_lookup(c[unit], d[unit]) % c[unit]
    rest = ~unit & (cp != 0)
    if rest.any():
        _, xs, _ = _xgcd_vec(dp[rest], cp[rest])
        a0[rest] = (q[rest] % cp[rest]) * (xs % cp[rest]) % cp[rest]
    zc = cp == 0
    a0[zc] = q[zc] * dp[zc]               # c = 0: a d = ell with dp = 1
    b0 = np.zeros_like(c)
    nz = cp != 0
    b0[nz] = (a0[nz] * d[nz] - ell) // c[nz]
    xz, yz, xw, yw = z.real, z.imag, w.real, w.imag
    sl = math.sqrt(ell)
    C = c * math.sqrt(yw * yz) / sl
    D = (c * xw + d) * math.sqrt(yz / yw) / sl
    A0 = (a0 - c * xz) * math.sqrt(yw / yz) / sl
    B0 = (a0 * xw + b0 - c * xz * xw - d * xz) / math.sqrt(yw * yz) / sl
    aA = cp * math.sqrt(yw / yz) / sl
    aB = (cp * xw + dp) / math.sqrt(yw * yz) / sl
    R2 = S - C * C - D * D
    qa = aA * aA + aB * aB
    qb = A0 * aA + B0 * aB
    qc = A0 * A0 + B0 * B0 - R2
    disc = qb * qb - qa * qc
    has = disc >= 0
    root = np.sqrt(np.where(has, disc, 0.0))
    tc = -qb / qa
    h = root / qa
    tlo = np.where(has, np.ceil(tc - h - 1e-9), 1)
    thi = np.where(has, np.floor(tc + h + 1e-9), 0)
    return c, d, a0, b0, cp, dp, tlo.astype(np.int64), thi.astype(np.int64)


def _list(z, w, ell, modulus, delta):
    c, d, a0, b0, cp, dp, tlo, thi = _solve(z, w, ell, modulus, delta)
    mats = []
    for i in np.nonzero(thi >= tlo)[0]:
        for t in range(int(tlo[i]), int(thi[i]) + 1):
            a = int(a0[i]) + t * int(cp[i])
            b = int(b0[i]) + t * int(dp[i])
            ci, di = int(c[i]), int(d[i])
            assert a * di - b * ci == ell and ci % modulus == 0
            gw = (a * w + b) / (ci * w + di)
            if u_distance(gw, z) <= delta + INCLUSION:
                mats.append((a, b, ci, di))
                mats.append((-a, -b, -ci, -di))
    mats.sort()
    return mats


def count_matrices(z: complex, ell: int, N: int, delta: float, listing: bool = False,
                   w: complex | None = None, guard: int = 10**8):
    """Matrices g, det g = ell, c = 0 mod N, with u(g w, z) <= delta (w = z by default).

    Returns (count, matrices or None).  With listing=True every matrix is
    checked exactly for determinant and congruence and its u recomputed.
    """
    if delta <= 0 and not listing:
        raise ValueError("delta must be positive")
    w = z if w is None else w
    est = math.pi * 2 * (2 * delta + 1) * ell / (z.imag * N) + 4 * math.sqrt(ell / (z.imag * N)) + 10
    if est > guard:
        raise OverflowError("about %.3g candidate pairs; use a smaller delta or ell" % est)
    if listing:
        mats = _list(z, w, ell, N, delta)
        return len(mats), mats
    *_, tlo, thi = _solve(z, w, ell, N, delta)
    return 2 * int(np.maximum(thi - tlo + 1, 0).sum()), None


def count_matrices_naive(z: complex, ell: int, N: int, delta: float, B: int | None = None,
                         w: complex | None = None) -> int:
    """Reference count by brute force over the box |a|, |b|, |c|, |d| <= B."""
    w = z if w is None else w
    if B is None:
        # each of A, B, C, D is at most sqrt(S) in absolute value
        r = math.sqrt(2 * (2 * (delta + INCLUSION) + 1) * ell)
        xz, yz, xw, yw = abs(z.real), z.imag, abs(w.real), w.imag
        bc = r / math.sqrt(yz * yw)
        bd = bc * xw + r * math.sqrt(yw / yz)
        ba = bc * xz + r * math.sqrt(yz / yw)
        bb = ba * xw + bc * xz * xw + bd * xz + r * math.sqrt(yz * yw)
        B = int(math.ceil(max(ba, bb, bc, bd))) + 1
    rng = np.arange(-B, B + 1, dtype=np.int64)
    cs = rng[rng % N == 0]
    total = 0
    a = rng[:, None, None]
    b = rng[None, :, None]
    for c in cs:
        d = rng[None, None, :]
        det = a * d - b * c
        m = det == ell
        ia, ib, id_ = np.nonzero(m)
        if ia.size == 0:
            continue
        aa, bb, dd = rng[ia], rng[ib], rng[id_]
        gw = (aa * w + bb) / (c * w + dd)
        u = np.abs(gw - z) ** 2 / (4 * gw.imag * z.imag)
        total += int((u <= delta + INCLUSION).sum())
    return total


# --------------------------------------------------------- the lemma check

@dataclass
class CountReport:
    z: list
    N: int
    L: int
    delta: float
    counts: list            # per sample: {l: count}
    ratios: list            # per sample: sum count / (K sqrt(L))
    K: list
    fitted_constant: float
    rows: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"N": self.N, "L": self.L, "delta": self.delta,
                "samples": [[p.real, p.imag] for p in self.z],
                "K": self.K, "ratios": self.ratios,
                "fitted_constant": self.fitted_constant}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["sample", "x", "y", "N", "ell", "count", "cumulative", "K", "ratio"])
            for i, (p, cnt) in enumerate(zip(self.z, self.counts)):
                cum = 0
                for ell in sorted(cnt):
                    cum += cnt[ell]
                    K = 1 + ell * self.N * p.imag ** 2
                    wr.writerow([i, "%.17g" % p.real, "%.17g" % p.imag, self.N, ell, cnt[ell], cum,
                                 "%.10g" % K, "%.10g" % (cum / (K * math.sqrt(ell)))])


def lemma_K(L: int, N: int, y: float) -> float:
    return 1 + L * N * y * y


def verify_counting_lemma(samples, L: int, N: int, delta: float = 1.0) -> CountReport:
    """Sum of counts over square l <= L divided by K sqrt(L), per sample.

    The ratio is also tracked for every square L' <= L, and the fitted
    constant is the maximum over samples and L'.
    """
    counts, ratios, Ks = [], [], []
    best = 0.0
    for z in samples:
        rep = in_fundamental_set(z, N)
        if not rep.inside:
            raise ValueError("sample %r is outside F(2N); witness %r" % (z, rep.witness))
        cnt = {}
        cum = 0
        worst = 0.0
        m = 1
        while m * m <= L:
            ell = m * m
            cnt[ell] = count_matrices(z, ell, N, delta)[0]
            cum += cnt[ell]
            worst = max(worst, cum / (lemma_K(ell, N, z.imag) * m))
            m += 1
        K = lemma_K(L, N, z.imag)
        counts.append(cnt)
        ratios.append(cum / (K * math.sqrt(L)))
        Ks.append(K)
        best = max(best, worst)
    return CountReport(list(samples), N, L, delta, counts, ratios, Ks, best)


def growth_flag(reports, exponent: float = 0.2) -> bool:
    """True if the fitted constant grows faster than N^exponent across reports."""
    pts = sorted((r.N, r.fitted_constant) for r in reports)
    if len(pts) < 2:
        return False
    (n0, c0), (n1, c1) = pts[0], pts[-1]
    if c0 <= 0:
        return False
    return c1 / c0 > (n1 / n0) ** exponent * 1.5
