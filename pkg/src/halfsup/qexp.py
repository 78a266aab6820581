"""Exact q-expansions with a rational exponent offset.

A QExpansion stores a(0..P-1) and means sum a(n) q^(n + offset).  All
arithmetic is exact (Fractions, integer Kronecker substitution for
products).  Numerical evaluation lives in `evaluate` and in supnorm.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .arith import (DirichletCharacter, GroupElement, eps_d, kronecker_symbol,
                    random_gamma0)


class FormatError(ValueError):
    """Malformed q-expansion file; `field` names the offending entry."""

    def __init__(self, field: str, msg: str):
        super().__init__("%s: %s" % (field, msg))
        self.field = field


# ---------------------------------------------------------- integer series

def _mul_int(f: list[int], g: list[int], P: int) -> list[int]:
    """Truncated product of integer coefficient lists via one big-int multiply."""
    f, g = f[:P], g[:P]
    if not f or not g:
        return [0] * P
    mf = max(map(abs, f))
    mg = max(map(abs, g))
    if mf == 0 or mg == 0:
        return [0] * P
    bits = mf.bit_length() + mg.bit_length() + min(len(f), len(g)).bit_length() + 2
    nb = (bits + 7) // 8
    B = 8 * nb

    def enc(c):
        x = 0
        for v in reversed(c):
            x = (x << B) + v
        return x

    prod = enc(f) * enc(g)
    n = min(P, len(f) + len(g) - 1)
    # biased digits c_i + 2^(B-1) are all in [0, 2^B), so no borrows remain
    bias = (((1 << (B * n)) - 1) // ((1 << B) - 1)) << (B - 1)
    low = (prod + bias) & ((1 << (B * n)) - 1)
    raw = low.to_bytes(nb * n, "little")
    half = 1 << (B - 1)
    out = [int.from_bytes(raw[i * nb:(i + 1) * nb], "little") - half for i in range(n)]
    return out + [0] * (P - n)


def _sparse_mul(f: list[int], terms: list[tuple[int, int]], P: int) -> list[int]:
    out = [0] * P
    for e, c in terms:
        if e >= P:
            continue
        for i in range(P - e):
            if f[i]:
                out[i + e] += c * f[i]
    return out


def _euler_terms(P: int, m: int = 1) -> list[tuple[int, int]]:
    """Nonzero terms of prod (1 - q^(mn)) below q^P (pentagonal numbers)."""
    terms = []
    k = 0
    while True:
        added = False
        for kk in ((k,) if k == 0 else (k, -k)):
            e = m * kk * (3 * kk - 1) // 2
            if e < P:
                terms.append((e, -1 if kk % 2 else 1))
                added = True
        if not added:
            break
        k += 1
    return sorted(terms)


def _euler_inverse(P: int, m: int = 1) -> list[int]:
    """Coefficients of prod (1 - q^(mn))^(-1): partition numbers on multiples of m."""
    terms = [t for t in _euler_terms(P, m) if t[0] > 0]
    p = [0] * P
    p[0] = 1
    for n in range(1, P):
        s = 0
        for e, c in terms:
            if e > n:
                break
            s -= c * p[n - e]
        p[n] = s
    return p


def _pow_int(f: list[int], r: int, P: int) -> list[int]:
    out = [1] + [0] * (P - 1)
    base = f[:P] + [0] * max(0, P - len(f))
    while r:
        if r & 1:
            out = _mul_int(out, base, P)
        r >>= 1
        if r:
            base = _mul_int(base, base, P)
    return out


# ---------------------------------------------------------------- the class

def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class QExpansion:
    offset: Fraction
    coeffs: tuple
    weight_num: int
    level: int
    character: DirichletCharacter
    eta_spec: tuple | None = None
    eta_scale: Fraction = Fraction(1)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "offset", Fraction(self.offset))
        object.__setattr__(self, "coeffs", tuple(_as_fraction(c) for c in self.coeffs))
        if self.offset < 0:
            raise ValueError("negative offset")
        if 24 % self.offset.denominator:
            raise ValueError("offset denominator must divide 24")
        if self.level < 1:
            raise ValueError("level must be positive")
        if self.weight_num % 2 and self.level % 4:
            raise ValueError("half-integral weight needs level divisible by 4")
        if self.level % self.character.modulus:
            raise ValueError("character modulus must divide the level")

    @property
    def precision(self) -> int:
        return len(self.coeffs)

    @property
    def kappa(self) -> Fraction:
        return Fraction(self.weight_num, 2)

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_cuspidal(self) -> bool:
        if self.offset > 0:
            return True
        return self.precision == 0 or self.coeffs[0] == 0

    def with_coeffs(self, coeffs, offset=None, eta=False, **kw) -> "QExpansion":
        args = dict(offset=self.offset if offset is None else offset, coeffs=tuple(coeffs),
                    weight_num=self.weight_num, level=self.level, character=self.character,
                    eta_spec=self.eta_spec if eta else None,
                    eta_scale=self.eta_scale if eta else Fraction(1), name=self.name)
        args.update(kw)
        return QExpansion(**args)

    def truncate(self, P: int) -> "QExpansion":
        if P > self.precision:
            raise ValueError("cannot extend precision")
        return self.with_coeffs(self.coeffs[:P], eta=True)

    # --- exact arithmetic

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s) -> "QExpansion":
        s = _as_fraction(s)
        return self.with_coeffs([s * c for c in self.coeffs], eta=s != 0,
                                eta_scale=self.eta_scale * s)

    def __add__(self, other: "QExpansion") -> "QExpansion":
        if self.weight_num != other.weight_num:
            raise ValueError("cannot add different weights")
        shift = other.offset - self.offset
        if shift.denominator != 1:
            raise ValueError("offsets %s and %s differ by a non-integer" % (self.offset, other.offset))
        level = math.lcm(self.level, other.level)
        if not self.character.same_as(other.character):
            raise ValueError("cannot add forms with different characters")
        base = min(self.offset, other.offset)
        top = min(self.offset + self.precision, other.offset + other.precision)
        P = int(top - base)
        out = [Fraction(0)] * max(P, 0)
        for f in (self, other):
            s = int(f.offset - base)
            for n in range(max(P - s, 0)):
                out[n + s] += f.coeffs[n]
        return QExpansion(base, tuple(out), self.weight_num, level,
                          self.character.extend(math.lcm(self.character.modulus, other.character.modulus)),
                          name="")

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "QExpansion":
        if not isinstance(other, QExpansion):
            return self.scale(other)
        P = min(self.precision, other.precision)
        da = math.lcm(*[c.denominator for c in self.coeffs[:P]] or [1])
        db = math.lcm(*[c.denominator for c in other.coeffs[:P]] or [1])
        fa = [int(c * da) for c in self.coeffs[:P]]
        fb = [int(c * db) for c in other.coeffs[:P]]
        prod = _mul_int(fa, fb, P)
        den = da * db
        eta = None
        if self.eta_spec is not None and other.eta_spec is not None:
            eta = _merge_eta(self.eta_spec + other.eta_spec)
        off = self.offset + other.offset
        level = math.lcm(self.level, other.level)
        return QExpansion(off, tuple(Fraction(c, den) for c in prod),
                          self.weight_num + other.weight_num, level,
                          self.character * other.character, eta_spec=eta,
                          eta_scale=self.eta_scale * other.eta_scale if eta else Fraction(1))

    __rmul__ = scale

    def equal_coeffs(self, other: "QExpansion") -> bool:
        """Exact comparison where both expansions are defined."""
        d = self - other
        return d.is_zero()

    # --- numerics

    @cached_property
    def _sparse(self):
        idx = np.array([n for n, c in enumerate(self.coeffs) if c], dtype=np.int64)
        val = np.array([float(self.coeffs[n]) for n in idx], dtype=float)
        return idx, val

    def evaluate(self, z) -> complex | np.ndarray:
        """Head of the series sum a(n) e((n + offset) z); no tail control here."""
        idx, val = self._sparse
        z = np.asarray(z, dtype=complex)
        if idx.size == 0:
            return np.zeros_like(z) if z.ndim else 0j
        x, y = z.real, z.imag
        den = self.offset.denominator
        E = idx * den + self.offset.numerator          # exponents times den
        e = E / den
        # frac(E x/den) with x/den split into 26 high bits (exact integer
        # product) and a small remainder, so phases stay accurate for large E
        u = np.mod(x, den) / den
        U = np.round(u * 2.0 ** 26).astype(np.int64)
        lo = u - U / 2.0 ** 26
        hi = np.mod(np.multiply.outer(U, E), 1 << 26) / 2.0 ** 26
        frac = hi + np.multiply.outer(lo, E.astype(float))
        ph = np.exp(2j * np.pi * frac - 2 * np.pi * np.multiply.outer(y, e))
        out = ph @ val
        return complex(out) if z.ndim == 0 else out

    def __call__(self, z):
        return self.evaluate(z)


def _merge_eta(spec) -> tuple:
    d: dict[int, int] = {}
    for m, r in spec:
        d[m] = d.get(m, 0) + r
    return tuple(sorted((m, r) for m, r in d.items() if r))


# ------------------------------------------------------------ constructors

def theta_series(P: int) -> QExpansion:
    """theta(z) = sum_x q^(x^2), weight 1/2 on Gamma_0(4)."""
    if P < 1:
        raise ValueError("precision must be positive")
    c = [0] * P
    x = 0
    while x * x < P:
        c[x * x] += 1 if x == 0 else 2
        x += 1
    return QExpansion(Fraction(0), tuple(c), 1, 4, DirichletCharacter.trivial(1),
                      eta_spec=((1, -2), (2, 5), (4, -2)), name="theta")


def eta_product(spec, P: int, level: int | None = None,
                character: DirichletCharacter | None = None, name: str = "") -> QExpansion:
    """prod eta(m z)^r to precision P.

    The level defaults to 4*lcm(m) (only a label; modularity is checked
    numerically, see `verify_modularity`).
    """
    spec = _merge_eta([(int(m), int(r)) for m, r in spec])
    for m, _ in spec:
        if m < 1:
            raise ValueError("eta scale must be >= 1")
    off = Fraction(sum(m * r for m, r in spec), 24)
    if off < 0:
        raise ValueError("negative offset %s: not holomorphic at infinity" % off)
    k = sum(r for _, r in spec)
    coeffs = [1] + [0] * (P - 1)
    for m, r in spec:
        if r > 0:
            terms = _euler_terms(P, m)
            if r == 1:
                coeffs = _sparse_mul(coeffs, terms, P)
            else:
                base = _sparse_mul([1] + [0] * (P - 1), terms, P)
                coeffs = _mul_int(coeffs, _pow_int(base, r, P), P)
        else:
            coeffs = _mul_int(coeffs, _pow_int(_euler_inverse(P, m), -r, P), P)
    if level is None:
        level = 4 * math.lcm(*[m for m, _ in spec]) if spec else 4
    if character is None:
        character = DirichletCharacter.trivial(1)
    if k % 2 and level % 4:
        level *= 4
    return QExpansion(off, tuple(coeffs), k, level, character, eta_spec=spec, name=name)


def eta8_cubed(P: int) -> QExpansion:
    """eta(8z)^3 = sum_{m odd} chi_-4(m) m q^(m^2), weight 3/2, level 64."""
    c = [0] * P
    m = 1
    while m * m - 1 < P:
        c[m * m - 1] = m if m % 4 == 1 else -m
        m += 2
    return QExpansion(Fraction(1), tuple(c), 3, 64, DirichletCharacter.trivial(1),
                      eta_spec=((8, 3),), name="eta8cubed")


def dilate(f: QExpansion, d: int) -> QExpansion:
    """f(z) -> f(dz); level times d, character times (4d/.)."""
    if d < 1:
        raise ValueError("dilation must be positive")
    if d == 1:
        return f
    # exponent n + offset maps to d(n + offset)
    off = f.offset * d
    out = [Fraction(0)] * (f.precision * d)
    for n, c in enumerate(f.coeffs):
        if n * d < len(out):
            out[n * d] = c
    level = f.level * d
    chi = f.character.extend(level)
    if f.weight_num % 2:
        chi = chi * DirichletCharacter.kronecker(4 * d, 4 * d).extend(level)
    eta = tuple((m * d, r) for m, r in f.eta_spec) if f.eta_spec else None
    name = "%s|V(%d)" % (f.name, d) if f.name else ""
    return QExpansion(off, tuple(out), f.weight_num, level, chi, eta_spec=eta,
                      eta_scale=f.eta_scale, name=name)


@dataclass
class FormFamily:
    members: list = field(default_factory=list)   # (level, QExpansion, tags)

    def add(self, f: QExpansion, tags: dict):
        if not f.is_cuspidal():
            raise ValueError("family members must be cusp forms")
        if self.members and self.members[0][1].weight_num != f.weight_num:
            raise ValueError("family weights must agree")
        self.members.append((f.level, f, dict(tags)))

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


def dilated_family(base: QExpansion, ds, P: int | None = None) -> FormFamily:
    fam = FormFamily()
    for d in ds:
        g = dilate(base, d)
        fam.add(g, {"base": base.name, "dilation": d,
                    "N": g.level // 4,
                    "odd_squarefree_N": (g.level // 4) % 2 == 1})
    return fam


# ------------------------------------------------------------------- I/O

_REQUIRED = ("weight_num", "level", "character", "offset_num", "offset_den",
             "coefficients", "precision")


def form_to_json(f: QExpansion) -> dict:
    d = {"weight_num": f.weight_num, "level": f.level, "character": f.character.to_json(),
         "offset_num": f.offset.numerator, "offset_den": f.offset.denominator,
         "coefficients": [str(c) for c in f.coeffs], "precision": f.precision}
    if f.name:
        d["name"] = f.name
    if f.eta_spec is not None:
        d["eta_product"] = [list(t) for t in f.eta_spec]
        d["eta_scale"] = str(f.eta_scale)
    return d


def dump_form(f: QExpansion, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(form_to_json(f), fh, indent=1)
        fh.write("\n")


def form_from_json(obj: dict) -> QExpansion:
    if not isinstance(obj, dict):
        raise FormatError("<root>", "expected a JSON object")
    for k in _REQUIRED:
        if k not in obj:
            raise FormatError(k, "missing field")
    for k in ("weight_num", "level", "offset_num", "offset_den", "precision"):
        if not isinstance(obj[k], int) or isinstance(obj[k], bool):
            raise FormatError(k, "must be an integer")
    if obj["level"] < 1:
        raise FormatError("level", "must be positive")
    if obj["weight_num"] % 2 and obj["level"] % 4:
        raise FormatError("level", "half-integral weight needs level divisible by 4")
    try:
        chi = DirichletCharacter.from_json(obj["character"])
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError("character", str(e)) from None
    if obj["level"] % chi.modulus:
        raise FormatError("character", "modulus does not divide level")
    if obj["offset_den"] <= 0 or 24 % obj["offset_den"]:
        raise FormatError("offset_den", "must be a positive divisor of 24")
    off = Fraction(obj["offset_num"], obj["offset_den"])
    if off < 0:
        raise FormatError("offset_num", "offset must be nonnegative")
    coeffs = obj["coefficients"]
    if not isinstance(coeffs, list):
        raise FormatError("coefficients", "must be an array")
    parsed = []
    for i, s in enumerate(coeffs):
        if not isinstance(s, str):
            raise FormatError("coefficients[%d]" % i, "must be a string 'p/q'")
        try:
            parsed.append(Fraction(s))
        except (ValueError, ZeroDivisionError):
            raise FormatError("coefficients[%d]" % i, "not an exact rational: %r" % s) from None
    if len(parsed) != obj["precision"]:
        raise FormatError("precision", "does not match the number of coefficients")
    eta = obj.get("eta_product")
    if eta is not None:
        try:
            eta = tuple((int(m), int(r)) for m, r in eta)
        except (TypeError, ValueError):
            raise FormatError("eta_product", "expected [[m, r], ...]") from None
    if obj.get("cuspidal") and off == 0 and parsed and parsed[0] != 0:
        raise FormatError("coefficients[0]", "claims cuspidal but a(0) != 0")
    return QExpansion(off, tuple(parsed), obj["weight_num"], obj["level"], chi,
                      eta_spec=eta, eta_scale=Fraction(obj.get("eta_scale", "1")),
                      name=str(obj.get("name", "")))


def load_form(path) -> QExpansion:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError("<root>", "invalid JSON: %s" % e) from None
    return form_from_json(obj)


# -------------------------------------------------------------- modularity

@dataclass
class ModularityReport:
    passed: bool
    max_residual: float
    checked: int
    failures: list = field(default_factory=list)   # (gamma, z, residual)


def _cz_d(g: GroupElement, z: complex) -> complex:
    """cz + d with the real part formed exactly (it cancels near -d/c)."""
    return complex(float(g.c * Fraction(z.real) + g.d), g.c * z.imag)


def _act(g: GroupElement, z: complex) -> complex:
    """gz = a/c - 1/(c (cz + d)) for c != 0, accurate near -d/c."""
    if g.c == 0:
        return g(z)
    return float(Fraction(g.a, g.c)) - 1 / (g.c * _cz_d(g, z))


def automorphy_factor(f: QExpansion, g: GroupElement, z: complex) -> complex:
    """eta(d) eps_d^(-2k) (c/d)^(2k) (cz+d)^k with k the weight."""
    w = f.weight_num
    chi = f.character(g.d)
    j = _cz_d(g, z)
    if w % 2 == 0 and f.level % 4:
        return chi * j ** (w // 2)
    root = complex(np.sqrt(j))
    return chi * eps_d(g.d) ** (-w) * kronecker_symbol(g.c, g.d) ** w * root ** w


def eval_floor(f: QExpansion, digits: float = 15.0) -> float:
    """Smallest Im z where the head of the series is trusted to ~`digits`."""
    P = f.precision + float(f.offset)
    return digits * math.log(10) / (2 * math.pi * P) * 1.3


def _abs_series(f: QExpansion, y: float) -> float:
    idx, val = f._sparse
    return float(np.sum(np.abs(val) * np.exp(-2 * np.pi * (idx + float(f.offset)) * y)))


def _sample_points(g: GroupElement, ymin: float, rng: random.Random, n: int):
    pts = []
    for _ in range(n):
        if g.c == 0:
            pts.append(complex(rng.uniform(-0.5, 0.5), rng.uniform(0.3, 2.0)))
        else:
            # both z and gz have imaginary part ~ 1/|c| near this point
            s = rng.uniform(0.6, 1.6)
            x = -g.d / g.c + rng.uniform(-0.3, 0.3) / abs(g.c)
            pts.append(complex(x, s / abs(g.c)))
    return pts


def verify_modularity(f: QExpansion, generators, tol: float = 1e-8, npoints: int = 5,
                      seed: int = 0, points=None) -> ModularityReport:
    """Check f(gz) = automorphy_factor * f(z) numerically for each generator.

    Points default to Im z in [0.3, 2] for translations and to points near
    -d/c otherwise, so both sides stay above the evaluation floor.
    """
    rng = random.Random(seed)
    floor = eval_floor(f)
    worst = 0.0
    fails = []
    n = 0
    for g in generators:
        pts = points if points is not None else _sample_points(g, floor, rng, npoints)
        for z in pts:
            gz = _act(g, z)
            if min(z.imag, gz.imag) < floor:
                raise ValueError("precision %d too low: need Im >= %.3g, got %.3g"
                                 % (f.precision, floor, min(z.imag, gz.imag)))
            lhs = f.evaluate(gz)
            rhs = automorphy_factor(f, g, z) * f.evaluate(z)
            # near a zero of f the relative error only measures cancellation,
            # so the scale never drops below 1e-6 of the absolute series
            scale = max(abs(lhs), abs(rhs), 1e-6 * _abs_series(f, gz.imag), 1e-300)
            r = abs(lhs - rhs) / scale
            n += 1
            worst = max(worst, r)
            if r > tol:
                fails.append((g.tuple(), z, r))
    return ModularityReport(not fails, worst, n, fails)


def find_character(f: QExpansion, candidates, generators, tol: float = 1e-8, seed: int = 0):
    """First candidate character for which f passes verify_modularity."""
    for chi in candidates:
        g = QExpansion(f.offset, f.coeffs, f.weight_num, f.level, chi,
                       eta_spec=f.eta_spec, eta_scale=f.eta_scale, name=f.name)
        if verify_modularity(g, generators, tol, seed=seed).passed:
            return chi
    return None


def sample_gamma0(M: int, count: int, seed: int = 0, bound: int = 3) -> list[GroupElement]:
    rng = random.Random(seed)
    return [random_gamma0(M, rng, bound) for _ in range(count)]
