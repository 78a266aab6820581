"""Integer and character arithmetic for half-integral weight forms.

Kronecker symbols, the theta multiplier, the unimodular cocycle J, slash
actions, Atkin-Lehner matrices for Gamma_0(2N) and the decomposition of
normalizer elements into gamma * W(Q) * A^i * W(2)^j.
"""
from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def factorize(n: int) -> dict[int, int]:
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    return all(n % p for p in range(3, r + 1, 2))


def primes_between(lo: float, hi: float) -> list[int]:
    return [p for p in range(max(2, math.ceil(lo)), math.floor(hi) + 1) if is_prime(p)]


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())


def divisors(n: int) -> list[int]:
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n > 0."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("jacobi needs odd positive n")
    a %= n
    s = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                s = -s
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            s = -s
        a %= n
    return s if n == 1 else 0


def kronecker_symbol(c: int, d: int) -> int:
    """Kronecker symbol (c/d).

    Conventions: (c/-1) = -1 if c < 0 else 1, (0/+-1) = 1, (c/2) = 0 for even
    c and (-1)^((c^2-1)/8) for odd c.  For odd d this is the symbol used in
    the theta multiplier.
    """
    if c == 0 and d == 0:
        raise ValueError("(0/0) is undefined")
    if d == 0:
        return 1 if abs(c) == 1 else 0
    s = 1
    if d < 0:
        d = -d
        if c < 0:
            s = -s
    while d % 2 == 0:
        d //= 2
        if c % 2 == 0:
            return 0
        if c % 8 in (3, 5):
            s = -s
    if d == 1:
        return s
    return s * jacobi(c, d)


def eps_d(d: int) -> complex:
    """1 if d = 1 mod 4, i if d = 3 mod 4 (also for negative d)."""
    if d % 2 == 0:
        raise ValueError("eps_d needs odd d")
    return 1 + 0j if d % 4 == 1 else 1j


# ---------------------------------------------------------------- characters

@dataclass(frozen=True)
class DirichletCharacter:
    """A character mod `modulus` stored as residue -> exponent in Q/Z.

    chi(r) = exp(2 pi i * values[r]) for gcd(r, modulus) = 1, else 0.
    """
    modulus: int
    values: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        table = dict(self.values)
        units = [r for r in range(self.modulus) if math.gcd(r, self.modulus) == 1]
        if sorted(table) != units:
            raise ValueError("character table must list exactly the units mod %d" % self.modulus)
        m = self.modulus
        for r in units:
            for s in units:
                if (table[r] + table[s] - table[r * s % m]) % 1 != 0:
                    raise ValueError("character table is not multiplicative at (%d, %d)" % (r, s))

    @classmethod
    def from_function(cls, modulus: int, fn) -> "DirichletCharacter":
        vals = []
        for r in range(modulus):
            if math.gcd(r, modulus) == 1:
                vals.append((r, Fraction(fn(r)) % 1))
        return cls(modulus, tuple(vals))

    @classmethod
    def trivial(cls, modulus: int = 1) -> "DirichletCharacter":
        return cls.from_function(modulus, lambda r: 0)

    @classmethod
    def kronecker(cls, D: int, modulus: int) -> "DirichletCharacter":
        """n -> (D/n) restricted to units mod `modulus` (must be periodic)."""
        def expo(r):
            k = kronecker_symbol(D, r)
            if k == 0:
                raise ValueError("(D/r) vanishes on a unit r=%d" % r)
            return Fraction(0) if k == 1 else Fraction(1, 2)
        chi = cls.from_function(modulus, expo)
        for r, _ in chi.values:
            if kronecker_symbol(D, r + modulus) != kronecker_symbol(D, r):
                raise ValueError("(%d/.) is not periodic mod %d" % (D, modulus))
        return chi

    @property
    def table(self) -> dict[int, Fraction]:
        return dict(self.values)

    def exponent(self, n: int) -> Fraction | None:
        if math.gcd(n, self.modulus) != 1:
            return None
        return self.table[n % self.modulus]

    def __call__(self, n: int) -> complex:
        e = self.exponent(n)
        if e is None:
            return 0j
        if e == 0:
            return 1 + 0j
        if e == Fraction(1, 2):
            return -1 + 0j
        return cmath.exp(2j * math.pi * e)

    def extend(self, modulus: int) -> "DirichletCharacter":
        if modulus % self.modulus:
            raise ValueError("can only extend to a multiple of the modulus")
        t = self.table
        return DirichletCharacter.from_function(modulus, lambda r: t[r % self.modulus])

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        m = math.lcm(self.modulus, other.modulus)
        a, b = self.extend(m).table, other.extend(m).table
        return DirichletCharacter.from_function(m, lambda r: a[r] + b[r])

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple((r, (-e) % 1) for r, e in self.values))

    def same_as(self, other: "DirichletCharacter") -> bool:
        m = math.lcm(self.modulus, other.modulus)
        return self.extend(m).values == other.extend(m).values

    def is_trivial(self) -> bool:
        return all(e == 0 for _, e in self.values)

    def to_json(self) -> dict:
        return {"modulus": self.modulus,
                "values": [[r, e.numerator, e.denominator] for r, e in self.values]}

    @classmethod
    def from_json(cls, obj: dict) -> "DirichletCharacter":
        vals = tuple((int(r), Fraction(int(n), int(o)) % 1) for r, n, o in obj["values"])
        return cls(int(obj["modulus"]), vals)


# ------------------------------------------------------------ group elements

@dataclass(frozen=True)
class GroupElement:
    """Integral 2x2 matrix [[a, b], [c, d]] with positive determinant.

    `phase` is an optional unit multiplying the principal square root in
    the metaplectic lift phi(z) = phase * sqrt(det^(-1/2) (cz + d)).
    """
    a: int
    b: int
    c: int
    d: int
    phase: complex = 1

    def __post_init__(self):
        if self.a * self.d - self.b * self.c <= 0:
            raise ValueError("determinant must be positive: %r" % (self.tuple(),))

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, o: "GroupElement") -> "GroupElement":
        return GroupElement(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                            self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def adj(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def inverse(self) -> "GroupElement":
        if self.det != 1:
            raise ValueError("integral inverse needs det 1; use adj()")
        return self.adj()

    def primitive(self) -> tuple["GroupElement", int]:
        g = reduce(math.gcd, self.tuple())
        return GroupElement(self.a // g, self.b // g, self.c // g, self.d // g), g

    def in_gamma0(self, M: int) -> bool:
        return self.det == 1 and self.c % M == 0

    def __pow__(self, n: int) -> "GroupElement":
        if n < 0:
            return self.inverse() ** (-n)
        out = IDENTITY
        for _ in range(n):
            out = out @ self
        return out

    def __call__(self, z: complex) -> complex:
        return (self.a * z + self.b) / (self.c * z + self.d)

    def __repr__(self):
        return "[[%d, %d], [%d, %d]]" % self.tuple()


IDENTITY = GroupElement(1, 0, 0, 1)
T = GroupElement(1, 1, 0, 1)
S = GroupElement(0, -1, 1, 0)


def sl2_from_bottom(c: int, d: int) -> GroupElement:
    """Some [[a, b], [c, d]] in SL2(Z) for coprime (c, d)."""
    g, x, y = ext_gcd(d, c)  # d x + c y = 1
    if g != 1:
        raise ValueError("bottom row must be coprime")
    return GroupElement(x, -y, c, d)


def random_gamma0(M: int, rng: random.Random, bound: int = 20) -> GroupElement:
    """Random element of Gamma_0(M) with |c| <= M*bound and |d| <= bound-ish."""
    while True:
        c = M * rng.randint(-bound, bound)
        d = rng.randint(-bound, bound)
        if d == 0 or math.gcd(c, d) != 1:
            continue
        g = sl2_from_bottom(c, d)
        k = rng.randint(-3, 3)
        g = T ** k @ g if k >= 0 else (T.inverse() ** (-k)) @ g
        return g


def gamma0_index(M: int) -> int:
    """psi(M) = M prod_{p | M} (1 + 1/p)."""
    if M < 1:
        raise ValueError("M >= 1")
    out = M
    for p in factorize(M):
        out = out // p * (p + 1)
    return out


def volume(M: int) -> float:
    return math.pi / 3 * gamma0_index(M)


def _p1_key(c: int, d: int, M: int) -> tuple:
    """Canonical label of (c : d) in P^1(Z/M), one component per prime power."""
    key = []
    for p, e in sorted(factorize(M).items()):
        q = p**e
        cc, dd = c % q, d % q
        if cc % p:
            key.append((1, dd * pow(cc, -1, q) % q))
        elif dd % p:
            key.append((cc * pow(dd, -1, q) % q, 1))
        else:
            raise ValueError("(c, d) not primitive mod %d" % M)
    return tuple(key)


def gamma0_coset_reps(M: int) -> list[GroupElement]:
    """Right coset representatives of Gamma_0(M) in SL2(Z) (psi(M) of them)."""
    comps = []
    mods = []
    for p, e in sorted(factorize(M).items()):
        q = p**e
        mods.append(q)
        pts = [(1, d) for d in range(q)] + [(p * c, 1) for c in range(q // p)]
        comps.append(pts)
    reps = []

    def crt(residues):
        x, m = 0, 1
        for r, q in residues:
            t = (r - x) * pow(m, -1, q) % q
            x, m = x + m * t, m * q
        return x % m

    def rec(i, acc):
        if i == len(comps):
            c = crt([(a[0], q) for a, q in zip(acc, mods)]) if acc else 0
            d = crt([(a[1], q) for a, q in zip(acc, mods)]) if acc else 1
            if c == 0:
                c = M
            while math.gcd(c, d) != 1:
                d += M
            reps.append(sl2_from_bottom(c, d) if M > 1 else IDENTITY)
            return
        for pt in comps[i]:
            rec(i + 1, acc + [pt])

    rec(0, [])
    return reps


def gamma0_generators(M: int) -> list[GroupElement]:
    """Schreier generators of Gamma_0(M) from the coset action on {S, T}."""
    reps = gamma0_coset_reps(M)
    if M == 1:
        return [S, T]
    index = {_p1_key(g.c, g.d, M): g for g in reps}
    gens = []
    seen = set()
    for r in reps:
        for s in (S, T):
            rs = r @ s
            rp = index[_p1_key(rs.c, rs.d, M)]
            h = rs @ rp.inverse()
            assert h.in_gamma0(M)
            if h.tuple() in seen or h.tuple() == (1, 0, 0, 1) or h.tuple() == (-1, 0, 0, -1):
                continue
            neg = (-h.a, -h.b, -h.c, -h.d)
            if neg in seen:
                continue
            seen.add(h.tuple())
            gens.append(h)
    return gens


# -------------------------------------------------------------- multipliers

def theta_multiplier(g: GroupElement, z: complex) -> complex:
    """j(g, z) = eps_d^-1 (c/d) (cz+d)^(1/2), so theta(gz) = j(g, z) theta(z)."""
    if not g.in_gamma0(4):
        raise ValueError("theta multiplier needs an element of Gamma_0(4)")
    return kronecker_symbol(g.c, g.d) / eps_d(g.d) * cmath.sqrt(g.c * z + g.d)


def cocycle_J(g: GroupElement, z: complex) -> complex:
    """J(g, z) = j(g, z)/|j(g, z)|, a unit complex number."""
    v = theta_multiplier(g, z)
    return v / abs(v)


def metaplectic_phi(g: GroupElement, z: complex) -> complex:
    """Unit-free lift phi with phi^2 = det^(-1/2)(cz+d) times the phase marker."""
    if g.in_gamma0(4):
        return theta_multiplier(g, z) * g.phase
    return g.phase * cmath.sqrt((g.c * z + g.d) / math.sqrt(g.det))


def slash(F, kappa: Fraction | float, g: GroupElement, z: complex) -> complex:
    """(F |_kappa g)(z) = (phi/|phi|)^(-2 kappa) F(gz).

    F is a function of z that already carries the y^(kappa/2) factor, so the
    automorphy factor is unimodular and |slash| = |F(gz)|.
    """
    if g.det == 0:
        raise ValueError("non-invertible matrix")
    phi = metaplectic_phi(g, z)
    u = phi / abs(phi)
    k2 = 2 * Fraction(kappa).limit_denominator(1000)
    return _unit_power(u, k2) * F(g(z))


def _unit_power(u: complex, e: Fraction) -> complex:
    # integer powers stay exact-ish, otherwise principal branch
    if Fraction(e).denominator == 1:
        return u ** (-int(e))
    return cmath.exp(-1j * float(e) * cmath.phase(u))


# ------------------------------------------------------- Atkin-Lehner moves

def _check_level(N: int):
    if N < 1 or N % 2 == 0 or not is_squarefree(N):
        raise ValueError("N must be odd and squarefree, got %d" % N)


def atkin_lehner_matrix(Q: int, N: int) -> GroupElement:
    """W(Q) for odd Q | N, or W(2), as used for the group A_0(2N).

    Odd Q: [[Q^2 b, 4N/Q], [4N c, Q]] with Q^2 b - (4N/Q)^2 c = 1, b >= 1 minimal.
    Q = 2: [[4b, N], [2N c, 2]] with 4b - N^2 c = 1, b in 1..N^2.
    """
    _check_level(N)
    if Q == 2:
        b = pow(4, -1, N * N) if N > 1 else 1
        c = (4 * b - 1) // (N * N)
        assert 4 * b - N * N * c == 1
        w = GroupElement(4 * b, N, 2 * N * c, 2)
        assert w.det == 2
        return w
    if Q < 1 or N % Q:
        raise ValueError("Q must divide N or equal 2")
    if Q == 1:
        return IDENTITY
    m = (4 * N // Q) ** 2
    b = pow(Q * Q, -1, m) if m > 1 else 1
    if b == 0:
        b = m
    c = (Q * Q * b - 1) // m
    assert Q * Q * b - m * c == 1
    return GroupElement(Q * Q * b, 4 * N // Q, 4 * N * c, Q)


def matrix_A(N: int) -> GroupElement:
    return GroupElement(1, 0, 2 * N, 1)


def compose_normalizer(g: GroupElement, Q: int, i: int, j: int, N: int) -> GroupElement:
    out = g @ atkin_lehner_matrix(Q, N)
    if i:
        out = out @ matrix_A(N)
    if j:
        out = out @ atkin_lehner_matrix(2, N)
    return out


class NotInNormalizer(ValueError):
    pass


def normalizer_decompose(delta: GroupElement, N: int):
    """Write delta = s * gamma W(Q) A^i W(2)^j with gamma in Gamma_0(4N).

    Returns (gamma, Q, i, j, s) with s a positive rational scalar.  Q is read
    off the determinant of the primitive part; W(2) is peeled when that
    determinant is even; A is peeled by trying i in {0, 1}.
    """
    _check_level(N)
    prim, content = delta.primitive()
    scale = Fraction(content)
    q = prim.det
    if (2 * N) % q:
        raise NotInNormalizer("det %d of the primitive part does not divide 2N" % q)
    j = 1 if q % 2 == 0 else 0
    x = prim
    if j:
        x, g = (x @ atkin_lehner_matrix(2, N).adj()).primitive()
        scale *= Fraction(g, 2)
    Q = x.det
    if N % Q:
        raise NotInNormalizer("odd part %d does not divide N" % Q)
    wq = atkin_lehner_matrix(Q, N)
    for i in (0, 1):
        y = x @ matrix_A(N).inverse() if i else x
        g, h = (y @ wq.adj()).primitive()
        if g.det == 1 and g.c % (4 * N) == 0:
            return g, Q, i, j, scale * Fraction(h, Q)
    raise NotInNormalizer("no gamma W(Q) A^i W(2)^j factorisation for %r" % (delta,))
