"""How many matrices of determinant l <= L move z only a little?

For z in the fundamental set F(2N), count integer matrices
[[a, b], [c, d]] with c = 0 mod N, ad - bc = l <= L and u(gz, z) <= delta, then
compare the cumulative count with K sqrt(L), K = 1 + L N y^2.

    python3 demos/counting_lemma.py
"""
import random

from halfsup.geometry import reduce_to_F
from halfsup.latcount import count_matrices, growth_flag, verify_counting_lemma


def samples(N, n, rng):
    # roughly uniform for dx dy / y^2 on the strip y >= 0.1, then reduced
    pts = []
    while len(pts) < n:
        z = complex(rng.uniform(-0.5, 0.5), 0.1 / rng.random())
        pts.append(reduce_to_F(z, N).z)
    return pts


z = 0.1 + 1.2j
print("matrices with c = 0 mod 4 (N = 4) moving %s by u <= 1" % z)
for ell in (1, 4, 9, 25, 49):
    n, mats = count_matrices(z, ell, 4, 1.0, listing=True)
    print("  l=%2d  count=%2d  e.g. %s" % (ell, n, mats[-1]))

rng = random.Random(0)
reports = []
for N in (1, 3, 5):
    rep = verify_counting_lemma(samples(N, 10, rng), 2000, N)
    reports.append(rep)
    print("N=%d  max count/(K sqrt L) over 10 points: %.2f" % (N, rep.fitted_constant))
print("constant grows with N:", growth_flag(reports))
