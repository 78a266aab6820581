"""Hecke eigenvalues of eta(8z)^3 and theta^3, and the relations the amplifier relies on.

eta(8z)^3 is a weight 3/2 cusp form on Gamma_0(64) with T(p^2) eigenvalue
chi_{-4}(p)(p + 1).  theta^3 is not cuspidal and has eigenvalue p + 1.

    python3 demos/hecke_eigenvalues.py
"""
from halfsup.hecke import eigenvalue_exact, eigenvalue_tau, verify_hecke_relations
from halfsup.qexp import eta8_cubed, theta_series

f = eta8_cubed(15000)
th = theta_series(3000)
g = th * th * th

print("exact T(p^2) eigenvalues")
print("   p   eta(8z)^3   chi(p)(p+1)   theta^3")
for p in (3, 5, 7, 11):
    lam_f, res_f = eigenvalue_exact(f, p)
    lam_g, res_g = eigenvalue_exact(g, p)
    chi = 1 if p % 4 == 1 else -1
    assert res_f == 0 and res_g == 0
    print("  %2d   %9s   %11d   %7s" % (p, lam_f, chi * (p + 1), lam_g))

print("\nnormalised tau(p^2), tau(p^4) of eta(8z)^3 from the double coset")
recs = [eigenvalue_tau(f, p) for p in (3, 5, 7)]
for r in recs:
    print("  p=%d  tau(p^2)=%+.6f  tau(p^4)=%+.6f" % (r.p, r.tau_p2.real, r.tau_p4.real))

rep = verify_hecke_relations(recs)
print("\n%d relation checks, all hold: %s" % (len(rep.checks), rep.passed))
