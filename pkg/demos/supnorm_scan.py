"""Sup norm against L2 norm for eta(8z)^3 and its dilates eta(8dz)^3.

F(z) = y^(3/4) |f(z)| is invariant under Gamma_0(64 d^2).  The sup is found by
a grid search plus local refinement, so it is a lower bound; the report also
gives a crude derivative-based gap.  With the 1/V normalised L2 norm the ratio
stays flat along this family.

    python3 demos/supnorm_scan.py
"""
from halfsup.qexp import dilate, eta8_cubed
from halfsup.supnorm import fit_results, sup_search

base = eta8_cubed(2000)
results = []
print("   d  level       sup     L2(1/V)     L2(raw)   sup/L2(1/V)")
for d in (1, 3, 5):
    f = base if d == 1 else dilate(base, d)
    r = sup_search(f, grid=(31, 31), refine_depth=2)
    results.append(r)
    print("  %2d  %5d  %.6f  %.6f  %.6f  %.6f" % (d, r.level, r.sup_value, r.l2_V_included,
                                                 r.l2_V_excluded, r.ratio))

for conv in ("V_included", "V_excluded"):
    fit = fit_results(results, conv)
    print("fitted level exponent (%s): %+.4f" % (conv, fit.alpha))
