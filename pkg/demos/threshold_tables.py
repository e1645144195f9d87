"""Tabulate the core-measure thresholds of the focusing NLS energy on a
graph with N half-lines.

For p in [4,6) two lengths split the axis: above L1 a plateau-plus-tails
competitor has negative energy (ground state exists), below L2 a piecewise
smallness argument rules minimizers out. The window [L2, L1] is not resolved
by either bound. For p in (2,4) existence is unconditional and both columns
are moot.
"""

from graphnls import const_Cp, mass_thresholds, threshold_report

print("existence / nonexistence thresholds, mu = 1")
print(f"{'p':>5} {'N':>3} {'L1 (exist above)':>18} {'L2 (none below)':>17} {'gap':>9}")
for p in (4.0, 4.5, 5.0, 5.5):
    for n in (1, 2, 3):
        rep = threshold_report(p, 1.0, n)
        gap = rep.l1_exist / rep.l2_nonexist
        print(f"{p:5.1f} {n:3d} {rep.l1_exist:18.6f} {rep.l2_nonexist:17.6f} {gap:9.2f}")
print()

print("competitor constant C_p (closed form at p=5: 675/256)")
for p in (4.2, 4.6, 5.0, 5.4, 5.8):
    print(f"  C_{p:.1f} = {const_Cp(p):.8f}")
print(f"  check: C_5 - 675/256 = {const_Cp(5.0) - 675.0 / 256.0:.2e}")
print()

print("same dichotomy read as a mass threshold at fixed core measure")
print(f"{'L':>6} {'mu_exist (above)':>17} {'mu_nonexist (below)':>20}")
for L in (0.5, 1.0, 2.0, 4.0):
    mt = mass_thresholds(4.0, L, 2)
    print(f"{L:6.2f} {mt.mu_exist:17.6f} {mt.mu_nonexist:20.6f}")
print()

print("mass scaling: L1 and L2 share the exponent mu^((2-p)/(6-p)),")
print("so L1/L2 is independent of mu:")
for mu in (0.25, 1.0, 4.0):
    rep = threshold_report(5.0, mu, 2)
    print(f"  mu={mu:5.2f}: L1={rep.l1_exist:12.6f} L2={rep.l2_nonexist:12.6f} "
          f"ratio={rep.l1_exist / rep.l2_nonexist:.6f}")
