"""The radial polaron maximizer and its diagnostics.

Solves sup [A(f) - B(f)] over normalized radial profiles, prints the
variational constant with its consistency checks, and writes the
unit-coefficient maximizer profile to polaron_profile.csv.
"""

import csv
import math

from pamcat.params import ModelParams
from pamcat.polaron import P_p_full, P_p_truncated, maximize_P

res = maximize_P()
A, B = res.coulomb_term, res.gradient_term
print(f"P                  = {res.P:.10e}")
print(f"coulomb term A     = {A:.10e}")
print(f"gradient term B    = {B:.10e}")
print(f"virial |A-2B|/A    = {abs(A - 2 * B) / A:.2e}")
print(f"4 sqrt(pi) P       = {4 * math.sqrt(math.pi) * res.P:.10e}")
print(f"iterations         = {res.iterations}, residual {res.residual:.1e}")

params = ModelParams(d=3)
full = P_p_full(params)
print(f"\nP_p (d=3 defaults) = {full['value']:.10e}")
print(f"diagnostic route   = {full['diagnostic_value']:.10e}")
for eps, K in ((1e-6, 1e6), (1e-3, 1e3)):
    v = P_p_truncated(eps, K, params)
    print(f"time window ({eps:g}, {K:g}): {v:.4e}  "
          f"(deficit {full['value'] - v:.4e}, always >= 0)")

prof = res.profile
with open("polaron_profile.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["r", "f"])
    for r, f in zip(prof.grid.nodes(), prof.values):
        w.writerow([f"{r:.9g}", f"{f:.9g}"])
print("\nwrote polaron_profile.csv (unit-coefficient maximizer)")
