"""Cross-route convergence of the lattice resolvent and the Green constants.

Prints R(mu) from both evaluation routes over a mu grid for each dimension,
the reciprocal Green constants r_d, and the fitted tail-bound constants.
"""

import numpy as np

from pamcat.lattice_green import (
    green_tail_bound_constant,
    r_d,
    resolvent_routes,
)

print(f"{'d':>2} {'mu':>10} {'fourier':>18} {'time-domain':>18} {'gap':>10}")
for d in range(1, 6):
    for mu in (0.0, 1e-4, 0.1, 1.0, 10.0):
        if mu == 0.0 and d <= 2:
            print(f"{d:>2} {mu:>10.4g} {'inf':>18} {'inf':>18} {'-':>10}")
            continue
        f, t = resolvent_routes(mu, d)
        print(f"{d:>2} {mu:>10.4g} {f:>18.12f} {t:>18.12f} {abs(f-t):>10.2e}")

print("\nreciprocal Green constants r_d = 1/R(0):")
for d in range(1, 6):
    print(f"  d={d}:  r_d = {r_d(d):.12f}")

print("\nfitted tail-bound constants c_d (G_a <= c_d / (r_d a^((d-2)/2))):")
for d in (3, 4, 5):
    print(f"  d={d}:  c_d = {green_tail_bound_constant(d):.6f}")
