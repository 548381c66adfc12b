"""From physical material constants to the three energy coefficients.

Each preset is a published parameter set; the derived c1, c2, c3 feed the
continuum energy, and beta is the strict convexity margin of the slope
density (per unit lattice spacing a).
"""

from stepflow import PRESETS, beta_for, preset

for name in PRESETS:
    c = preset(name)
    print(f"{name:12s}  c1={c.c1:.4e}  c2={c.c2:.4e}  c3={c.c3:.4e}")
    print(f"{'':12s}  gamma0={c.gamma0:.4e}  beta={beta_for(c.c1, c.c3, c.gamma0):.4f}")
