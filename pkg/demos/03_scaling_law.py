"""Energy scaling of the optimal meander with lattice spacing.

Minimizing the meander family energy over the amplitude at decreasing a
reveals the a^{-2} divergence; the fitted prefactor matches the closed-form
dominant balance.  Writes scaling.csv next to this script.
"""

from pathlib import Path

import numpy as np

from stepflow import NondimensionalCoefficients
from stepflow.experiments import upper_bound_prefactor, upper_bound_scaling_scan

here = Path(__file__).parent
c = NondimensionalCoefficients(a=1.0)
omega, B = 2 * np.pi, 1.0

report = upper_bound_scaling_scan(
    c, omega, B, a_list=np.geomspace(1e-1, 1e-4, 7), quadrature_n=16384
)
pred = upper_bound_prefactor(c, omega)
print(f"fitted slope:     {report.fitted_slope:+.4f}  (expect -2)")
print(f"prefactor ratio:  {report.fitted_prefactor / pred:.4f}  (expect 1)")
report.write_csv(here / "scaling.csv")
print("wrote scaling.csv")
