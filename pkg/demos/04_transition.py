"""Meander vs bunch: where the preferred morphology flips.

Sweeping the terrace width (and separately the misfit) compares the 2+1-D
meander energy density against the 1+1-D bunch density; a sign change in
their difference marks the transition.  Writes transition_lt.csv and
transition_eps0.csv next to this script.
"""

from pathlib import Path

from stepflow import PRESETS
from stepflow.experiments import transition_scan

here = Path(__file__).parent

for vary, fname in (("l_t", "transition_lt.csv"), ("eps0", "transition_eps0.csv")):
    fixed = 0.012 if vary == "l_t" else 80 * PRESETS["zhu2009"].a
    report = transition_scan(vary, PRESETS["zhu2009"], N=15, fixed=fixed)
    d = report.as_dict()
    print(f"vary {vary:5s}: crossings={d['n_crossings']}", end="")
    if report.crossings:
        print(f"  at {report.crossings[0]:.4e}", end="")
    print(f"  bunching favored at start: {d['bunching_favored_at_start']}")
    report.write_csv(here / fname)
    print(f"wrote {fname}")
