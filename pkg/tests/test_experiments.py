import math
from dataclasses import replace

import numpy as np
import pytest

from stepflow.coefficients import NondimensionalCoefficients, PRESETS
from stepflow.energy import total_energy
from stepflow.experiments import (
    BunchProfile,
    MeanderProfile,
    bunch_energy_1p1,
    bunch_first_term,
    bunch_first_term_quadrature,
    bunch_first_term_smallwidth,
    default_bunch_density,
    dominant_balance_amplitude,
    lower_bound_constant,
    meander_amplitude_residual,
    meander_energy,
    meander_energy_density0,
    minimize_meander_energy,
    transition_scan,
    upper_bound_prefactor,
    upper_bound_scaling_scan,
)
from stepflow.field import Grid
from stepflow.local_energy import psi
from stepflow.profiles import meander_field

C = NondimensionalCoefficients()
OMEGA = 2 * np.pi


def test_profile_validation():
    with pytest.raises(ValueError):
        MeanderProfile(A=-1.0, omega=OMEGA, B=1.0)
    with pytest.raises(ValueError):
        MeanderProfile(A=1.0, omega=0.0, B=1.0)
    with pytest.raises(ValueError):
        BunchProfile(H=1.0, rho=0.5, L=1.0)  # width 2 > period
    with pytest.raises(ValueError):
        BunchProfile(H=1.0, rho=-1.0, L=1.0)


def test_flat_limit_family_consistency():
    e = meander_energy(MeanderProfile(0.0, OMEGA, 1.0), C)
    assert e.nonlocal_term == 0.0
    assert e.total == pytest.approx(
        float(psi(np.array([1.0, 0.0]), C)) * C.L**2, rel=1e-12
    )


def test_meander_energy_matches_gridded_field():
    c = replace(C, a=0.05)
    grid = Grid(256, 1.0)
    for A in (0.3, 1.25):
        f = meander_field(grid, A, 2 * OMEGA, 1.0)
        eg = total_energy(f, c).total
        eq = meander_energy(MeanderProfile(A, 2 * OMEGA, 1.0), c, quadrature_n=65536).total
        assert eg == pytest.approx(eq, rel=1e-6)


def test_dominant_balance_scalings():
    a0 = dominant_balance_amplitude(C, OMEGA, 1.0, a=1e-3)
    assert dominant_balance_amplitude(C, 2 * OMEGA, 1.0, a=1e-3) == pytest.approx(a0 / 4)
    assert dominant_balance_amplitude(C, OMEGA, 2.0, a=1e-3) == pytest.approx(a0 / 2)
    assert dominant_balance_amplitude(C, OMEGA, 1.0, a=1e-4) == pytest.approx(10 * a0)
    assert a0 == pytest.approx(C.c1 * np.pi**2 / (4 * C.c3 * OMEGA**2) * 1e3)


def test_dominant_balance_near_argmin():
    for a in (1e-3, 1e-4):
        ca = replace(C, a=a)
        a_star = dominant_balance_amplitude(ca, OMEGA, 1.0)
        a_min, _ = minimize_meander_energy(ca, OMEGA, 1.0, quadrature_n=65536)
        assert abs(a_min / a_star - 1) < 0.05


def test_first_order_condition_at_argmin():
    ca = replace(C, a=1e-3)
    a_min, e_min = minimize_meander_energy(ca, OMEGA, 1.0, quadrature_n=65536)
    res = meander_amplitude_residual(a_min, ca, OMEGA, 1.0, quadrature_n=65536)
    # normalize by the scale of either term in the balance
    assert abs(res) < 1e-6 * ca.c1 * np.pi * OMEGA * a_min


def test_local_minimality_in_family():
    ca = replace(C, a=1e-3)
    a_min, e_min = minimize_meander_energy(ca, OMEGA, 1.0, quadrature_n=65536)
    for factor in (0.5, 2.0):
        e = meander_energy(MeanderProfile(factor * a_min, OMEGA, 1.0), ca, quadrature_n=65536).total
        assert e_min <= e


def test_scaling_scan_slope_and_prefactor():
    rep = upper_bound_scaling_scan(C, OMEGA, 1.0, np.geomspace(1e-1, 1e-4, 7))
    assert rep.fitted_slope == pytest.approx(-2.0, abs=0.05)
    assert rep.fitted_prefactor == pytest.approx(rep.reference_prefactor, rel=0.10)
    # strictly more negative energies as a decreases
    assert np.all(np.diff(rep.entries["E_min"]) < 0)


def test_scaling_scan_prefactor_c3_dependence():
    ref8 = upper_bound_prefactor(replace(C, c3=8.0), OMEGA)
    assert ref8 == pytest.approx(upper_bound_prefactor(C, OMEGA) / 64)


def test_regularization_invisible_in_scaling():
    rep = upper_bound_scaling_scan(C, OMEGA, 1.0, np.geomspace(1e-1, 1e-4, 7))
    e = rep.entries
    rel = abs(e["E_min_log0"][-1] - e["E_min"][-1]) / abs(e["E_min"][-1])
    assert rel < 1e-3


def test_scaling_report_validation():
    with pytest.raises(ValueError):
        upper_bound_scaling_scan(C, OMEGA, 1.0, [1e-2, 1e-3, 1e-4])  # too few
    with pytest.raises(ValueError):
        upper_bound_scaling_scan(C, OMEGA, 1.0, [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0])


def test_scaling_report_csv(tmp_path):
    rep = upper_bound_scaling_scan(C, OMEGA, 1.0, np.geomspace(1e-1, 1e-4, 6), quadrature_n=16384)
    p = tmp_path / "scan.csv"
    rep.write_csv(p)
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    assert data.shape == (6, 4)
    d = rep.as_dict()
    assert d["n_points"] == 6


def test_lower_bound_trivials():
    lb0 = lower_bound_constant(C, 0.0, a=1e-3)
    assert lb0.total == pytest.approx(-lb0.leading_constant * 1e6, rel=1e-12)
    assert lb0.leading_constant == pytest.approx(C.c1**3 * C.L**5 / (54 * C.c3**2))


def test_lower_bound_minimizer_is_derivative_root():
    ca = replace(C, a=0.05)
    B = 1.0
    lb = lower_bound_constant(ca, B)
    r = lb.minimizer_slope
    # g(r) = -(c1 L / 2) r^2 + a c3 r^3 - 3 a c3 |B| r^2 has g'(r) = 0 there
    gp = -ca.c1 * ca.L * r + 3 * ca.a * ca.c3 * r**2 - 6 * ca.a * ca.c3 * abs(B) * r
    assert abs(gp) < 1e-10 * ca.c1 * ca.L * r


def test_lower_bound_sandwiches_energies():
    ca = replace(C, a=0.05)
    from stepflow.field import random_band_limited

    rng = np.random.Generator(np.random.Philox(12))
    lb = lower_bound_constant(ca, 1.0)
    grid = Grid(64, 1.0)
    for _ in range(20):
        f = random_band_limited(grid, rng, rms=rng.uniform(0.01, 0.3), B=(1.0, 0.0), kmax=10)
        assert total_energy(f, ca).total >= lb.total
    for a in np.geomspace(1e-1, 1e-4, 7):
        cb = replace(C, a=a)
        _, e_min = minimize_meander_energy(cb, OMEGA, 1.0, quadrature_n=16384)
        assert e_min >= lower_bound_constant(cb, 1.0).total


def test_bunch_first_term_vanishes_at_matched_density():
    p = BunchProfile(H=0.1, rho=np.pi * 0.1 / 1.0, L=1.0)
    assert bunch_first_term(p, C.c1) == pytest.approx(0.0, abs=1e-15)


def test_bunch_quadrature_matches_smallwidth_form():
    for a in (1e-4, 1e-6):
        rho = default_bunch_density(C, 0.1, a)
        p = BunchProfile(0.1, rho, 1.0)
        q = bunch_first_term_quadrature(p, C.c1)
        sw = bunch_first_term_smallwidth(p, C.c1)
        assert sw == pytest.approx(q, rel=1e-5 if a == 1e-4 else 1e-7)


def test_bunch_energy_loga_coefficient():
    H, L = 0.1, 1.0
    a_list = np.geomspace(1e-3, 1e-7, 9)
    e = [
        bunch_energy_1p1(BunchProfile(H, default_bunch_density(C, H, a), L), C, a)
        for a in a_list
    ]
    slope = np.polyfit(np.log(a_list), e, 1)[0]
    # E ~ (1/2) c1 L H^2 log a at leading order since rho* ~ a^(-1/2)
    assert 2 * slope == pytest.approx(C.c1 * L * H**2, rel=0.05)


def test_default_bunch_density_value():
    assert default_bunch_density(C, 0.1, 1e-4) == pytest.approx(
        math.sqrt(C.c1 * 0.1 / (2 * C.c3)) * 100
    )


def test_transition_scan_terrace_width():
    rep = transition_scan("l_t", PRESETS["zhu2009"], N=15, fixed=0.012, n_points=25)
    d = rep.diff
    assert int(np.sum(d[:-1] * d[1:] < 0)) == 1
    assert d[0] > 0  # bunching favored at small terrace width
    assert d[-1] < 0
    assert rep.crossing is not None


def test_transition_scan_misfit():
    a = PRESETS["zhu2009"].a
    rep = transition_scan("eps0", PRESETS["zhu2009"], N=10, fixed=80 * a, n_points=25)
    d = rep.diff
    assert int(np.sum(d[:-1] * d[1:] < 0)) == 1
    assert d[0] > 0  # bunching favored at small misfit
    assert rep.crossing is not None


def test_transition_scan_skips_zero_misfit():
    a = PRESETS["zhu2009"].a
    rep = transition_scan(
        "eps0", PRESETS["zhu2009"], N=10, fixed=80 * a, values=[0.0, 0.005, 0.02]
    )
    assert rep.skipped == (0.0,)
    assert rep.values.size == 2


def test_transition_scan_no_crossing_reported_cleanly():
    a = PRESETS["zhu2009"].a
    rep = transition_scan(
        "eps0", PRESETS["zhu2009"], N=10, fixed=80 * a, values=[0.02, 0.03, 0.05]
    )
    assert rep.crossing is None
    assert rep.as_dict()["message"] == "no crossing in range"


def test_transition_scan_csv(tmp_path):
    rep = transition_scan("l_t", PRESETS["zhu2009"], N=15, fixed=0.012, n_points=8)
    p = tmp_path / "scan.csv"
    rep.write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "l_t,E21_density,E11_density,diff"
    assert len(lines) == 9


def test_transition_scan_rejects_bad_vary():
    with pytest.raises(ValueError):
        transition_scan("temperature", PRESETS["zhu2009"], N=10, fixed=1.0)
