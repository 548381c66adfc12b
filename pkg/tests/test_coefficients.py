import math

import pytest
from hypothesis import given, strategies as st

from stepflow.coefficients import (
    NondimensionalCoefficients,
    PhysicalParams,
    PRESETS,
    beta_branch,
    beta_for,
    derive_coefficients,
    preset,
)


def test_reference_material_goldens():
    c = preset("zhu2009")
    assert c.c1 == pytest.approx(7.2575e6, rel=1e-3)
    assert c.c2 == pytest.approx(1.1719e8, rel=1e-3)
    assert c.gamma0 == pytest.approx(9.7109e-8, rel=5e-3)
    assert 125 <= c.beta <= 135


def test_silicon_beta_ranges():
    assert 3330 <= preset("si113").beta <= 3530
    assert 38 <= preset("si111").beta <= 42


def test_sigma0_formula():
    p = PRESETS["zhu2009"]
    c = derive_coefficients(p)
    assert c.sigma0 == pytest.approx(2 * p.G * (1 + p.nu) * p.eps0 / (1 - p.nu))


def test_c3_formula():
    p = PRESETS["zhu2009"]
    assert derive_coefficients(p).c3 == pytest.approx(p.g3 / (3 * p.a))


def test_gamma0_cancels_linear_coefficient():
    c = preset("zhu2009")
    assert c.c1 * math.log(c.gamma0) + c.c2 == pytest.approx(0.0, abs=1e-6 * c.c2)


def test_beta_branches():
    # sqrt(c1/(3 c3)) = 1 boundary; gamma0 below it picks the dipole branch
    assert beta_branch(1.0, 1.0 / 3.0, 0.5) == "dipole"
    assert beta_for(1.0, 1.0 / 3.0, 0.5) == pytest.approx(2.0 - 0.5)
    # gamma0 above the boundary switches to 1/gamma0
    assert beta_branch(1.0, 1.0 / 3.0, 2.0) == "inverse-offset"
    assert beta_for(1.0, 1.0 / 3.0, 2.0) == pytest.approx(0.5)


def test_beta_accepts_underflowed_gamma0():
    # exp(-c2/c1) underflows for very weak misfit; that limit is finite
    assert beta_for(1.0, 1.0, 0.0) == pytest.approx(2.0 * math.sqrt(3.0))


def test_zero_misfit_rejected():
    p = PRESETS["zhu2009"]
    with pytest.raises(ValueError):
        derive_coefficients(
            PhysicalParams(p.g1, p.g3, p.a, p.nu, p.G, p.r_c, eps0=0.0)
        )


@pytest.mark.parametrize(
    "kwargs",
    [
        {"g3": -1.0},
        {"a": 0.0},
        {"nu": 0.5},
        {"nu": -0.1},
        {"G": 0.0},
        {"r_c": 0.0},
    ],
)
def test_physical_param_validation(kwargs):
    base = dict(g1=0.03, g3=8.58, a=0.27e-9, nu=0.25, G=3.8e10, r_c=0.27e-9, eps0=0.012)
    base.update(kwargs)
    with pytest.raises(ValueError):
        PhysicalParams(**base)


def test_unknown_preset():
    with pytest.raises(KeyError):
        preset("unobtainium")


@given(
    c1=st.floats(0.1, 10.0),
    c2=st.floats(-5.0, 5.0),
)
def test_gamma0_identity_property(c1, c2):
    c = NondimensionalCoefficients(c1=c1, c2=c2)
    assert c.c1 * math.log(c.gamma0) + c.c2 == pytest.approx(0.0, abs=1e-9 * (abs(c2) + 1))


def test_nondimensional_validation():
    with pytest.raises(ValueError):
        NondimensionalCoefficients(c1=0.0)
    with pytest.raises(ValueError):
        NondimensionalCoefficients(a=-1.0)
