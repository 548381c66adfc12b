import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stepflow.coefficients import NondimensionalCoefficients, preset
from stepflow.local_energy import (
    SampleSpec,
    convexity_audit,
    hessian_psi,
    hessian_psi0,
    psi,
    psi0,
    zeta,
)

C = NondimensionalCoefficients()
PHYS = preset("zhu2009")


def test_psi_matches_literal_formula():
    # the log1p form equals a(c1 r log(r+g0) + c2 r + c3 r^3) where safe
    for r in (1e-3, 0.1, 1.0, 50.0):
        p = np.array([r, 0.0])
        literal = C.a * (
            C.c1 * r * np.log(r + C.gamma0) + C.c2 * r + C.c3 * r**3
        )
        assert float(psi(p, C)) == pytest.approx(literal, rel=1e-12)


def test_psi_at_zero_and_cubic_floor():
    assert float(psi(np.zeros(2), C)) == 0.0
    rng = np.random.Generator(np.random.Philox(0))
    p = rng.normal(size=(100, 2)) * 10
    r = np.hypot(p[:, 0], p[:, 1])
    assert np.all(psi(p, C) >= C.a * C.c3 * r**3 - 1e-15)


def test_psi0_at_zero():
    assert float(psi0(np.zeros(2), C)) == 0.0


def test_regularization_negligible_at_physical_slopes():
    # on the reference material the offset is ~1e-7; at realistic slopes the
    # two densities agree to better than a part in 1e4
    for r in (1e-2, 0.1, 0.5):
        p = np.array([r, 0.0])
        v, v0 = float(psi(p, PHYS)), float(psi0(p, PHYS))
        assert abs(v - v0) / abs(v0) < 1e-4


def test_zeta_is_gradient_of_psi():
    rng = np.random.Generator(np.random.Philox(1))
    eps = 1e-7
    for _ in range(30):
        p = rng.normal(size=2) * rng.choice([1e-3, 0.1, 1.0, 20.0])
        z = zeta(p, C)
        for i in range(2):
            dp = np.zeros(2)
            dp[i] = eps * max(1.0, abs(p[i]))
            fd = (float(psi(p + dp, C)) - float(psi(p - dp, C))) / (2 * dp[i])
            assert z[i] == pytest.approx(fd, rel=1e-5, abs=1e-10)


def test_zeta_zero_at_origin_and_continuous():
    assert np.allclose(zeta(np.zeros(2), C), 0.0)
    tiny = zeta(np.array([1e-300, 0.0]), C)
    assert np.all(np.isfinite(tiny))


@given(
    p1=st.floats(-5, 5),
    p2=st.floats(-5, 5),
)
@settings(max_examples=50, deadline=None)
def test_zeta_odd(p1, p2):
    p = np.array([p1, p2])
    assert np.allclose(zeta(-p, C), -zeta(p, C), atol=1e-12)


@given(
    p1=st.floats(-3, 3),
    p2=st.floats(-3, 3),
    q1=st.floats(-3, 3),
    q2=st.floats(-3, 3),
)
@settings(max_examples=50, deadline=None)
def test_psi_midpoint_convex(p1, p2, q1, q2):
    p, q = np.array([p1, p2]), np.array([q1, q2])
    mid = float(psi((p + q) / 2, C))
    assert mid <= (float(psi(p, C)) + float(psi(q, C))) / 2 + 1e-12


def test_hessian_matches_fd_of_zeta():
    rng = np.random.Generator(np.random.Philox(2))
    eps = 1e-6
    for _ in range(20):
        p = rng.normal(size=2) * rng.choice([0.05, 1.0, 10.0])
        if np.hypot(*p) < 1e-3:
            continue
        H = hessian_psi(p, C).H
        for i in range(2):
            dp = np.zeros(2)
            dp[i] = eps * max(1.0, abs(p[i]))
            fd = (zeta(p + dp, C) - zeta(p - dp, C)) / (2 * dp[i])
            assert np.allclose(H[:, i], fd, rtol=1e-4, atol=1e-8)


def test_hessian_singular_at_origin():
    with pytest.raises(ValueError):
        hessian_psi(np.zeros(2), C)
    with pytest.raises(ValueError):
        hessian_psi0(np.zeros(2), C)


def test_strict_convexity_margin_pointwise():
    floor = C.a * C.c1 * C.beta
    rng = np.random.Generator(np.random.Philox(3))
    for _ in range(50):
        p = rng.normal(size=2) * rng.choice([1e-6, 1e-2, 1.0, 100.0])
        if np.hypot(*p) == 0:
            continue
        s = hessian_psi(p, C)
        assert s.eigmin >= floor * (1 - 1e-12)


def test_original_density_indefinite_at_small_slope():
    s = hessian_psi0(np.array([1e-4, 0.0]), C)
    assert s.eigmin < 0


def test_audit_report(tmp_path):
    report = convexity_audit(C, SampleSpec.default_for(C, n_samples=2500))
    assert report.min_eig_psi_rel >= -1e-9
    assert report.min_margin_rel >= -1e-9
    assert report.psi0_witness is not None
    # witness really is a nonconvexity point on an axis
    w = np.array(report.psi0_witness)
    assert w[1] == 0.0
    assert hessian_psi0(w, C).eigmin < 0
    d = report.as_dict()
    assert d["n_samples"] == report.samples.size
    p = tmp_path / "audit.csv"
    report.write_csv(p)
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    assert data.shape == (report.samples.size, 6)


def test_audit_physical_material():
    report = convexity_audit(PHYS, SampleSpec.default_for(PHYS, n_samples=2500))
    assert report.min_eig_psi_rel >= -1e-9
    assert report.psi0_witness is not None
