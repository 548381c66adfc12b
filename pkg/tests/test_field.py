import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stepflow.field import (
    Grid,
    ScalarField,
    divergence,
    gradient,
    h_half_seminorm_sq,
    inner_product,
    load_binary,
    make_zero_mean,
    nonlocal_energy,
    nonlocal_kernel_apply,
    nonlocal_quadrature_oracle,
    random_band_limited,
    save_binary,
    save_csv,
)


def _rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(7, 1.0)
    with pytest.raises(ValueError):
        Grid(6, 1.0)
    with pytest.raises(ValueError):
        Grid(16, 0.0)


def test_zero_mean_enforced():
    grid = Grid(16, 1.0)
    with pytest.raises(ValueError):
        ScalarField(grid, np.ones((16, 16)))
    f = make_zero_mean(grid, np.ones((16, 16)) + np.eye(16))
    assert abs(f.values.mean()) < 1e-15


def test_seminorm_single_mode_exact():
    grid = Grid(64, 2.0)
    A, B, m = 0.7, 1.3, 5
    omega = 2 * np.pi * m / grid.L
    _, x2 = grid.meshgrid()
    f = ScalarField(grid, A * B * np.sin(omega * x2))
    exact = A**2 * B**2 * omega * grid.L / (4 * np.pi)
    assert h_half_seminorm_sq(f) == pytest.approx(exact, rel=1e-12)


def test_seminorm_translation_invariant():
    grid = Grid(32, 1.0)
    f = random_band_limited(grid, _rng(1), kmax=6)
    assert h_half_seminorm_sq(f.shifted(5, 11)) == pytest.approx(
        h_half_seminorm_sq(f), rel=1e-12
    )


@given(scale=st.floats(0.1, 10.0))
@settings(max_examples=20, deadline=None)
def test_seminorm_quadratic_scaling(scale):
    grid = Grid(16, 1.0)
    f = random_band_limited(grid, _rng(2), kmax=3)
    g = f.with_values(scale * f.values)
    assert h_half_seminorm_sq(g) == pytest.approx(
        scale**2 * h_half_seminorm_sq(f), rel=1e-10
    )


def test_gradient_of_sine_exact():
    grid = Grid(32, 1.0)
    x1, _ = grid.meshgrid()
    k = 2 * np.pi * 3 / grid.L
    f = ScalarField(grid, np.sin(k * x1) - np.mean(np.sin(k * x1)))
    g = gradient(f)
    assert np.allclose(g.u1, k * np.cos(k * x1), atol=1e-10)
    assert np.allclose(g.u2, 0.0, atol=1e-12)


def test_divergence_adjoint_to_gradient():
    grid = Grid(32, 1.0)
    f = random_band_limited(grid, _rng(3), kmax=6)
    v1 = random_band_limited(grid, _rng(4), kmax=6)
    v2 = random_band_limited(grid, _rng(5), kmax=6)
    from stepflow.field import VectorField

    v = VectorField(grid, v1.values, v2.values)
    g = gradient(f)
    lhs = inner_product(f, divergence(v))
    rhs = -float(np.mean(g.u1 * v.u1 + g.u2 * v.u2) * grid.L**2)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_kernel_quadratic_form_matches_seminorm():
    grid = Grid(32, 1.5)
    f = random_band_limited(grid, _rng(6), kmax=5)
    lhs = inner_product(f, nonlocal_kernel_apply(f))
    rhs = 4 * np.pi**2 * grid.L * h_half_seminorm_sq(f)
    assert lhs == pytest.approx(rhs, rel=1e-10)
    assert lhs >= 0.0
    # with c1 = 2 the energy magnitude is exactly the quadratic form
    assert nonlocal_energy(f, 2.0) == pytest.approx(lhs, rel=1e-12)


def test_kernel_oracle_agrees_at_modest_radius():
    grid = Grid(16, 1.0)
    f = random_band_limited(grid, _rng(7), kmax=2)
    ref = nonlocal_kernel_apply(f).values[3, 9]
    errs = [
        abs(nonlocal_quadrature_oracle(f, (3, 9), R) - ref) / abs(ref) for R in (2, 4)
    ]
    assert errs[0] < 0.05
    assert errs[1] < errs[0]


def test_oracle_rejects_bad_radius():
    grid = Grid(16, 1.0)
    f = random_band_limited(grid, _rng(8), kmax=2)
    with pytest.raises(ValueError):
        nonlocal_quadrature_oracle(f, (0, 0), 0)


def test_binary_roundtrip(tmp_path):
    grid = Grid(16, 2.5)
    f = random_band_limited(grid, _rng(9), kmax=3, B=(0.4, -0.2))
    p = tmp_path / "snap.bin"
    save_binary(f, p)
    g = load_binary(p)
    assert g.grid == f.grid
    assert np.array_equal(g.values, f.values)
    assert np.array_equal(g.B, f.B)


def test_binary_truncated_rejected(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"\x00" * 10)
    with pytest.raises(ValueError):
        load_binary(p)


def test_csv_snapshot(tmp_path):
    grid = Grid(16, 1.0)
    f = random_band_limited(grid, _rng(10), kmax=3)
    p = tmp_path / "snap.csv"
    save_csv(f, p)
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    assert data.shape == (256, 3)
    assert np.allclose(data[:, 2].reshape(16, 16), f.values)


def test_random_band_limited_properties():
    grid = Grid(64, 1.0)
    f = random_band_limited(grid, _rng(11), kmax=4, rms=0.2)
    assert abs(f.values.mean()) < 1e-12
    assert np.sqrt(np.mean(f.values**2)) == pytest.approx(0.2, rel=1e-10)
    coeffs = f.spectrum()
    k = grid.index_freqs()
    outside = (np.abs(k[:, None]) > 4) | (np.abs(k[None, :]) > 4)
    assert np.max(np.abs(coeffs[outside])) < 1e-14
