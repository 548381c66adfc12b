"""Total energy, its breakdown, the chemical potential, and the divergence
potential form of the energy.

Sign bookkeeping lives here: the spectral seminorm and kernel helpers in
``field`` are unsigned, and this module applies the minus signs.

    E[h] = -2 c1 pi^2 L [h]^2_{1/2} + int psi(grad h) dx
    mu   = -c1 (K h) - div zeta(grad h),   normalized to zero mean

mu is the variational derivative of E with respect to the height; the
conservative flow h_t = lap mu is unaffected by the zero-mean
normalization, which is fixed only so snapshots are comparable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .field import (
    Grid,
    ScalarField,
    VectorField,
    divergence,
    full_gradient,
    nonlocal_energy,
    nonlocal_kernel_apply,
)
from .local_energy import zeta

__all__ = [
    "EnergyBreakdown",
    "total_energy",
    "chemical_potential",
    "build_u_from_h",
    "total_energy_u",
    "coercivity_bound",
]


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy split by physical origin; ``total`` is the sum of the parts."""

    nonlocal_term: float  # -2 c1 pi^2 L [h]^2, always <= 0
    local_log: float
    local_linear: float
    local_cubic: float

    @property
    def total(self) -> float:
        return self.nonlocal_term + self.local_log + self.local_linear + self.local_cubic


def total_energy(f: ScalarField, c) -> EnergyBreakdown:
    """Energy of a height field: spectral seminorm for the long-range part,
    collocation trapezoid quadrature (exact-mean for periodic data) for the
    local densities evaluated at grad h = grad(values) + B."""
    g = full_gradient(f)
    r = g.magnitude()
    area = f.grid.L**2
    return EnergyBreakdown(
        nonlocal_term=-nonlocal_energy(f, c.c1),
        local_log=float(c.a * c.c1 * np.mean(r * np.log(r + c.gamma0)) * area),
        local_linear=float(c.a * c.c2 * np.mean(r) * area),
        local_cubic=float(c.a * c.c3 * np.mean(r**3) * area),
    )


def _pad_spectrum(coeffs: np.ndarray, m: int) -> np.ndarray:
    """Embed an n x n coefficient array (fft order) into m x m zeros."""
    n = coeffs.shape[0]
    out = np.zeros((m, m), dtype=complex)
    half = n // 2
    sh = np.fft.fftshift(coeffs)
    outs = np.fft.fftshift(out)
    c0 = m // 2 - half
    outs[c0 : c0 + n, c0 : c0 + n] = sh
    return np.fft.ifftshift(outs)


def _truncate_spectrum(coeffs: np.ndarray, n: int) -> np.ndarray:
    m = coeffs.shape[0]
    half = n // 2
    sh = np.fft.fftshift(coeffs)
    c0 = m // 2 - half
    return np.fft.ifftshift(sh[c0 : c0 + n, c0 : c0 + n])


def zeta_divergence(f: ScalarField, c, dealias: bool = True) -> ScalarField:
    """div zeta(grad h) by the pseudo-spectral route.

    With ``dealias`` the flux is evaluated pointwise on a 2x zero-padded
    grid before truncation; |p| p is quadratic in amplitude and the absolute
    value is not smooth, so the usual 3/2 rule is not relied on.
    """
    grid = f.grid
    n = grid.n
    fh = np.fft.fft2(f.values)
    if dealias:
        m = 2 * n
        fine = Grid(m, grid.L)
        k1, k2 = fine.wavenumbers()
        fh_fine = _pad_spectrum(fh, m) * (m / n) ** 2
        g1 = np.fft.ifft2(1j * k1 * fh_fine).real + f.B[0]
        g2 = np.fft.ifft2(1j * k2 * fh_fine).real + f.B[1]
        z = zeta(np.stack([g1, g2], axis=-1), c)
        z1h = _truncate_spectrum(np.fft.fft2(z[..., 0]), n) * (n / m) ** 2
        z2h = _truncate_spectrum(np.fft.fft2(z[..., 1]), n) * (n / m) ** 2
    else:
        k1f, k2f = grid.wavenumbers()
        g1 = np.fft.ifft2(1j * k1f * fh).real + f.B[0]
        g2 = np.fft.ifft2(1j * k2f * fh).real + f.B[1]
        z = zeta(np.stack([g1, g2], axis=-1), c)
        z1h = np.fft.fft2(z[..., 0])
        z2h = np.fft.fft2(z[..., 1])
    k1, k2 = grid.wavenumbers()
    div = np.fft.ifft2(1j * k1 * z1h + 1j * k2 * z2h).real
    div -= div.mean()
    return ScalarField(grid, div)


def chemical_potential(f: ScalarField, c, dealias: bool = True) -> ScalarField:
    """mu = -c1 (K h) - div zeta(grad h), zero mean."""
    kern = nonlocal_kernel_apply(f)
    dz = zeta_divergence(f, c, dealias=dealias)
    vals = -c.c1 * kern.values - dz.values
    vals -= vals.mean()
    return ScalarField(f.grid, vals)


def _antiderivative(vals: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    """Spectral running integral int_0^x along one axis of data with zero
    line means along that axis; periodic, vanishing at coordinate 0."""
    k = grid.index_freqs().copy()
    k[grid.n // 2] = 0.0
    kap = 2.0 * np.pi * k / grid.L
    shape = [1, 1]
    shape[axis] = grid.n
    kap = kap.reshape(shape)
    fh = np.fft.fft(vals, axis=axis)
    with np.errstate(divide="ignore", invalid="ignore"):
        F = np.where(kap != 0, fh / (1j * kap + (kap == 0)), 0.0)
    out = np.fft.ifft(F, axis=axis).real
    return out - np.take(out, [0], axis=axis)


def build_u_from_h(f: ScalarField) -> VectorField:
    """Periodic divergence potential: a two-component field u with
    div u = values spectrally, each component zero mean.

    Component 1 at (x1, x2) is half the running x1-integral of
    values(., x2) minus its x1-line mean, plus half the running integral of
    the x2-line means; the subtracted means make every integrand zero mean
    along its integration axis, so the antiderivatives are periodic and are
    evaluated exactly in Fourier space.  Component 2 is symmetric in the
    other coordinate.  A final constant shift zeroes each component mean.
    The spectral divergence recovers values exactly on resolved modes; only
    unresolved (Nyquist) content is lost.
    """
    grid = f.grid
    h = f.values
    m1 = h.mean(axis=0)  # x1-line mean, function of x2
    m2 = h.mean(axis=1)  # x2-line mean, function of x1
    u1 = 0.5 * _antiderivative(h - m1[None, :], grid, axis=0)
    u1 += 0.5 * _antiderivative(np.broadcast_to(m2[:, None], h.shape).copy(), grid, axis=0)
    u1 -= u1.mean()
    u2 = 0.5 * _antiderivative(h - m2[:, None], grid, axis=1)
    u2 += 0.5 * _antiderivative(np.broadcast_to(m1[None, :], h.shape).copy(), grid, axis=1)
    u2 -= u2.mean()
    return VectorField(grid, u1, u2)


def total_energy_u(u: VectorField, B, c) -> float:
    """Energy in the divergence-potential form; depends on u only through
    div u, so it is invariant under adding any divergence-free field."""
    h = divergence(u)
    return total_energy(ScalarField(u.grid, h.values, np.asarray(B, dtype=float)), c).total


def coercivity_bound(c, B, L: float) -> float:
    """Constant C with E[h] >= (c1/2) L ||grad h||^2 - C L^2.

    C = -min over slopes p of { a c3 |p + B|^3 - c1 L |p|^2 }; by radial
    symmetry the minimum is over r = |p| with p anti-aligned to B, a 1-D
    problem solved numerically.
    """
    bm = float(np.hypot(*np.asarray(B, dtype=float).reshape(2)))

    def g(r):
        return c.a * c.c3 * abs(r - bm) ** 3 - c.c1 * L * r**2

    # bracket the minimum: g -> +inf as r -> inf, g(0) <= 0 region near
    # r ~ c1 L / (a c3); scan log-spaced radii then polish.
    r_star = c.c1 * L / (c.a * c.c3)
    rs = np.geomspace(max(r_star * 1e-3, 1e-12), r_star * 1e3, 200)
    rs = np.concatenate([[0.0], rs, [bm]])
    r0 = rs[np.argmin([g(r) for r in rs])]
    res = minimize_scalar(g, bounds=(0.0, max(10 * r_star, 10 * bm + 1.0)), method="bounded")
    best = min(g(r0), res.fun if res.success else np.inf)
    return -float(best)
