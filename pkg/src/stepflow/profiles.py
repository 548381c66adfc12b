"""Canonical initial/test surface profiles.

All constructors return zero-mean deviation fields with the mean slope
stored separately, matching the solution-space convention h = h~ + B.x.
"""
from __future__ import annotations

import numpy as np

from .field import Grid, ScalarField, random_band_limited

__all__ = ["meander_field", "bunch_field", "flat_noise_field"]


def meander_field(grid: Grid, A: float, omega: float, B: float) -> ScalarField:
    """Undulating step train h = B (x1 + A sin(omega x2)).

    omega must be 2 pi m / L for a positive integer m, and m must be
    resolvable on the grid with room for the 2x dealiasing pad (m <= n/4).
    """
    m = omega * grid.L / (2.0 * np.pi)
    if abs(m - round(m)) > 1e-9 or round(m) < 1:
        raise ValueError(f"omega {omega:g} is not 2 pi m / L for integer m >= 1")
    if round(m) > grid.n // 4:
        raise ValueError(f"mode m={round(m)} unresolvable on n={grid.n} grid (need m <= n/4)")
    _, x2 = grid.meshgrid()
    return ScalarField(grid, A * B * np.sin(omega * x2), (B, 0.0))


def bunch_field(grid: Grid, H: float, rho: float) -> ScalarField:
    """One-bunch train: flat terraces at -H/2 and H/2 joined by a ramp of
    slope rho centred in the cell, uniform along x2.  The periodic
    deviation carries mean slope B = (H/L, 0)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    L = grid.L
    if H / (2.0 * rho) > L / 2.0:
        raise ValueError(f"bunch of width H/rho = {H / rho:g} does not fit in the cell")
    x1, _ = grid.meshgrid()
    half_w = H / (2.0 * rho)
    h = np.where(
        np.abs(x1 - L / 2.0) <= half_w,
        rho * (x1 - L / 2.0),
        np.sign(x1 - L / 2.0) * H / 2.0,
    )
    dev = h - (H / L) * (x1 - L / 2.0)
    dev = dev - dev.mean()
    return ScalarField(grid, dev, (H / L, 0.0))


def flat_noise_field(
    grid: Grid,
    rng: np.random.Generator,
    rms: float,
    B=(0.0, 0.0),
    kmax: int | None = None,
) -> ScalarField:
    """Flat vicinal surface plus smooth band-limited noise."""
    if kmax is None:
        kmax = max(1, grid.n // 8)
    return random_band_limited(grid, rng, kmax=kmax, rms=rms, B=B)
