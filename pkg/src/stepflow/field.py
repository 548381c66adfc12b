"""Periodic fields on the square cell [0, L]^2 and their spectral operators.

Transform convention: a zero-mean sample array h[j1, j2] at grid points
x = (j1, j2) * L / n is expanded as

    h(x) = sum_k  h_k  exp(2 pi i k . x / L),    k in {-n/2 .. n/2-1}^2,

so h_k = fft2(values) / n^2 with numpy's wrapped frequency ordering.  The
fractional seminorm used by the long-range misfit energy is

    seminorm_sq = sum_{k != 0} |k| |h_k|^2

with |k| the integer index magnitude.  The long-range kernel

    (K h)(x) = int (x - y) / |x - y|^3 . grad h(y) dy

acts diagonally in this basis with multiplier 4 pi^2 |k| / L.  The
multiplier is fixed by matching the quadratic form: the cell integral
int h (K h) dx must equal 4 pi^2 L sum |k| |h_k|^2, and with the expansion
above int h (K h) dx = L^2 sum m(k) |h_k|^2, hence m(k) = 4 pi^2 |k| / L
(equivalently 2 pi |kappa| in terms of the physical wavenumber
kappa = 2 pi k / L: the kernel is 2 pi times the half-Laplacian).  A
truncated periodic-image quadrature of the defining integral is provided
as an independent cross-check.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "make_zero_mean",
    "random_band_limited",
    "gradient",
    "divergence",
    "inner_product",
    "h_half_seminorm_sq",
    "nonlocal_energy",
    "nonlocal_kernel_apply",
    "nonlocal_quadrature_oracle",
    "save_binary",
    "load_binary",
    "save_csv",
]

_MEAN_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with n points per side on [0, L]^2."""

    n: int
    L: float

    def __post_init__(self):
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"n must be even and >= 8, got {self.n}")
        if self.L <= 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def spacing(self) -> float:
        return self.L / self.n

    def axes(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.axes()
        return np.meshgrid(x, x, indexing="ij")

    def index_freqs(self) -> np.ndarray:
        """Integer Fourier indices in fft ordering (1-D)."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    def index_mag(self) -> np.ndarray:
        """|k| over the 2-D index lattice, fft ordering."""
        k = self.index_freqs()
        return np.hypot(k[:, None], k[None, :])

    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical wavenumbers kappa_j = 2 pi k_j / L, with the Nyquist
        index zeroed so spectral derivatives of real fields stay real."""
        k = self.index_freqs()
        k = k.copy()
        k[self.n // 2] = 0.0
        kap = 2.0 * np.pi * k / self.L
        return kap[:, None] * np.ones(self.n), np.ones((self.n, 1)) * kap[None, :]


@dataclass(frozen=True)
class ScalarField:
    """Zero-mean periodic samples of the height deviation, plus the mean
    slope vector B.  The full height is h(x) = values(x) + B . x."""

    grid: Grid
    values: np.ndarray
    B: np.ndarray = dc_field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "B", np.asarray(self.B, dtype=float).reshape(2))
        if v.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"values shape {v.shape} != grid {self.grid.n}")
        scale = np.max(np.abs(v)) if v.size else 0.0
        if scale > 0 and abs(v.mean()) > _MEAN_TOL * scale:
            raise ValueError(
                f"field mean {v.mean():.3e} exceeds {_MEAN_TOL:g} * max |values|; "
                "use make_zero_mean"
            )

    def spectrum(self) -> np.ndarray:
        """Fourier coefficients h_k (fft ordering)."""
        return np.fft.fft2(self.values) / self.grid.n**2

    @classmethod
    def from_spectrum(cls, grid: Grid, coeffs: np.ndarray, B=(0.0, 0.0)) -> "ScalarField":
        vals = np.fft.ifft2(coeffs * grid.n**2).real
        vals -= vals.mean()
        return cls(grid, vals, np.asarray(B, dtype=float))

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values, self.B)

    def shifted(self, s1: int, s2: int) -> "ScalarField":
        """Translate by whole grid cells (periodic roll)."""
        return ScalarField(self.grid, np.roll(self.values, (s1, s2), axis=(0, 1)), self.B)


@dataclass(frozen=True)
class VectorField:
    """Periodic two-component field on the same grid."""

    grid: Grid
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        for name in ("u1", "u2"):
            v = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, v)
            if v.shape != (self.grid.n, self.grid.n):
                raise ValueError(f"{name} shape {v.shape} != grid {self.grid.n}")

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u1, self.u2)


def make_zero_mean(grid: Grid, values: np.ndarray, B=(0.0, 0.0)) -> ScalarField:
    v = np.asarray(values, dtype=float)
    return ScalarField(grid, v - v.mean(), np.asarray(B, dtype=float))


def random_band_limited(
    grid: Grid,
    rng: np.random.Generator,
    kmax: int,
    rms: float = 1.0,
    B=(0.0, 0.0),
) -> ScalarField:
    """Random smooth zero-mean field with spectrum supported on |k_j| <= kmax."""
    n = grid.n
    coeffs = np.zeros((n, n), dtype=complex)
    k = grid.index_freqs()
    mask = (np.abs(k[:, None]) <= kmax) & (np.abs(k[None, :]) <= kmax)
    mask[0, 0] = False
    raw = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    coeffs[mask] = raw[mask]
    vals = np.fft.ifft2(coeffs).real
    vals -= vals.mean()
    r = np.sqrt(np.mean(vals**2))
    if r > 0:
        vals *= rms / r
    return ScalarField(grid, vals, np.asarray(B, dtype=float))


def gradient(f: ScalarField) -> VectorField:
    """Spectral gradient of the deviation field (B is not added here)."""
    k1, k2 = f.grid.wavenumbers()
    fh = np.fft.fft2(f.values)
    g1 = np.fft.ifft2(1j * k1 * fh).real
    g2 = np.fft.ifft2(1j * k2 * fh).real
    return VectorField(f.grid, g1, g2)


def full_gradient(f: ScalarField) -> VectorField:
    """Gradient of the full height, grad(values) + B."""
    g = gradient(f)
    return VectorField(f.grid, g.u1 + f.B[0], g.u2 + f.B[1])


def divergence(v: VectorField) -> ScalarField:
    k1, k2 = v.grid.wavenumbers()
    dh = 1j * k1 * np.fft.fft2(v.u1) + 1j * k2 * np.fft.fft2(v.u2)
    vals = np.fft.ifft2(dh).real
    vals -= vals.mean()
    return ScalarField(v.grid, vals)


def inner_product(f: ScalarField, g: ScalarField) -> float:
    """L^2(cell) inner product by the periodic trapezoid rule."""
    return float(np.mean(f.values * g.values) * f.grid.L**2)


def h_half_seminorm_sq(f: ScalarField) -> float:
    """sum_{k != 0} |k| |h_k|^2 over integer Fourier indices."""
    coeffs = f.spectrum()
    return float(np.sum(f.grid.index_mag() * np.abs(coeffs) ** 2))


def nonlocal_energy(f: ScalarField, c1: float) -> float:
    """Unsigned magnitude 2 pi^2 c1 L [h]^2 of the long-range misfit term.

    The energy contribution is the negative of this value; the sign is
    applied by the energy assembly, not here.
    """
    return 2.0 * np.pi**2 * c1 * f.grid.L * h_half_seminorm_sq(f)


def nonlocal_kernel_apply(f: ScalarField) -> ScalarField:
    """Apply the bare long-range kernel, multiplier 4 pi^2 |k| / L."""
    coeffs = np.fft.fft2(f.values)
    out = np.fft.ifft2(coeffs * (4.0 * np.pi**2 / f.grid.L) * f.grid.index_mag()).real
    out -= out.mean()
    return ScalarField(f.grid, out)


def nonlocal_quadrature_oracle(
    f: ScalarField, point: tuple[int, int], truncation_radius: int, upsample: int = 8
) -> float:
    """Brute-force value of the long-range kernel at one grid point.

    Sums the defining integral over (2R+1)^2 periodic images of the cell by
    the midpoint rule on a spectrally upsampled copy of the field (exact for
    band-limited data; the fine grid tames the midpoint error of the 1/r^2
    kernel near the singularity).  The singular fine cell at y = x is
    excluded and replaced by its analytic local value: with z = y - x the
    integrand there is -z . (Hess h) z / |z|^3 + odd terms, whose square-cell
    integral is -2 asinh(1) s lap h(x) for cell side s.  Intended for tests
    only; the remaining error decays like 1/R in the truncation radius.
    """
    if truncation_radius < 1:
        raise ValueError("truncation_radius must be >= 1")
    grid = f.grid
    n, L = grid.n, grid.L
    m = upsample * n
    sh = np.fft.fftshift(np.fft.fft2(f.values))
    big = np.zeros((m, m), dtype=complex)
    c0 = m // 2 - n // 2
    big[c0 : c0 + n, c0 : c0 + n] = sh
    vals = np.fft.ifft2(np.fft.ifftshift(big)).real * upsample**2
    vals -= vals.mean()
    fine = Grid(m, L)
    ff = ScalarField(fine, vals)
    g = gradient(ff)
    gx, gy = g.u1.ravel(), g.u2.ravel()
    s = fine.spacing
    x1, x2 = fine.meshgrid()
    i, j = point
    px, py = grid.axes()[i], grid.axes()[j]
    d0x = (px - x1).ravel()
    d0y = (py - x2).ravel()

    shifts = np.arange(-truncation_radius, truncation_radius + 1) * L
    total = 0.0
    for sx in shifts:
        dx = d0x + sx
        for sy in shifts:
            dy = d0y + sy
            r2 = dx * dx + dy * dy
            with np.errstate(divide="ignore"):
                inv_r3 = r2 ** (-1.5)
            inv_r3[r2 < (0.999 * s) ** 2] = 0.0
            total += float(np.sum((dx * gx + dy * gy) * inv_r3))
    total *= s * s

    ii, jj = i * upsample, j * upsample
    lap = (
        vals[(ii + 1) % m, jj]
        + vals[ii - 1, jj]
        + vals[ii, (jj + 1) % m]
        + vals[ii, jj - 1]
        - 4.0 * vals[ii, jj]
    ) / s**2
    return total - 2.0 * np.arcsinh(1.0) * s * lap


# --- serialization ---------------------------------------------------------

_HEADER = struct.Struct("<qddd")  # n, L, B1, B2


def save_binary(f: ScalarField, path) -> None:
    """Flat binary snapshot: header (n, L, B), then row-major doubles."""
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(f.grid.n, f.grid.L, f.B[0], f.B[1]))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_binary(path) -> ScalarField:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"truncated snapshot header in {path}")
        n, L, b1, b2 = _HEADER.unpack(head)
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * n:
        raise ValueError(f"snapshot {path}: expected {n * n} doubles, got {data.size}")
    return ScalarField(Grid(int(n), L), data.reshape(int(n), int(n)).copy(), (b1, b2))


def save_csv(f: ScalarField, path) -> None:
    """CSV snapshot with columns x1, x2, h (deviation values)."""
    x1, x2 = f.grid.meshgrid()
    rows = np.column_stack([x1.ravel(), x2.ravel(), f.values.ravel()])
    np.savetxt(path, rows, delimiter=",", header="x1,x2,h", comments="", fmt="%.17g")
