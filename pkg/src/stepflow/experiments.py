"""Energy-scaling experiments on analytic profile families.

Two one-parameter families bracket the competition between the two step
instabilities:

  * meandering trains h = B (x1 + A sin(omega x2)), whose energy has the
    closed-form long-range part -(c1 pi L^2 / 2) A^2 B^2 omega plus a local
    part reducible to a 1-D quadrature in x2.  Minimized over A they track
    the 2+1-D scaling inf E ~ -C a^{-2}, with the dominant-balance
    amplitude A* = c1 pi^2 / (4 c3 omega^2 B a).

  * straight one-bunch trains of height H and in-bunch density rho, whose
    reduced 1-D energy scales like C log(a) at the preferred density
    rho* = sqrt(c1 H / (2 c3)) a^{-1/2}.

Comparing the two minimum energy densities over a sweep of the terrace
width or the misfit locates the bunching-to-meandering transition.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .coefficients import PhysicalParams, derive_coefficients
from .energy import EnergyBreakdown

__all__ = [
    "MeanderProfile",
    "BunchProfile",
    "ScalingReport",
    "LowerBound",
    "TransitionReport",
    "meander_energy",
    "meander_energy_density0",
    "meander_amplitude_residual",
    "dominant_balance_amplitude",
    "minimize_meander_energy",
    "upper_bound_scaling_scan",
    "upper_bound_prefactor",
    "lower_bound_constant",
    "bunch_energy_1p1",
    "bunch_first_term",
    "bunch_first_term_smallwidth",
    "bunch_first_term_quadrature",
    "default_bunch_density",
    "transition_scan",
]


def _worker_count(n_jobs: int) -> int:
    cap = os.environ.get("STEPFLOW_THREADS")
    workers = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(workers, n_jobs))


# --- meandering family ------------------------------------------------------


@dataclass(frozen=True)
class MeanderProfile:
    """Undulating train h = B (x1 + A sin(omega x2)).

    A is the dimensionless amplitude factor, omega = 2 pi m / L for a
    positive integer m, B > 0 the mean slope magnitude (slope vector (B, 0)).
    """

    A: float
    omega: float
    B: float

    def __post_init__(self):
        if self.A < 0:
            raise ValueError(f"A must be >= 0, got {self.A}")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.B <= 0:
            raise ValueError(f"B must be positive, got {self.B}")


def _meander_slopes(p: MeanderProfile, quadrature_n: int) -> np.ndarray:
    """|grad h| sampled over one period of x2 (periodic trapezoid nodes)."""
    z = np.linspace(0.0, 2.0 * np.pi, quadrature_n, endpoint=False)
    return p.B * np.sqrt(1.0 + (p.A * p.omega * np.cos(z)) ** 2)


def meander_energy(
    p: MeanderProfile, c, L: float | None = None, quadrature_n: int = 4096
) -> EnergyBreakdown:
    """Energy of the meandering profile on the cell [0, L]^2.

    The long-range part is closed-form; the local densities depend on x2
    only, so the cell integral reduces to L times a periodic 1-D trapezoid
    quadrature with ``quadrature_n`` nodes per undulation period (spectrally
    accurate; choose quadrature_n well above A * omega).
    """
    if L is None:
        L = getattr(c, "L", None)
        if L is None:
            raise ValueError("L must be given when the coefficient set has no default")
    r = _meander_slopes(p, quadrature_n)
    area = L * L
    return EnergyBreakdown(
        nonlocal_term=-(c.c1 * np.pi * area / 2.0) * p.A**2 * p.B**2 * p.omega,
        local_log=float(c.a * c.c1 * np.mean(r * np.log(r + c.gamma0)) * area),
        local_linear=float(c.a * c.c2 * np.mean(r) * area),
        local_cubic=float(c.a * c.c3 * np.mean(r**3) * area),
    )


def meander_energy_density0(
    p: MeanderProfile, c, L: float | None = None, quadrature_n: int = 4096
) -> float:
    """Same family energy with the unregularized log density (log r, no
    gamma0 offset); the profile slope never vanishes, so this is finite."""
    if L is None:
        L = c.L
    r = _meander_slopes(p, quadrature_n)
    area = L * L
    local = c.a * np.mean(r * (c.c1 * np.log(r) + c.c2) + c.c3 * r**3) * area
    return float(-(c.c1 * np.pi * area / 2.0) * p.A**2 * p.B**2 * p.omega + local)


def dominant_balance_amplitude(c, omega: float, B: float, a: float | None = None) -> float:
    """A* = c1 pi^2 / (4 c3 omega^2 B) / a, the amplitude at which the
    long-range gain and the cubic slope cost balance as a -> 0."""
    if a is None:
        a = c.a
    if omega <= 0 or B <= 0 or a <= 0:
        raise ValueError("omega, B, a must be positive")
    return c.c1 * np.pi**2 / (4.0 * c.c3 * omega**2 * B) / a


def meander_amplitude_residual(
    A: float, c, omega: float, B: float, L: float | None = None, quadrature_n: int = 4096
) -> float:
    """First-order condition dE/dA at amplitude A, normalized per unit area.

    Zero at interior minimizers of the family energy; used to check that the
    dominant-balance amplitude is a near-critical point.
    """
    if L is None:
        L = c.L
    from .local_energy import _dpsi_dr_over_r

    z = np.linspace(0.0, 2.0 * np.pi, quadrature_n, endpoint=False)
    cos2 = np.cos(z) ** 2
    r = B * np.sqrt(1.0 + A**2 * omega**2 * cos2)
    # d(psi(r))/dA = (psi'(r)/r) * r dr/dA with r dr/dA = B^2 A omega^2 cos^2
    local = np.mean(_dpsi_dr_over_r(r, c) * B**2 * A * omega**2 * cos2)
    return float(-c.c1 * np.pi * B**2 * omega * A + local)


def minimize_meander_energy(
    c, omega: float, B: float, L: float | None = None, quadrature_n: int = 4096
) -> tuple[float, float]:
    """(A_min, E_min) of the family energy, bracketed around the
    dominant-balance seed on [A*/10, 10 A*], relative tolerance 1e-8."""
    if L is None:
        L = c.L
    a_star = dominant_balance_amplitude(c, omega, B)

    def obj(A):
        return meander_energy(MeanderProfile(A, omega, B), c, L, quadrature_n).total

    res = minimize_scalar(
        obj,
        bounds=(a_star / 10.0, 10.0 * a_star),
        method="bounded",
        options={"xatol": 1e-8 * a_star},
    )
    return float(res.x), float(res.fun)


def upper_bound_prefactor(c, omega: float, L: float | None = None) -> float:
    """Leading constant C2 in inf E <= -C2 a^{-2}: c1^3 pi^5 L^2 / (96 c3^2 omega^3)."""
    if L is None:
        L = c.L
    return c.c1**3 * np.pi**5 * L**2 / (96.0 * c.c3**2 * omega**3)


@dataclass(frozen=True)
class ScalingReport:
    """Minimum family energies over a decreasing sweep of the lattice height a.

    ``entries`` is a record array with fields a, E_min, A_used, E_min_log0
    (the unregularized-density value at the same amplitude).  The slope is
    fitted on log(-E_min) vs log(a) over the last two decades, so the
    a^{-2} law shows up as slope -2; the fitted prefactor is -E_min a^2 at
    the smallest a.
    """

    entries: np.ndarray
    fitted_slope: float
    fitted_prefactor: float
    reference_prefactor: float

    def __post_init__(self):
        a = self.entries["a"]
        if not np.all(np.diff(a) < 0):
            raise ValueError("a values must be strictly decreasing")
        if a.size < 6 and math.log10(a[0] / a[-1]) < 4.0 - 1e-9:
            raise ValueError("sweep must span >= 4 decades or contain >= 6 points")

    CSV_HEADER = "a,E_min,A_used,E_min_log0"

    def write_csv(self, path) -> None:
        data = np.column_stack([self.entries[k] for k in self.CSV_HEADER.split(",")])
        np.savetxt(path, data, delimiter=",", header=self.CSV_HEADER, comments="", fmt="%.17g")

    def as_dict(self) -> dict:
        return {
            "n_points": int(self.entries.size),
            "a_min": float(self.entries["a"][-1]),
            "a_max": float(self.entries["a"][0]),
            "fitted_slope": self.fitted_slope,
            "fitted_prefactor": self.fitted_prefactor,
            "reference_prefactor": self.reference_prefactor,
        }


def upper_bound_scaling_scan(
    c, omega: float, B: float, a_list, L: float | None = None, quadrature_n: int = 65536
) -> ScalingReport:
    """Minimize the meandering family energy at each a and fit the scaling.

    a_list must be strictly decreasing.  Points are independent and are
    evaluated concurrently; results are aggregated in sweep order.
    """
    if L is None:
        L = c.L
    a_arr = np.asarray(list(a_list), dtype=float)
    if not np.all(np.diff(a_arr) < 0):
        raise ValueError("a values must be strictly decreasing")
    if a_arr.size < 6 and math.log10(a_arr[0] / a_arr[-1]) < 4.0 - 1e-9:
        raise ValueError("sweep must span >= 4 decades or contain >= 6 points")

    def one(a):
        ca = replace(c, a=a)
        a_min, e_min = minimize_meander_energy(ca, omega, B, L, quadrature_n)
        e0 = meander_energy_density0(MeanderProfile(a_min, omega, B), ca, L, quadrature_n)
        return a, e_min, a_min, e0

    with ThreadPoolExecutor(max_workers=_worker_count(a_arr.size)) as pool:
        rows = list(pool.map(one, a_arr))
    entries = np.rec.fromrecords(rows, names=["a", "E_min", "A_used", "E_min_log0"])

    last2 = entries["a"] <= entries["a"][-1] * 100.0 * (1.0 + 1e-12)
    slope = np.polyfit(np.log(entries["a"][last2]), np.log(-entries["E_min"][last2]), 1)[0]
    prefactor = -entries["E_min"][-1] * entries["a"][-1] ** 2
    return ScalingReport(
        entries=entries,
        fitted_slope=float(slope),
        fitted_prefactor=float(prefactor),
        reference_prefactor=float(upper_bound_prefactor(c, omega, L)),
    )


@dataclass(frozen=True)
class LowerBound:
    """E[h] >= total for every admissible h on the cell; the leading term is
    -leading_constant * a^{-2} and minimizer_slope is the radius where the
    pointwise bound is tight."""

    total: float
    leading_constant: float
    minimizer_slope: float


def lower_bound_constant(c, B: float, L: float | None = None, a: float | None = None) -> LowerBound:
    """Four-term lower bound obtained from psi >= a c3 |p|^3 and the
    pointwise inequality a c3 |p + B|^3 >= a c3 (|p| - |B|)^3:

        E >= -c1^3 L^5 / (54 c3^2) a^-2 - c1^2 L^4 |B| / (3 c3) a^-1
             - 2 c1 L^3 |B|^2 - 5 a c3 |B|^3 L^2,

    with the pointwise minimum attained at |grad h~| = c1 L/(3 c3) a^-1 + 2|B|.
    """
    if L is None:
        L = c.L
    if a is None:
        a = c.a
    b = abs(B)
    total = (
        -c.c1**3 * L**5 / (54.0 * c.c3**2) / a**2
        - c.c1**2 * L**4 * b / (3.0 * c.c3) / a
        - 2.0 * c.c1 * L**3 * b**2
        - 5.0 * a * c.c3 * b**3 * L**2
    )
    return LowerBound(
        total=float(total),
        leading_constant=float(c.c1**3 * L**5 / (54.0 * c.c3**2)),
        minimizer_slope=float(c.c1 * L / (3.0 * c.c3) / a + 2.0 * b),
    )


# --- one-bunch family -------------------------------------------------------


@dataclass(frozen=True)
class BunchProfile:
    """Straight-step one-bunch train: height H over period L, in-bunch step
    density rho, so the bunch occupies a band of width H / rho <= L."""

    H: float
    rho: float
    L: float

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.H <= 0 or self.L <= 0:
            raise ValueError("H and L must be positive")
        if self.H / (2.0 * self.rho) > self.L / 2.0:
            raise ValueError(
                f"bunch width H/rho = {self.H / self.rho:g} exceeds the period {self.L:g}"
            )


def default_bunch_density(c, H: float, a: float | None = None) -> float:
    """rho* = sqrt(c1 H / (2 c3)) a^{-1/2}, the density balancing the
    long-range gain and the dipole cost of the bunch."""
    if a is None:
        a = c.a
    return math.sqrt(c.c1 * H / (2.0 * c.c3)) / math.sqrt(a)


def bunch_first_term(p: BunchProfile, c1: float) -> float:
    """Asymptotic long-range term c1 L H^2 log(pi H / (L rho)) of the reduced
    1-D energy (leading order as the bunch width shrinks)."""
    return c1 * p.L * p.H**2 * math.log(math.pi * p.H / (p.L * p.rho))


def bunch_first_term_smallwidth(p: BunchProfile, c1: float) -> float:
    """Small-width limit of the log-sine double integral including its O(1)
    constant: c1 L H^2 (log(pi H / (L rho)) - 3/2)."""
    return c1 * p.L * p.H**2 * (math.log(math.pi * p.H / (p.L * p.rho)) - 1.5)


def bunch_first_term_quadrature(p: BunchProfile, c1: float) -> float:
    """Long-range term of the reduced 1-D energy by adaptive quadrature:

        c1 L rho^2 int int_{|x|,|y| <= H/(2 rho)} log sin(pi (x - y) / L)

    collapsed by the substitution s = x - y to a single integral against the
    triangular weight; the log singularity at s = 0 is integrable.
    """
    w2 = p.H / p.rho  # full bunch width

    def g(s):
        return (w2 - s) * np.log(np.sin(np.pi * s / p.L))

    val, _ = quad(g, 0.0, w2, points=[0.0], limit=200, epsabs=0.0, epsrel=1e-12)
    return 2.0 * c1 * p.L * p.rho**2 * val


def _bunch_closed_form(H: float, rho: float, L: float, c, a: float) -> float:
    return c.c1 * L * H**2 * math.log(math.pi * H / (L * rho)) + a * L * H * (
        c.c1 * math.log(rho) + c.c2 + c.c3 * rho**2
    )


def bunch_energy_1p1(p: BunchProfile, c, a: float | None = None) -> float:
    """Reduced 1-D energy of the bunch family in asymptotic closed form:

        c1 L H^2 log(pi H / (L rho)) + a L H (c1 log rho + c2 + c3 rho^2).
    """
    if a is None:
        a = c.a
    return _bunch_closed_form(p.H, p.rho, p.L, c, a)


# --- transition scan --------------------------------------------------------


@dataclass(frozen=True)
class TransitionReport:
    """Energy densities of the two families along one parameter sweep.

    ``diff`` is the meandering minus bunching density; a sign change marks a
    transition between the two instabilities.  ``crossings`` holds linearly
    interpolated crossing locations, empty when there is no crossing in range.
    """

    vary: str  # "l_t" | "eps0"
    values: np.ndarray
    e21_density: np.ndarray
    e11_density: np.ndarray
    skipped: tuple[float, ...]

    @property
    def diff(self) -> np.ndarray:
        return self.e21_density - self.e11_density

    @property
    def crossings(self) -> list[float]:
        d = self.diff
        v = self.values
        out = []
        for i in range(d.size - 1):
            if d[i] == 0.0:
                out.append(float(v[i]))
            elif d[i] * d[i + 1] < 0:
                t = d[i] / (d[i] - d[i + 1])
                out.append(float(v[i] + t * (v[i + 1] - v[i])))
        if d.size and d[-1] == 0.0:
            out.append(float(v[-1]))
        return out

    @property
    def crossing(self) -> float | None:
        xs = self.crossings
        return xs[0] if xs else None

    CSV_COLUMNS = ("E21_density", "E11_density", "diff")

    def write_csv(self, path) -> None:
        header = ",".join((self.vary,) + self.CSV_COLUMNS)
        data = np.column_stack([self.values, self.e21_density, self.e11_density, self.diff])
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")

    def as_dict(self) -> dict:
        xs = self.crossings
        return {
            "vary": self.vary,
            "n_points": int(self.values.size),
            "range": [float(self.values[0]), float(self.values[-1])],
            "skipped": list(self.skipped),
            "n_crossings": len(xs),
            "crossings": xs,
            "crossing": xs[0] if xs else None,
            "message": None if xs else "no crossing in range",
            "bunching_favored_at_start": bool(self.diff[0] > 0) if self.values.size else None,
        }


def transition_scan(
    vary: str,
    material: PhysicalParams,
    N: int,
    fixed: float,
    values=None,
    n_points: int = 25,
    quadrature_n: int = 65536,
) -> TransitionReport:
    """Sweep the terrace width l_t (fixed misfit eps0 = ``fixed``) or the
    misfit eps0 (fixed l_t = ``fixed``) and compare the minimum energy
    densities of the two families.

    The geometry follows the vicinal setup: period L = N l_t, height rise
    H = N a, mean slope B = a / l_t, undulation wavenumber omega = 2 pi / L.
    The meandering density uses the dominant-balance amplitude; the bunching
    density uses rho*.  Misfit-free points (eps0 = 0 gives c1 = 0) are
    rejected and recorded in ``skipped``.  Points are evaluated concurrently
    and aggregated in sweep order.
    """
    if vary not in ("l_t", "eps0"):
        raise ValueError(f"vary must be 'l_t' or 'eps0', got {vary!r}")
    a = material.a
    if values is None:
        if vary == "l_t":
            values = np.geomspace(2.0 * a, 1000.0 * a, n_points)
        else:
            values = np.geomspace(1e-3, 5e-2, n_points)
    values = np.asarray(list(values), dtype=float)
    if np.any(values < 0):
        raise ValueError("sweep values must be positive")

    def one(v):
        if vary == "l_t":
            l_t, eps0 = v, fixed
        else:
            l_t, eps0 = fixed, v
        if eps0 == 0.0:
            return None
        mc = derive_coefficients(replace(material, eps0=eps0))
        L = N * l_t
        H = N * a
        B = a / l_t
        omega = 2.0 * np.pi / L
        A = dominant_balance_amplitude(mc, omega, B)
        e21 = meander_energy(MeanderProfile(A, omega, B), mc, L, quadrature_n).total
        # asymptotic closed form, evaluated even where the literal profile
        # at rho* would overfill the period (small l_t)
        rho = default_bunch_density(mc, H)
        e11 = _bunch_closed_form(H, rho, L, mc, a)
        return e21 / L**2, e11 / L**2

    with ThreadPoolExecutor(max_workers=_worker_count(values.size)) as pool:
        results = list(pool.map(one, values))

    kept = [(v, r) for v, r in zip(values, results) if r is not None]
    skipped = tuple(float(v) for v, r in zip(values, results) if r is None)
    vs = np.array([v for v, _ in kept])
    e21 = np.array([r[0] for _, r in kept])
    e11 = np.array([r[1] for _, r in kept])
    return TransitionReport(
        vary=vary, values=vs, e21_density=e21, e11_density=e11, skipped=skipped
    )
