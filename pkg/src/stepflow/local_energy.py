"""Local slope energy densities, their gradients, Hessians, and convexity audits.

Both densities are radial functions of the slope p:

    psi0(p) = a c1 |p| log|p|        + a c2 |p| + a c3 |p|^3
    psi(p)  = a c1 |p| log(|p|+g0)   + a c2 |p| + a c3 |p|^3,  g0 = exp(-c2/c1)

The offset g0 is chosen so that c1 log(|p| + g0) + c2 = c1 log1p(|p|/g0),
which is the form used internally: it is exact, non-negative, and avoids
the cancellation between the log term and c2 |p| that the literal formula
suffers when |p| << 1 and c2/c1 is large.  It also makes the lower bound
psi(p) >= a c3 |p|^3 manifest.

For a radial density f(|p|) the Hessian has eigenvalues f''(r) along p and
f'(r)/r across it; all Hessian work goes through those two scalar
derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "HessianSample",
    "SampleSpec",
    "AuditReport",
    "psi0",
    "psi",
    "zeta",
    "hessian_psi",
    "hessian_psi0",
    "convexity_audit",
]


def _split(p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 2:
        raise ValueError(f"slope array must have trailing dimension 2, got {p.shape}")
    return p[..., 0], p[..., 1]


def psi(p, c):
    """Regularized density; psi(0) = 0 and psi(p) >= a c3 |p|^3."""
    p1, p2 = _split(p)
    r = np.hypot(p1, p2)
    return c.a * (c.c1 * r * np.log1p(r / c.gamma0) + c.c3 * r**3)


def psi0(p, c):
    """Original density; psi0(0) = 0 is the limit value of |p| log |p|."""
    p1, p2 = _split(p)
    r = np.hypot(p1, p2)
    safe = np.where(r > 0, r, 1.0)
    return np.where(
        r > 0, c.a * (c.c1 * r * np.log(safe) + c.c2 * r + c.c3 * r**3), 0.0
    )


def _dpsi_dr_over_r(r, c):
    """f'(r)/r for the regularized density, finite and positive as r -> 0."""
    g0 = c.gamma0
    safe = np.where(r > 0, r, 1.0)
    # log1p(r/g0)/r -> 1/g0 smoothly; safe to evaluate for any r > 0
    lead = np.where(r > 0, np.log1p(safe / g0) / safe, 1.0 / g0)
    return c.a * (c.c1 * lead + c.c1 / (r + g0) + 3.0 * c.c3 * r)


def _d2psi_dr2(r, c):
    g0 = c.gamma0
    return c.a * (c.c1 / (r + g0) + c.c1 * g0 / (r + g0) ** 2 + 6.0 * c.c3 * r)


def _dpsi0_dr_over_r(r, c):
    safe = np.where(r > 0, r, 1.0)
    return c.a * ((c.c1 * np.log(safe) + c.c1 + c.c2) / safe + 3.0 * c.c3 * safe)


def _d2psi0_dr2(r, c):
    safe = np.where(r > 0, r, 1.0)
    return c.a * (c.c1 / safe + 6.0 * c.c3 * safe)


def zeta(p, c):
    """Flux zeta = grad psi, extended continuously by zeta(0) = 0.

    Equals a c1 (p/|p|) log(|p|+g0) + a c1 p/(|p|+g0) + a c2 p/|p|
    + 3 a c3 |p| p, rewritten through log1p so the two large terms that
    cancel near p = 0 are never formed.
    """
    p = np.asarray(p, dtype=float)
    p1, p2 = _split(p)
    r = np.hypot(p1, p2)
    factor = np.where(r > 0, _dpsi_dr_over_r(r, c), 0.0)
    return np.stack([factor * p1, factor * p2], axis=-1)


@dataclass(frozen=True)
class HessianSample:
    """Second derivatives of a slope density at one point."""

    p: np.ndarray
    H: np.ndarray
    eigmin: float
    eigmax: float

    @property
    def norm(self) -> float:
        return max(abs(self.eigmin), abs(self.eigmax))


def _radial_hessian(p, fpp, fp_over_r):
    """Assemble H = f'' e_r e_r^T + (f'/r) e_t e_t^T componentwise."""
    p1, p2 = p[..., 0], p[..., 1]
    r2 = p1**2 + p2**2
    h11 = (fpp * p1**2 + fp_over_r * p2**2) / r2
    h22 = (fpp * p2**2 + fp_over_r * p1**2) / r2
    h12 = (fpp - fp_over_r) * p1 * p2 / r2
    return h11, h12, h22


def _eig_sym2(h11, h12, h22):
    tr = h11 + h22
    disc = np.sqrt((h11 - h22) ** 2 + 4.0 * h12**2)
    return (tr - disc) / 2.0, (tr + disc) / 2.0


def _hessian_at(p, c, fpp_fn, fp_over_r_fn) -> HessianSample:
    p = np.asarray(p, dtype=float).reshape(2)
    r = float(np.hypot(p[0], p[1]))
    if r == 0.0:
        raise ValueError("Hessian is singular at p = 0")
    h11, h12, h22 = _radial_hessian(p, fpp_fn(r, c), fp_over_r_fn(r, c))
    lo, hi = _eig_sym2(h11, h12, h22)
    H = np.array([[h11, h12], [h12, h22]], dtype=float)
    return HessianSample(p=p, H=H, eigmin=float(lo), eigmax=float(hi))


def hessian_psi(p, c) -> HessianSample:
    """Hessian of the regularized density; positive definite everywhere."""
    return _hessian_at(p, c, _d2psi_dr2, _dpsi_dr_over_r)


def hessian_psi0(p, c) -> HessianSample:
    """Hessian of the original density; indefinite at small |p|."""
    return _hessian_at(p, c, _d2psi0_dr2, _dpsi0_dr_over_r)


@dataclass(frozen=True)
class SampleSpec:
    """Log-radial by angular sampling grid for the convexity audit."""

    r_min: float
    r_max: float = 1e3
    n_r: int = 100
    n_phi: int = 100

    @classmethod
    def default_for(cls, c, n_samples: int = 10_000) -> "SampleSpec":
        n_side = max(8, int(round(np.sqrt(n_samples))))
        return cls(r_min=1e-10 * c.gamma0, n_r=n_side, n_phi=n_side)


@dataclass(frozen=True)
class AuditReport:
    """Sampled convexity diagnostics for psi and psi0.

    ``min_eig_psi_rel`` is min over samples of eigmin / ||H||; it should be
    >= -1e-9 (convexity up to rounding).  ``min_margin_rel`` is the same
    normalization applied to eigmin - a c1 beta (strict convexity margin).
    ``psi0_witness`` is a slope where the original density fails convexity,
    found on an axis first, matching where the failure actually lives.
    """

    min_eig_psi: float
    min_eig_psi_rel: float
    min_margin: float
    min_margin_rel: float
    min_eig_psi0: float
    psi0_witness: tuple[float, float] | None
    samples: np.ndarray  # record array, one row per sample

    def as_dict(self) -> dict:
        return {
            "min_eig_psi": self.min_eig_psi,
            "min_eig_psi_rel": self.min_eig_psi_rel,
            "min_margin": self.min_margin,
            "min_margin_rel": self.min_margin_rel,
            "min_eig_psi0": self.min_eig_psi0,
            "psi0_witness": list(self.psi0_witness) if self.psi0_witness else None,
            "n_samples": int(self.samples.size),
        }

    def write_csv(self, path) -> None:
        cols = ["p_mag", "phi", "eigmin_psi", "eigmin_psi0", "psi", "psi0"]
        data = np.column_stack([self.samples[k] for k in cols])
        np.savetxt(
            path, data, delimiter=",", header=",".join(cols), comments="", fmt="%.17g"
        )


def convexity_audit(c, sample_spec: SampleSpec | None = None) -> AuditReport:
    """Scan Hessian eigenvalues of both densities over a log-radial grid."""
    spec = sample_spec or SampleSpec.default_for(c)
    r = np.geomspace(spec.r_min, spec.r_max, spec.n_r)
    phi = np.linspace(0.0, 2.0 * np.pi, spec.n_phi, endpoint=False)
    rr, pp = np.meshgrid(r, phi, indexing="ij")
    p = np.stack([rr * np.cos(pp), rr * np.sin(pp)], axis=-1)

    h11, h12, h22 = _radial_hessian(p, _d2psi_dr2(rr, c), _dpsi_dr_over_r(rr, c))
    lo, hi = _eig_sym2(h11, h12, h22)
    hnorm = np.maximum(np.abs(lo), np.abs(hi))
    margin = lo - c.a * c.c1 * c.beta

    g11, g12, g22 = _radial_hessian(p, _d2psi0_dr2(rr, c), _dpsi0_dr_over_r(rr, c))
    lo0, _ = _eig_sym2(g11, g12, g22)

    # axis-first witness search for psi0: the transverse eigenvalue f'(r)/r
    # goes negative at small r on any ray; scan the radial grid directly.
    axis_eig = np.minimum(_d2psi0_dr2(r, c), _dpsi0_dr_over_r(r, c))
    witness = None
    neg = np.where(axis_eig < 0)[0]
    if neg.size:
        i = neg[np.argmin(axis_eig[neg])]
        witness = (float(r[i]), 0.0)
    elif lo0.min() < 0:
        i, j = np.unravel_index(np.argmin(lo0), lo0.shape)
        witness = (float(p[i, j, 0]), float(p[i, j, 1]))

    samples = np.rec.fromarrays(
        [
            rr.ravel(),
            pp.ravel(),
            lo.ravel(),
            lo0.ravel(),
            psi(p, c).ravel(),
            psi0(p, c).ravel(),
        ],
        names=["p_mag", "phi", "eigmin_psi", "eigmin_psi0", "psi", "psi0"],
    )
    return AuditReport(
        min_eig_psi=float(lo.min()),
        min_eig_psi_rel=float((lo / hnorm).min()),
        min_margin=float(margin.min()),
        min_margin_rel=float((margin / hnorm).min()),
        min_eig_psi0=float(lo0.min()),
        psi0_witness=witness,
        samples=samples,
    )
