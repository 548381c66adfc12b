"""Material parameters and the derived model coefficients.

The energy functional is parametrized by four numbers: the prefactor of the
long-range misfit interaction (c1), the effective step line energy density
(c2), the force-dipole strength (c3), and the slope regularization offset
gamma0 = exp(-c2/c1) that keeps the generalized step line energy
non-negative.  ``beta`` is the coefficient in the well-posedness condition
L/a < beta under which the energy is strictly convex and the flow contracts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PhysicalParams",
    "ModelCoefficients",
    "NondimensionalCoefficients",
    "derive_coefficients",
    "beta_for",
    "beta_branch",
    "PRESETS",
    "preset",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Physical material inputs in SI units.

    g1: step line energy density [J/m^2]
    g3: force dipole strength [J/m^2]
    a: lattice constant [m]
    nu: Poisson ratio
    G: shear modulus [Pa]
    r_c: step core size [m]
    eps0: lattice misfit (dimensionless)
    """

    g1: float
    g3: float
    a: float
    nu: float
    G: float
    r_c: float
    eps0: float

    def __post_init__(self):
        if self.g1 < 0:
            raise ValueError(f"g1 must be >= 0, got {self.g1}")
        if self.g3 <= 0:
            raise ValueError(f"g3 must be > 0, got {self.g3}")
        if self.a <= 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if not 0 < self.nu < 0.5:
            raise ValueError(f"nu must be in (0, 0.5), got {self.nu}")
        if self.G <= 0:
            raise ValueError(f"G must be > 0, got {self.G}")
        if self.r_c <= 0:
            raise ValueError(f"r_c must be > 0, got {self.r_c}")


@dataclass(frozen=True)
class ModelCoefficients:
    """Derived coefficients of the continuum energy (SI units).

    sigma0 = 2G(1+nu)eps0/(1-nu) is the misfit stress; c1, c2, c3 are in Pa
    (c3 = g3/(3a) carries 1/length); gamma0 and beta are dimensionless.
    """

    sigma0: float
    c1: float
    c2: float
    c3: float
    gamma0: float
    beta: float
    a: float

    def as_dict(self) -> dict:
        return {
            "sigma0": self.sigma0,
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "gamma0": self.gamma0,
            "beta": self.beta,
            "a": self.a,
        }


@dataclass(frozen=True)
class NondimensionalCoefficients:
    """Free coefficients for scaling experiments.

    The small-lattice-constant asymptotics treat c1, c2, c3 as fixed O(1)
    numbers while a -> 0, so this constructor does not tie them to any
    material.  gamma0 is always exp(-c2/c1).  L and B carry the default
    domain size and mean slope used by the experiment drivers.
    """

    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    a: float = 1e-3
    L: float = 1.0
    B: float = 1.0

    def __post_init__(self):
        if self.c1 <= 0 or self.c3 <= 0:
            raise ValueError("c1 and c3 must be positive")
        if self.a <= 0 or self.L <= 0:
            raise ValueError("a and L must be positive")

    @property
    def gamma0(self) -> float:
        return math.exp(-self.c2 / self.c1)

    @property
    def beta(self) -> float:
        return beta_for(self.c1, self.c3, self.gamma0)


def beta_for(c1: float, c3: float, gamma0: float) -> float:
    """Well-posedness coefficient beta.

    beta = 2 sqrt(3 c3/c1) - (3 c3/c1) gamma0 on the branch where
    sqrt(c1/(3 c3)) >= gamma0, and 1/gamma0 otherwise.  The definition is
    piecewise; the two branch values need not agree at the switch point.
    """
    if c1 <= 0 or c3 <= 0:
        raise ValueError("c1 and c3 must be positive")
    if gamma0 < 0:
        raise ValueError("gamma0 must be nonnegative")
    # gamma0 = 0 only ever arises as the underflow of exp(-c2/c1) for very
    # weak misfit; that limit lies on the first branch, which stays finite.
    ratio = 3.0 * c3 / c1
    if 1.0 / math.sqrt(ratio) >= gamma0:
        return 2.0 * math.sqrt(ratio) - ratio * gamma0
    return 1.0 / gamma0


def beta_branch(c1: float, c3: float, gamma0: float) -> str:
    """Which branch of the piecewise beta definition applies."""
    if 1.0 / math.sqrt(3.0 * c3 / c1) >= gamma0:
        return "dipole"
    return "inverse-offset"


def derive_coefficients(p: PhysicalParams) -> ModelCoefficients:
    """Derive the model coefficients from physical material parameters.

    Rejects the misfit-free limit eps0 = 0: c1 = 0 there and every
    downstream formula assumes c1 > 0.
    """
    sigma0 = 2.0 * p.G * (1.0 + p.nu) * p.eps0 / (1.0 - p.nu)
    c1 = (1.0 - p.nu) * sigma0**2 / (2.0 * math.pi * p.G)
    if c1 <= 0:
        raise ValueError(
            "zero-misfit material (eps0 = 0 gives c1 = 0); the model requires c1 > 0"
        )
    c2 = p.g1 / p.a + c1 * math.log(2.0 * math.pi * p.r_c / (math.e * p.a))
    c3 = p.g3 / (3.0 * p.a)
    gamma0 = math.exp(-c2 / c1)
    beta = beta_for(c1, c3, gamma0)
    return ModelCoefficients(
        sigma0=sigma0, c1=c1, c2=c2, c3=c3, gamma0=gamma0, beta=beta, a=p.a
    )


# Material presets.  "zhu2009" is the generic vicinal-surface parameter set;
# the silicon entries are for Si(113) at 983 K and Si(111) at 1223 K.
PRESETS: dict[str, PhysicalParams] = {
    "zhu2009": PhysicalParams(
        g1=0.03, g3=8.58, a=0.27e-9, nu=0.25, G=3.8e10, r_c=0.27e-9, eps0=0.012
    ),
    "si113": PhysicalParams(
        g1=0.3382, g3=5767.8, a=0.27e-9, nu=0.25, G=3.8e10, r_c=0.27e-9, eps0=0.012
    ),
    "si111": PhysicalParams(
        g1=0.1778, g3=0.8011, a=0.27e-9, nu=0.25, G=3.8e10, r_c=0.27e-9, eps0=0.012
    ),
}


def preset(name: str) -> ModelCoefficients:
    """Derived coefficients for a named material preset."""
    try:
        params = PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        ) from None
    return derive_coefficients(params)
