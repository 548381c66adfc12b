"""Spectral tools for a continuum model of stepped epitaxial surfaces under
elastic interactions: energy evaluation, conserved gradient-flow evolution,
convexity audits of the slope densities, and energy-scaling experiments."""

__version__ = "0.1.0"

from .coefficients import (
    ModelCoefficients,
    NondimensionalCoefficients,
    PhysicalParams,
    PRESETS,
    beta_for,
    derive_coefficients,
    preset,
)
from .energy import (
    EnergyBreakdown,
    build_u_from_h,
    chemical_potential,
    coercivity_bound,
    total_energy,
    total_energy_u,
)
from .evolution import EvolutionConfig, EvolutionTrace, StepRejected, evolve, step
from .field import (
    Grid,
    ScalarField,
    VectorField,
    h_half_seminorm_sq,
    load_binary,
    nonlocal_energy,
    nonlocal_kernel_apply,
    save_binary,
    save_csv,
)
from .local_energy import convexity_audit, hessian_psi, hessian_psi0, psi, psi0, zeta
from .profiles import bunch_field, flat_noise_field, meander_field

__all__ = [
    "__version__",
    "ModelCoefficients",
    "NondimensionalCoefficients",
    "PhysicalParams",
    "PRESETS",
    "beta_for",
    "derive_coefficients",
    "preset",
    "EnergyBreakdown",
    "build_u_from_h",
    "chemical_potential",
    "coercivity_bound",
    "total_energy",
    "total_energy_u",
    "EvolutionConfig",
    "EvolutionTrace",
    "StepRejected",
    "evolve",
    "step",
    "Grid",
    "ScalarField",
    "VectorField",
    "h_half_seminorm_sq",
    "load_binary",
    "nonlocal_energy",
    "nonlocal_kernel_apply",
    "save_binary",
    "save_csv",
    "convexity_audit",
    "hessian_psi",
    "hessian_psi0",
    "psi",
    "psi0",
    "zeta",
    "bunch_field",
    "flat_noise_field",
    "meander_field",
]
