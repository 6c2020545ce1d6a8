"""Spectral toolkit for dissipative surface quasi-geostrophic flow.

Layers, bottom up: periodic spectral fields and Fourier multipliers
(:mod:`sqglab.spectral`), dyadic frequency decompositions and Besov norms
(:mod:`sqglab.dyadic`), random field samplers (:mod:`sqglab.sampling`),
numerical verification of the analytic estimates (:mod:`sqglab.inequalities`),
the time integrator (:mod:`sqglab.solver`), approximation-scheme sweeps
(:mod:`sqglab.iterates`), and the command-line harness (:mod:`sqglab.cli`).
"""

__version__ = "0.1.0"

from .dyadic import (
    DyadicPartition,
    besov_norm,
    block_commutator,
    default_partition,
    paraproduct_decompose,
    project_block,
    project_low,
    trilinear_form,
)
from .errors import (
    CflGuardError,
    GuardError,
    OverflowGuardError,
    UsageError,
)
from .inequalities import (
    check_ab_inequality,
    check_coercivity,
    check_gagliardo_equivalence,
    check_heat_decay,
    check_lq_semigroup_decay,
    check_max_point,
    check_phase_bounds,
    check_sign_integral,
    check_spectral_mass_contraction,
    check_trilinear_bounds,
    counterexample_gamma2_q1,
)
from .iterates import galerkin_sequence, picard_besov_sequence
from .reports import (
    InequalityReport,
    IterateTrace,
    RateFit,
    RunManifest,
    fit_log2,
)
from .sampling import (
    OneDGrid,
    band_limited_field,
    bump_field_1d,
    gaussian_block_field,
    low_pass_field,
    power_law_field,
)
from .solver import (
    SolverConfig,
    Stepper,
    TimeSeries,
    conservation_report,
    mild_residual,
    nonlinear_term,
    run_simulation,
)
from .spectral import (
    GridSpec,
    MultiplierSpec,
    SpectralField,
    apply_multiplier,
    field_lp_norm,
    forward_transform,
    inverse_transform,
    load_field,
    lp_norm,
    riesz_perp,
    save_field,
    sobolev_norm,
)

__all__ = [
    "__version__",
    "CflGuardError",
    "DyadicPartition",
    "GridSpec",
    "GuardError",
    "InequalityReport",
    "IterateTrace",
    "MultiplierSpec",
    "OneDGrid",
    "OverflowGuardError",
    "RateFit",
    "RunManifest",
    "SolverConfig",
    "SpectralField",
    "Stepper",
    "TimeSeries",
    "UsageError",
    "apply_multiplier",
    "band_limited_field",
    "besov_norm",
    "block_commutator",
    "bump_field_1d",
    "check_ab_inequality",
    "check_coercivity",
    "check_gagliardo_equivalence",
    "check_heat_decay",
    "check_lq_semigroup_decay",
    "check_max_point",
    "check_phase_bounds",
    "check_sign_integral",
    "check_spectral_mass_contraction",
    "check_trilinear_bounds",
    "conservation_report",
    "counterexample_gamma2_q1",
    "default_partition",
    "field_lp_norm",
    "fit_log2",
    "forward_transform",
    "galerkin_sequence",
    "gaussian_block_field",
    "inverse_transform",
    "load_field",
    "low_pass_field",
    "lp_norm",
    "mild_residual",
    "nonlinear_term",
    "paraproduct_decompose",
    "picard_besov_sequence",
    "power_law_field",
    "project_block",
    "project_low",
    "riesz_perp",
    "run_simulation",
    "save_field",
    "sobolev_norm",
    "trilinear_form",
]
