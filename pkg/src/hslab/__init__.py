"""Numerical laboratory for the fractional Hardy-Sobolev inequality.

Minimizers and best constants on truncated grids, plus executable checks of
symmetry and monotonicity of minimizers and of the rearrangement argument
behind them.
"""
from .core import (
    DecayWarning,
    ExponentConfig,
    Field,
    FieldFormatError,
    GridSpec,
    RadialProfile,
    gaussian,
    l2_norm,
    load_field,
    lp_norm,
    make_exponents,
    make_grid,
    radial_profile,
    save_field,
    singular_weight,
    weighted_q_norm,
)
from .fracops import (
    SpectralPlan,
    fractional_power,
    make_plan,
    riesz_constant,
    riesz_kernel_field,
    riesz_potential,
    riesz_solve,
)
from .rearrange import (
    ConvexTestFamily,
    MajorizationReport,
    SDTestFamily,
    check_convex_characterization,
    check_sd_characterization,
    majorizes,
    sd_rearrangement,
)
from .solver import (
    SolveReport,
    SolverOptions,
    euler_lagrange_residual,
    fixed_point_minimize,
    gradient_flow_minimize,
    rayleigh_quotient,
    sharp_sobolev_constant,
)
from .verify import ProofChainReport, TheoremReport, chain_from_density, proof_chain_check, verify_theorem

__version__ = "0.1.0"
