"""Implicit bias of Bregman proximal point and mirror descent on separable data."""
from .bounds import (
    BoundInputs,
    contraction_beta,
    contraction_beta_lower,
    loss_upper_bound_const,
    margin_floor,
    t0_estimates,
)
from .data import (
    Dataset,
    DatasetStats,
    SpheresConfig,
    check_separable,
    empirical_covariance,
    fixture_four_point,
    gen_spheres,
    gen_tightness,
    load_csv,
    signed_points,
    stats,
)
from .kernels import BACKEND
from .linalg import NormSpec, cholesky, dual_norm, extreme_eigs, norm, solve_spd
from .loss import LossEval, loss, loss_grad, normalized_margin
from .oracle import MarginCertificate, grid_oracle, max_margin
from .potentials import ConvexityProfile, QuadraticPotential, convexity_profile
from .solvers import (
    Constant,
    ConstantCappedMD,
    FixedSteps,
    ToleranceStop,
    VaryingBPPA,
    VaryingMD,
    bppa_step,
    md_step,
    run,
)
from .telemetry import Trajectory, alignment, export

__version__ = "0.1.0"
