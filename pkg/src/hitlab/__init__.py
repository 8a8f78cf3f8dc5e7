"""hitlab: conservation-law transforms for Schrodinger-type equations with
potentials linear in x, their hitting-density targets, and Monte Carlo
cross-checks.

The package evaluates a family of closed-form solutions (closed_forms),
transforms them into new solutions via a conserved flux (transform), verifies
every claim with finite-difference residual harnesses (residual), and
cross-validates the probabilistic interpretation with exact Bessel(3)-bridge
and first-passage simulation (montecarlo).  A CLI (cli) drives it all from
JSON configs.
"""

from .boundary import PolyBoundary, boundary_eval
from .closed_forms import (
    ExponentialOmega,
    GaussOmega,
    ImagesOmega,
    OmegaKind,
    PhiParams,
    U1Params,
    hitting_density,
    hitting_density_dx,
    hitting_density_dxx,
    omega_eval,
    phi_eval,
    phi_eval_literal,
    u1_eval,
)
from .errors import (
    ConfigError,
    DegenerateInterval,
    GridTooSmall,
    HitlabError,
    HorizonViolation,
    NegativeLevel,
    NonpositiveField,
    NonpositiveTau,
    NonpositiveTime,
    QuadratureFailure,
    UnsortedGrid,
    UnsupportedBoundary,
    ZeroDenominator,
)
from .hitting_targets import (
    AiryHittingU1,
    ImagesHittingU1,
    hitting_target_phi,
    hitting_target_u1,
)
from .montecarlo import (
    BridgePath,
    HittingHistogram,
    MCConfig,
    MCEstimate,
    available_backends,
    get_backend,
    hitting_time_histogram,
    sample_bessel3_bridge,
    set_backend,
    v_mc_estimate,
    v_mc_step_halving,
)
from .quadrature import cumulative, integrate, integrate_segments
from .residual import (
    BoundaryLimitReport,
    BoundReport,
    Grid,
    ResidualReport,
    bound_check,
    boundary_limit_check,
    conservation_check,
    residual_adjoint,
    residual_backward,
)
from .transform import (
    FluxPair,
    TransformConfig,
    TransformedField,
    b2_solve,
    flux,
    hitting_target_config,
    v2_potential,
    v2_potential_fd,
    v_from_w,
    w_eval,
    w_eval_tail,
)

__version__ = "0.1.0"
