"""saturex: flux-saturated degenerate diffusion toolkit.

Structure checks for saturating flux models, the optimal-transport cost
function obtained by convex conjugation, a 1D entropy-consistent finite
volume solver, and front/support measurement against the sharp propagation
laws.
"""

from .models import (
    ModelSpec,
    PsiFamily,
    PhiFamily,
    SampleGrid,
    AssumptionReport,
    ModelError,
    eval_psi,
    eval_dpsi,
    check_assumptions,
    check_phi,
    model_from_id,
)
from .lagrangian import FluxObjects, potential, flux_a, h_and_recession, growth_constants
from .transport import CostTable, CostValue, kstar, conjugate, boundary_value, cost_table
from .solver import (
    Grid1D,
    SolverConfig,
    SolverState,
    Trajectory,
    interface_flux,
    stable_dt,
    step,
    run,
)
from .analysis import (
    ProfileSpec,
    FrontReport,
    track_support,
    detect_jumps,
    rh_speed,
    admissible_minus,
    super_indicator,
    sub_semicircle,
    sub_theta_power,
    verify_profile_ordering,
    front_report,
)

__version__ = "0.1.0"
