"""TASE-RK time integrators with inexact Jacobian, their stability
diagrams, and field-of-values stability certificates."""

from .diagrams import (
    BoundaryCurve,
    DiagramQuery,
    boundary,
    diagram,
    in_diagram,
    in_rp,
    kstar_real,
    mu_right_limit,
    real_axis_endpoints,
    rp,
    rt,
    rt_tilde,
)
from .problems import (
    NonlinearBounds,
    SplitProblem,
    burgers,
    fisher_kolmogorov,
    fitzhugh_nagumo,
    linear_commuting,
    linear_noncommuting,
    make_problem,
)
from .rosenbrock import RowTableau, integrate_row, load_row_tableau, ros2, row_step
from .splitting import (
    FovBoundary,
    Splitting,
    StabilityVerdict,
    amplification_matrix,
    check_fov_conditional,
    check_fov_unconditional,
    check_modewise,
    check_unconditional_eigs,
    check_worst_mode,
    fov,
    fov_q,
    generalized_eigenvalues,
    kappa_transform,
    spectral_radius_check,
)
from .tase import (
    ExplicitTableau,
    IntegrationRun,
    TaseOperator,
    TaseRkMethod,
    apply_tase,
    hat_t,
    hat_t_limit,
    integrate,
    tase_operator,
    tase_rk_method,
    tase_rk_step,
    tase_weights,
)

__version__ = "0.1.0"
