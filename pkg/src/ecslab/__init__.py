"""Numerical laboratory for elliptic Calogero-Sutherland type systems.

Layers, bottom up:

    elliptic    theta-type special functions, lattice-sum pair potential,
                annulus theta for contour work (EllipticContext)
    states      product wavefunctions, kernel-function candidates, contour
                Laurent coefficients (MassModel, DeformedModel, ProductState)
    operators   the many-body and deformed operators applied through two
                independent backends: closed-form log-derivatives vs plain
                finite differences
    verify      closed-form constants, residual checks, seeded suites
    cli         `ecslab verify ...` / `ecslab table ...` with JSON/CSV reports
"""

from .elliptic import (
    EllipticContext,
    TruncationPolicy,
    beta_potential,
    log_dtheta,
    log_theta_annulus,
    pair_potential,
    theta,
    theta_annulus,
)
from .errors import (
    ConstraintError,
    DegenerateCoefficientError,
    DomainError,
    EcsError,
    PackingError,
    QuadratureError,
    SingularityError,
    TruncationError,
)
from .operators import (
    OperatorApplication,
    StencilSpec,
    apply_H_deformed,
    apply_H_deformed_fn,
    apply_calH,
    beta_derivative,
)
from .states import (
    Configuration,
    DeformedModel,
    MassModel,
    ProductState,
    QuadratureSpec,
    annulus_integrand,
    build_kernel_F,
    build_phi0,
    build_psi0,
    coords_to_circle,
    dress_plane_wave,
    pn_coefficients,
    reconstruct_annulus_product,
)
from .verify import (
    ResidualReport,
    SampleRecord,
    ShiftSpec,
    constant_C,
    energy_E0_cor2,
    energy_E0_prop1,
    energy_En_cor3,
    lemma1_shift,
    residual_cor1,
    residual_cor2,
    residual_cor3,
    residual_prop1,
    sample_configurations,
    shifted_E0,
    suite_appendix,
    suite_cor1,
    suite_cor2,
    suite_cor3,
    suite_lemma1,
    suite_prop1,
    suite_shift,
    suite_trig_limit,
)

__version__ = "0.1.0"
