"""Numerical mass integrals on asymptotically flat and hyperbolic models.

The package evaluates total-mass flux integrals and quasi-local mass
integrals (Hawking-, Brown-York- and curvature-type) on a catalog of model
metrics, and provides sweep/rate-fit tooling to verify their convergence to
the common mass limit.
"""

from .analysis import (
    EXPONENTIAL,
    POWER_LAW,
    RateFit,
    SweepConfig,
    column,
    fit_all,
    fit_rate,
    richardson,
    run_sweep,
)
from .curvature import CurvaturePoint, christoffel, constants, curvature_point
from .embed import (
    EUCLIDEAN,
    HYPERBOLIC,
    RoundEmbedding,
    hyperboloid_position,
    round_embed,
    roundness_defect,
)
from .errors import (
    BadDimension,
    BadExponent,
    BadResolution,
    ConfigError,
    DecayTooWeak,
    DegenerateFit,
    EigFailure,
    HorizonViolation,
    NonFiniteIntegrand,
    NotRound,
    OutOfDomain,
    QuadratureFailure,
    QuasimassError,
    SingularMetric,
    UnknownMetric,
    WrongChart,
)
from .mass import (
    MassReport,
    adm_flux,
    by_af,
    by_ah,
    by_vector_ah,
    ch_mass,
    compute_report,
    estimator_ids,
    hawking_af,
    hawking_ah,
    ricci_mass_af,
    ricci_mass_ah,
    sigma2_af,
    v_function,
)
from .metric import (
    BALL_AH,
    CARTESIAN_AF,
    CATALOG_NAMES,
    MetricJet,
    MetricSpec,
    ads_radial_profile,
    ads_schwarzschild,
    af_perturbed,
    ah_perturbed,
    euclidean,
    eval_background_jet,
    eval_jet,
    exact_einstein,
    fd_check_jet,
    hyperbolic_ball,
    make_spec,
    schwarzschild_isotropic,
)
from .surface import (
    QuadratureGrid,
    SurfaceData,
    SurfaceFamily,
    build_grid,
    discretize,
    integrate,
    nearly_round_diagnostics,
)

__version__ = "0.1.0"
