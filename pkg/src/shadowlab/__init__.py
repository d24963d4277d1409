"""Shadow-on-a-disk estimation experiments and two classical companions.

A light source sits somewhere in the closed unit disk, a dart lands
uniformly in the disk, and only the angle of the shadow on the boundary
is observed.  The package provides the exact law of that angle, the
geometric simulation it comes from, linear estimators of the source
location with their risks, and the Poisson and Gaussian examples of
biased estimators beating unbiased ones.
"""

from shadowlab.angular import AngularLaw, cdf, density, sample_theta, theta_from_uniform
from shadowlab.classic import (
    NormalSampleStats,
    PoissonModel,
    mle_estimate,
    poisson_estimator_mse,
    poisson_pmf,
    s_squared,
    t_squared,
    unbiased_delta,
    unbiasedness_partial_sum,
    variance_estimator_mse,
)
from shadowlab.estimators import (
    LinearShadowEstimator,
    PosteriorLaw,
    bayes_risk,
    linear_estimate,
    minimize_bayes_risk,
    posterior_density,
    posterior_mean_numeric,
    shadow_mse,
)
from shadowlab.geometry import (
    DegenerateRayError,
    PlanePoint,
    PolarPoint,
    cartesian_to_polar,
    cast_shadow,
    polar_to_cartesian,
    sample_uniform_disk,
)
from shadowlab.montecarlo import (
    GofReport,
    RandomStream,
    RiskEstimate,
    chi_square_gof,
    estimate_mean_shadow,
    estimate_shadow_risk,
    risk_curve,
)

__version__ = "0.1.0"
