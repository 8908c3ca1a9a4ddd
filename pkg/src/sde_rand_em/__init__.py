"""Numerical laboratory for additive SDEs with Hölder-rough drift.

Implements the standard and randomised Euler-Maruyama schemes, the stratified
randomised Riemann quadrature with its martingale error structure, and the
coupled Monte Carlo machinery for measuring strong convergence orders.
"""

__version__ = "0.1.0"

from .core import (
    BrownianPath,
    RandomOffsets,
    RngStream,
    TimeGrid,
    coarsen_path,
    kappa,
    kappa_tau,
    sample_brownian,
    sample_offsets,
)
from .drifts import (
    DriftSpec,
    ObservableSpec,
    eval_drift,
    eval_observable,
    probe_holder_seminorms,
)
from .errors import ConfigError, CouplingError, UnsupportedFunctionError
from .experiments import (
    ErrorLadder,
    IProbeResult,
    SchemeComparison,
    compare_schemes,
    fit_order,
    gamma_exponent,
    measure_I1,
    measure_I2,
    predicted_randomised_order,
    predicted_standard_order,
    run_ladder,
    strong_error_estimate,
)
from .fitting import OrderFit, fit_points
from .integrators import (
    SCHEME_RANDOMISED,
    SCHEME_STANDARD,
    ContinuousExtension,
    DiscreteTrajectory,
    extend_continuous,
    simulate_randomised_em,
    simulate_reference,
    simulate_standard_em,
)
from .quadrature import (
    Affine,
    MartingaleReport,
    PowerKink,
    QuadratureRun,
    WeierstrassFunction,
    integral_oracle,
    leftpoint_quadrature,
    martingale_diagnostic,
    quadrature_order_experiment,
    randomised_quadrature,
)

__all__ = [
    "__version__",
    "Affine",
    "BrownianPath",
    "ConfigError",
    "ContinuousExtension",
    "CouplingError",
    "DiscreteTrajectory",
    "DriftSpec",
    "ErrorLadder",
    "IProbeResult",
    "MartingaleReport",
    "ObservableSpec",
    "OrderFit",
    "PowerKink",
    "QuadratureRun",
    "RandomOffsets",
    "RngStream",
    "SchemeComparison",
    "SCHEME_RANDOMISED",
    "SCHEME_STANDARD",
    "TimeGrid",
    "UnsupportedFunctionError",
    "WeierstrassFunction",
    "coarsen_path",
    "compare_schemes",
    "eval_drift",
    "eval_observable",
    "extend_continuous",
    "fit_order",
    "fit_points",
    "gamma_exponent",
    "integral_oracle",
    "kappa",
    "kappa_tau",
    "leftpoint_quadrature",
    "martingale_diagnostic",
    "measure_I1",
    "measure_I2",
    "predicted_randomised_order",
    "predicted_standard_order",
    "probe_holder_seminorms",
    "quadrature_order_experiment",
    "randomised_quadrature",
    "run_ladder",
    "sample_brownian",
    "sample_offsets",
    "simulate_randomised_em",
    "simulate_reference",
    "simulate_standard_em",
    "strong_error_estimate",
]
