"""Directed random graph models with the bi-degree sequence as sufficient statistic.

Library layout:

* :mod:`bidegree.model` -- weight families, parameters, degrees, likelihood.
* :mod:`bidegree.sampler` -- graph sampling and linear-ramp designs.
* :mod:`bidegree.fisher` -- structured Fisher matrices and the closed-form
  approximate inverse.
* :mod:`bidegree.solver` -- Newton fitting, existence detection, diagnostics.
* :mod:`bidegree.inference` -- plug-in variances, contrasts, confidence intervals.
* :mod:`bidegree.simharness` -- replicated coverage/QQ experiments.
* :mod:`bidegree.cli` -- the ``bidegree`` command.
"""

from .fisher import (
    ApproxError,
    ApproxInverse,
    SingularFisherError,
    StructuredFisher,
    apply_approx_inverse,
    approx_error,
    approx_inverse,
    dense_inverse,
    fisher_info,
)
from .inference import (
    AsymptoticCov,
    ci_for_contrast,
    contrast_stat,
    normal_quantile,
    plug_in_variances,
)
from .model import (
    BiDegree,
    Graph,
    InvalidParameterError,
    ParamVector,
    WeightFamily,
    bi_degrees,
    edge_mean,
    edge_variance,
    expected_degrees,
    log_likelihood,
    moment_residual,
)
from .sampler import SimDesign, derive_seed, design_params, ramp_magnitude, sample_graph
from .simharness import (
    ExperimentConfig,
    ExperimentRow,
    InsufficientDataError,
    qq_export,
    run_experiment,
)
from .solver import (
    Existence,
    Feasibility,
    FitConfig,
    FitResult,
    NewtonDiagnostics,
    default_start,
    existence_check,
    newton_diagnostics,
    newton_fit,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxError",
    "ApproxInverse",
    "AsymptoticCov",
    "BiDegree",
    "Existence",
    "ExperimentConfig",
    "ExperimentRow",
    "Feasibility",
    "FitConfig",
    "FitResult",
    "Graph",
    "InsufficientDataError",
    "InvalidParameterError",
    "NewtonDiagnostics",
    "ParamVector",
    "SimDesign",
    "SingularFisherError",
    "StructuredFisher",
    "WeightFamily",
    "apply_approx_inverse",
    "approx_error",
    "approx_inverse",
    "bi_degrees",
    "ci_for_contrast",
    "contrast_stat",
    "default_start",
    "dense_inverse",
    "derive_seed",
    "design_params",
    "edge_mean",
    "edge_variance",
    "existence_check",
    "expected_degrees",
    "fisher_info",
    "log_likelihood",
    "moment_residual",
    "newton_diagnostics",
    "newton_fit",
    "normal_quantile",
    "plug_in_variances",
    "qq_export",
    "ramp_magnitude",
    "run_experiment",
    "sample_graph",
]
