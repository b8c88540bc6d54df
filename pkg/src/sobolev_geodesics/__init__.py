"""Graph-geodesic experiments on warped products and piecewise-flat block metrics."""

from .convergence_analysis import (
    DistanceModel,
    HolderFit,
    fit_holder,
    gh_upper_bound,
    pointwise_convergence_report,
    uniform_distance,
)
from .experiments import ExperimentConfig, holder_lambda_search, list_experiments, run_experiment, run_named
from .field_calculus import (
    ScalarField,
    band_limited_field,
    density_estimate,
    lp_norm,
    sobolev_w1p_norm,
    tensor_norm_field,
    trace_integral,
    trace_ratio_test,
    volume,
)
from .geodesic_engine import (
    DistanceMatrix,
    Grid,
    GridTooLarge,
    distance_matrix,
    edge_length,
    geodesic_path,
    multi_source,
    single_source,
    stencil_overshoot,
)
from .metric_models import MetricModel, WarpingFunction
from .references import reference_values
from .report import ExperimentReport

__version__ = "0.1.0"
