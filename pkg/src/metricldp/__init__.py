"""Locally private frequency, range, and quantile estimation under
metric-scaled guarantees."""

from .domain import (
    DomainSpec,
    RangeQuery,
    flat_index,
    parse_range,
    point_of_index,
)
from .errors import (
    CapacityError,
    DomainError,
    InfeasibleError,
    MetricLdpError,
    ShapeError,
)
from .metrics import (
    Metric,
    compose_metrics,
    eval_metric,
    l1_metric,
    metric_from_config,
    metric_to_config,
    super_sensitive_metric,
    table_metric,
    validate_metric,
)
from .matrix_mech import (
    MatrixMechanism,
    check_privacy,
    encode,
    encode_batch,
    estimate_workload,
    expected_total_sq_error,
    frequency_mechanism,
    optimal_prefix_scales,
    optimize_frequency_scales,
    prefix_mechanism,
    prefix_strategy,
    range_workload,
)
from .mdrq import (
    Observations,
    ReportMatrix,
    accumulate_observations,
    binv_row,
    encode_dataset,
    encode_value,
    estimate_all_points,
    estimate_point,
    estimate_range,
    range_row_sum,
    variance_bound_point,
    variance_bound_range,
)
from .quantile import (
    QuantileResult,
    percentile,
    percentile_error_bound,
    quantile,
    quantile_error_bound,
)
from .simulate import (
    ExperimentConfig,
    ExperimentResult,
    gen_zipf,
    run_experiment,
    true_count,
    true_weighted_count,
)

__version__ = "0.1.0"
