"""Bootstrap inference on the rank of a matrix."""

from rankinfer.derivatives import (
    DerivativeEstimator,
    first_derivative,
    second_derivative_analytic,
    second_derivative_numerical,
    threshold_rank,
)
from rankinfer.errors import (
    DegenerateSubspace,
    DimensionError,
    InsufficientData,
    InsufficientDraws,
    InvalidArgument,
    InvalidInput,
    RankInferError,
    StepFailure,
)
from rankinfer.rank_estimation import (
    SequentialConfig,
    cf_engine,
    check_alpha_rate,
    consistent_estimate,
    kp_engine,
    sequential_estimate,
    two_step_test,
)
from rankinfer.rank_tests import (
    TestResult,
    VecCovariance,
    cf_one_step,
    cf_two_step,
    cov_cluster,
    cov_hacc_one_lag,
    cov_iid,
    critical_value,
    kp_m_test,
    kp_statistic,
    kp_test,
    p_value,
    rs_statistic,
)
from rankinfer.resampling import (
    BootstrapEnsemble,
    Scheme,
    draw,
    draw_circular_block,
    draw_cluster,
    draw_empirical,
)
from rankinfer.spectral import MatrixEstimate, SpectralDecomposition, partition, phi_r, svd
from rankinfer.tuning import KappaRule

__version__ = "0.1.0"
