"""Distributed sum-rate-maximizing transceiver coordination for MIMO
interfering networks, with a Monte-Carlo benchmark CLI."""

from .chanmodel import DeploymentSpec, Geometry, calibrate_noise, dense_drop, iid_channels, pathloss_db
from .coord import AlgorithmId, RunTrace, init_filters, overhead, run
from .errors import (
    BelowMinDistance,
    ConvergenceFailure,
    DimensionMismatch,
    InfeasibleAllocation,
    InvalidInput,
    MimocoordError,
    NotHermitian,
    NotPositiveDefinite,
    ParseError,
    RejectionBudgetExceeded,
    SingularProjection,
    ValidationError,
)
from .matrixkit import CholeskyFactor, EigenPair, cholesky, herm_eig, whiten
from .netmodel import (
    ChannelSet,
    CovariancePair,
    FilterBank,
    NetworkConfig,
    dlt_objective,
    dlt_user_lb,
    fwd_covariances,
    gmrq_value,
    interference_limited_check,
    rev_covariances,
    sum_rate,
    user_rate,
)
from .solvers import (
    PowerAllocation,
    SolverOutput,
    eigen_beamform,
    gmrq_max,
    max_sinr_update,
    nh_waterfill,
    power_alloc,
    rank_adapt,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmId",
    "BelowMinDistance",
    "ChannelSet",
    "CholeskyFactor",
    "ConvergenceFailure",
    "CovariancePair",
    "DeploymentSpec",
    "DimensionMismatch",
    "EigenPair",
    "FilterBank",
    "Geometry",
    "InfeasibleAllocation",
    "InvalidInput",
    "MimocoordError",
    "NetworkConfig",
    "NotHermitian",
    "NotPositiveDefinite",
    "ParseError",
    "PowerAllocation",
    "RejectionBudgetExceeded",
    "RunTrace",
    "SingularProjection",
    "SolverOutput",
    "ValidationError",
    "calibrate_noise",
    "cholesky",
    "dense_drop",
    "dlt_objective",
    "dlt_user_lb",
    "eigen_beamform",
    "fwd_covariances",
    "gmrq_max",
    "gmrq_value",
    "herm_eig",
    "iid_channels",
    "init_filters",
    "interference_limited_check",
    "max_sinr_update",
    "nh_waterfill",
    "overhead",
    "pathloss_db",
    "power_alloc",
    "rank_adapt",
    "rev_covariances",
    "run",
    "sum_rate",
    "user_rate",
    "whiten",
]
