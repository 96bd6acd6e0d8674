"""Robust nonnegative matrix factorization with Target Polish."""

from .corruption import CorruptionSpec, corrupt
from .dataio import Dataset, load_image_dir, load_report, save_report
from .engine import (
    FactorPair,
    Fit,
    SolveConfig,
    fast_hals_step,
    hals_step,
    init_factors,
    solve_nmf,
    solve_weighted_nmf,
)
from .exceptions import DataError, NumericError, ShapeError
from .metrics import accuracy, cluster_assign, nmi, rre
from .polish import (
    PolishConfig,
    PolishFit,
    polish_target,
    schedule_step,
    solve_target_polish,
    target_change,
)
from .weights import WeightScheme, compute_weights

__version__ = "0.1.0"
