"""Target Polish: Fast-HALS against an adaptively smoothed target.

Each refresh pulls badly fitted entries of ``X`` toward the global median,

    X_t = (1 - G) * median(X) + G * X,

with ``G`` computed from the residual of the current factorization against
the original ``X``.  Fast-HALS then minimises ``||X_t - W H^T||_F^2``.  The
target is refreshed on a schedule that stretches as it stabilises, and a
short weighted-NMF run on ``X`` finishes the job.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import (
    Fit,
    SolveConfig,
    _check_shapes,
    _fast_hals_sweep,
    _reseed_rng,
    _rre,
    _sweep_objective,
    init_factors,
    normalize_columns,
    relative_change,
    solve_weighted_nmf,
    with_iterations,
)
from .exceptions import NumericError, ShapeError
from .tensor import global_median, nonneg_checked
from .weights import WeightScheme, compute_weights, unit_interval


@dataclass(frozen=True)
class PolishConfig:
    solve: SolveConfig
    scheme: WeightScheme = WeightScheme("cim")
    max_step_iter: int = 100
    slope: float = 10.0
    inflexion_point: float = 0.01
    refine_max_iter: int = 20
    # "direct": more distance -> fewer refinement iterations; "reflected": the opposite
    refine_direction: str = "reflected"

    def __post_init__(self):
        if not isinstance(self.scheme, WeightScheme):
            object.__setattr__(self, "scheme", WeightScheme(self.scheme))
        if self.max_step_iter < 1:
            raise ValueError("max_step_iter must be >= 1")
        if self.refine_max_iter < 0:
            raise ValueError("refine_max_iter must be >= 0")
        if not self.slope > 0:
            raise ValueError("slope must be positive")
        if self.refine_direction not in ("direct", "reflected"):
            raise ValueError("refine_direction must be 'direct' or 'reflected'")


@dataclass
class PolishState:
    target: np.ndarray
    step_iter: int = 1
    last_target_change: float = math.inf
    iter: int = 0


@dataclass
class PolishFit(Fit):
    """:class:`Fit` plus the polish bookkeeping.

    ``objective`` holds the polished criterion per sweep; ``refresh[i]`` is
    1 when sweep ``i`` was the first against a newly refreshed target.
    ``clean_rre`` (if tracked) covers the sweeps followed by the refinement
    iterations.
    """

    refresh: list = field(default_factory=list)
    target: np.ndarray = None
    n_refine: int = 0
    refine_objective: list = field(default_factory=list)


def polish_target(x, approx, scheme):
    """Convex combination of ``median(x)`` and ``x`` weighted by residual weights."""
    if x.shape != approx.shape:
        raise ShapeError(f"shape mismatch {x.shape} vs {approx.shape}")
    if not isinstance(scheme, WeightScheme):
        scheme = WeightScheme(scheme)
    g = compute_weights(scheme, x, approx)
    if scheme.kind in ("l1", "l21"):
        g = unit_interval(g)
    med = global_median(x)
    out = (1.0 - g) * med + g * x
    # rounding must not push entries outside [min(x, med), max(x, med)]
    return np.clip(out, np.minimum(x, med), np.maximum(x, med))


def _logistic(change, height, slope, inflexion):
    z = slope * (change - inflexion)
    if z > 0:
        e = math.exp(-z)
        return height * e / (1.0 + e)
    return height / (1.0 + math.exp(z))


def _round_half_away(v):
    return int(math.floor(v + 0.5)) if v >= 0 else -int(math.floor(-v + 0.5))


def schedule_step(target_change, config):
    """Sweeps until the next target refresh, in ``[1, 1 + max_step_iter]``."""
    if target_change < 0 or math.isnan(target_change):
        raise ValueError("target_change must be a nonnegative number")
    v = 1.0 + _logistic(target_change, config.max_step_iter, config.slope, config.inflexion_point)
    return min(max(_round_half_away(v), 1), 1 + config.max_step_iter)


def refine_iterations(distance, config):
    """Number of weighted-NMF iterations run after the polish phase."""
    cap = config.refine_max_iter
    share = _logistic(distance, cap, config.slope, config.inflexion_point)
    if config.refine_direction == "reflected":
        share = cap - share
    return min(max(_round_half_away(1.0 + share) - 1, 0), cap)


def target_change(prev, new):
    denom = float(np.linalg.norm(prev))
    if denom == 0.0:
        raise NumericError("previous target has zero norm")
    return float(np.linalg.norm(new - prev)) / denom


def solve_target_polish(x, config, x_clean=None, factors=None):
    """Robust NMF by Target Polish.

    Parameters
    ----------
    x : ndarray (m, n)
        Nonnegative, nonzero data.
    config : PolishConfig
    x_clean : ndarray, optional
        Uncorrupted reference; when given, its relative reconstruction
        error is tracked per iteration.
    factors : FactorPair, optional
        Starting point; drawn with :func:`init_factors` otherwise.

    Returns
    -------
    PolishFit
    """
    x = nonneg_checked(x)
    if not np.any(x):
        raise NumericError("data matrix is identically zero")
    solve = config.solve
    if factors is None:
        factors = init_factors(x, solve)
    else:
        _check_shapes(x, factors)
        factors = factors.copy()
    rng = _reseed_rng(solve.seed)
    factors = normalize_columns(factors, rng)

    state = PolishState(target=polish_target(x, factors.product(), config.scheme))
    fit = PolishFit(factors, clean_rre=[] if x_clean is not None else None)
    since_refresh = 0
    fresh = False
    # a refresh happened between the last two recorded sweeps
    crossed = False

    target_sq = float(np.sum(state.target * state.target))
    while state.iter < solve.n_iter_max:
        fit.factors, parts = _fast_hals_sweep(state.target, fit.factors, rng=rng)
        state.iter += 1
        since_refresh += 1
        fit.objective.append(_sweep_objective(state.target, target_sq, fit.factors, parts))
        fit.refresh.append(int(fresh))
        fresh = False
        if x_clean is not None:
            fit.clean_rre.append(_rre(x_clean, fit.factors))

        force_refresh = False
        if len(fit.objective) > 1 and (not crossed or state.last_target_change == 0.0):
            if relative_change(fit.objective[-2], fit.objective[-1]) < solve.tol:
                if state.last_target_change <= solve.tol:
                    break
                # settled against a target that is still moving
                force_refresh = True
        crossed = False

        if state.iter >= solve.n_iter_max:
            break
        if force_refresh or since_refresh >= state.step_iter:
            new = polish_target(x, fit.factors.product(), config.scheme)
            state.last_target_change = target_change(state.target, new)
            state.step_iter = schedule_step(state.last_target_change, config)
            state.target = new
            target_sq = float(np.sum(new * new))
            since_refresh = 0
            fresh = crossed = True

    fit.target = state.target
    if not np.array_equal(state.target, x):
        distance = target_change(state.target, x)
        fit.n_refine = refine_iterations(distance, config)
    if fit.n_refine > 0:
        refine = solve_weighted_nmf(
            x, config.scheme, with_iterations(solve, fit.n_refine),
            warm=fit.factors, x_clean=x_clean,
        )
        fit.factors = refine.factors
        fit.refine_objective = refine.objective
        if x_clean is not None:
            fit.clean_rre.extend(refine.clean_rre)
    return fit
