"""NMF solvers: reference HALS, Fast-HALS and weighted multiplicative updates.

The model is ``X ~ W H^T`` with ``X`` of shape (m, n), ``W`` (m, r) and
``H`` (n, r).  A sweep updates every column of ``H`` and then every column
of ``W``; the columns of ``W`` are rescaled to unit norm at the end of the
sweep with the scale moved into ``H`` so the product is unchanged.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ShapeError
from .tensor import EPS, nonneg_checked
from .weights import WeightScheme, compute_weights

# squared-norm threshold under which a column counts as zero
_ZERO_SQ = 1e-24
_RESEED_SCALE = 1e-3


@dataclass
class FactorPair:
    w: np.ndarray
    h: np.ndarray

    @property
    def rank(self):
        return self.w.shape[1]

    def product(self):
        return self.w @ self.h.T

    def copy(self):
        return FactorPair(self.w.copy(), self.h.copy())


@dataclass(frozen=True)
class SolveConfig:
    rank: int
    n_iter_max: int = 200
    tol: float = 1e-6
    seed: int = 0
    init: str = "random-uniform"

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.n_iter_max < 1:
            raise ValueError("n_iter_max must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")
        if self.init not in ("random-uniform", "nndsvd"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class Fit:
    """Solver output: final factors plus per-iteration diagnostics."""

    factors: FactorPair
    objective: list = field(default_factory=list)
    clean_rre: list = None

    @property
    def n_iter(self):
        return len(self.objective)


def objective(x, factors, weights=None):
    """Squared Frobenius error, optionally entrywise weighted."""
    r = factors.product()
    np.subtract(x, r, out=r)
    if weights is None:
        v = r.ravel()
        return float(v @ v)
    return float(np.sum(weights * r * r))


def relative_change(prev, cur):
    return abs(prev - cur) / max(prev, EPS)


# -- initialization ---------------------------------------------------------

def init_factors(x, config):
    """Nonnegative starting factors, deterministic in ``config.seed``."""
    m, n = x.shape
    r = config.rank
    if r > min(m, n):
        raise ValueError(f"rank {r} exceeds min(m, n) = {min(m, n)}")
    if config.init == "nndsvd":
        return _nndsvd(x, r)
    rng = np.random.default_rng(config.seed)
    scale = np.sqrt(float(np.mean(x)) / r)
    w = rng.random((m, r)) * scale
    h = rng.random((n, r)) * scale
    return FactorPair(w, h)


def _nndsvd(x, r):
    # Boutsidis & Gallopoulos (2008), zeros left in place
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    m, n = x.shape
    w = np.zeros((m, r))
    h = np.zeros((n, r))
    w[:, 0] = np.sqrt(s[0]) * np.abs(u[:, 0])
    h[:, 0] = np.sqrt(s[0]) * np.abs(vt[0])
    for j in range(1, r):
        a, b = u[:, j], vt[j]
        ap, an = np.maximum(a, 0), np.maximum(-a, 0)
        bp, bn = np.maximum(b, 0), np.maximum(-b, 0)
        ap_n, an_n = np.linalg.norm(ap), np.linalg.norm(an)
        bp_n, bn_n = np.linalg.norm(bp), np.linalg.norm(bn)
        pos, neg = ap_n * bp_n, an_n * bn_n
        if pos >= neg:
            uu, vv, sigma = ap / ap_n, bp / bp_n, pos
        else:
            uu, vv, sigma = an / an_n, bn / bn_n, neg
        if sigma == 0:
            continue
        lam = np.sqrt(s[j] * sigma)
        w[:, j] = lam * uu
        h[:, j] = lam * vv
    return FactorPair(w, h)


def normalize_columns(factors, rng=None):
    """Scale W columns to unit norm, moving the scale into H.

    A column whose norm is below 1e-12 is reseeded with small uniform
    positives drawn from ``rng`` and left unnormalized.
    """
    _normalize(factors, rng)
    return factors


def _normalize(factors, rng):
    # returns True if any column had to be reseeded
    w, h = factors.w, factors.h
    norms = np.sqrt(np.sum(w * w, axis=0))
    reseeded = False
    for k, nrm in enumerate(norms):
        if nrm * nrm < _ZERO_SQ:
            rng = rng if rng is not None else np.random.default_rng(0)
            w[:, k] = rng.random(w.shape[0]) * _RESEED_SCALE
            reseeded = True
            continue
        w[:, k] /= nrm
        h[:, k] *= nrm
    return reseeded


def _check_shapes(x, factors):
    m, n = x.shape
    if factors.w.shape[0] != m or factors.h.shape[0] != n or factors.w.shape[1] != factors.h.shape[1]:
        raise ShapeError(
            f"factors {factors.w.shape}, {factors.h.shape} do not match data {x.shape}"
        )


# -- HALS (reference) -------------------------------------------------------

def hals_step(x, factors, rng=None):
    """One HALS sweep, forming each rank-one residual explicitly.

    Slow (an m-by-n residual per component); kept as the oracle for
    :func:`fast_hals_step`.
    """
    _check_shapes(x, factors)
    w, h = factors.w.copy(), factors.h.copy()
    r = w.shape[1]
    for k in range(r):
        wk = w[:, k]
        d = wk @ wk
        if d < _ZERO_SQ:
            continue
        xk = x - w @ h.T + np.outer(wk, h[:, k])
        h[:, k] = np.maximum(xk.T @ wk / d, 0.0)
    for k in range(r):
        hk = h[:, k]
        d = hk @ hk
        if d < _ZERO_SQ:
            continue
        xk = x - w @ h.T + np.outer(w[:, k], hk)
        w[:, k] = np.maximum(xk @ hk / d, 0.0)
    return normalize_columns(FactorPair(w, h), rng)


# -- Fast-HALS --------------------------------------------------------------

def fast_hals_step(x, factors, gram_w=None, cross=None, rng=None):
    """One Fast-HALS sweep.

    ``gram_w = W^T W`` and ``cross = X^T W`` may be passed in when the
    caller already has them; they are used for the H half-sweep.  The W
    half-sweep recomputes ``X H`` and ``H^T H`` from the updated H.
    """
    _check_shapes(x, factors)
    return _fast_hals_sweep(x, factors, gram_w, cross, rng)[0]


def _fast_hals_sweep(x, factors, gram_w=None, cross=None, rng=None):
    # Also returns (<W, X H>, <W^T W, H^T H>) taken before normalization,
    # or None if a column was reseeded; the solvers derive the objective
    # from these without forming W H^T.
    w, h = factors.w.copy(), factors.h.copy()
    r = w.shape[1]
    if gram_w is None:
        gram_w = w.T @ w
    if cross is None:
        cross = x.T @ w
    for k in range(r):
        d = gram_w[k, k]
        if d < _ZERO_SQ:
            continue
        h[:, k] = np.maximum(h[:, k] + (cross[:, k] - h @ gram_w[:, k]) / d, 0.0)

    gram_h = h.T @ h
    cross_h = x @ h
    for k in range(r):
        d = gram_h[k, k]
        if d < _ZERO_SQ:
            continue
        w[:, k] = np.maximum(w[:, k] + (cross_h[:, k] - w @ gram_h[:, k]) / d, 0.0)
    parts = (float(np.sum(w * cross_h)), float(np.sum((w.T @ w) * gram_h)))
    out = FactorPair(w, h)
    if _normalize(out, rng):
        parts = None
    return out, parts


def _sweep_objective(x, x_sq, factors, parts):
    """Objective after a sweep; exact residual norm when cancellation would bite."""
    if parts is not None:
        j = x_sq - 2.0 * parts[0] + parts[1]
        # below this the three-term expansion loses more than ~1e-14 relative
        if j >= 1e-2 * x_sq:
            return j
    return objective(x, factors)


def _reseed_rng(seed):
    return np.random.default_rng((seed, 1))


def solve_nmf(x, config, x_clean=None, factors=None):
    """Unweighted NMF by Fast-HALS.

    Stops when the relative change of the objective falls below
    ``config.tol`` or after ``config.n_iter_max`` sweeps.  When ``x_clean``
    is given, the relative error against it is tracked per sweep.
    """
    x = nonneg_checked(x)
    if factors is None:
        factors = init_factors(x, config)
    else:
        _check_shapes(x, factors)
        factors = factors.copy()
    rng = _reseed_rng(config.seed)
    factors = normalize_columns(factors, rng)
    fit = Fit(factors, clean_rre=[] if x_clean is not None else None)
    x_sq = float(np.sum(x * x))
    for it in range(config.n_iter_max):
        fit.factors, parts = _fast_hals_sweep(x, fit.factors, rng=rng)
        fit.objective.append(_sweep_objective(x, x_sq, fit.factors, parts))
        if x_clean is not None:
            fit.clean_rre.append(_rre(x_clean, fit.factors))
        if it > 0 and relative_change(fit.objective[-2], fit.objective[-1]) < config.tol:
            break
    return fit


def _rre(x_clean, factors):
    return float(np.linalg.norm(x_clean - factors.product()) / np.linalg.norm(x_clean))


# -- weighted multiplicative updates ----------------------------------------

def weighted_mu_step(x, factors, g, eps=EPS, approx=None):
    """One pass of weighted Lee-Seung updates (W then H) for fixed weights ``g``.

    Returns the new factors and their product ``W H^T``.
    """
    w, h = factors.w, factors.h
    if approx is None:
        approx = w @ h.T
    gx = g * x
    w = w * (gx @ h) / np.maximum((g * approx) @ h, eps)
    approx = w @ h.T
    h = h * (gx.T @ w) / np.maximum((g * approx).T @ w, eps)
    return FactorPair(w, h), w @ h.T


def solve_weighted_nmf(x, scheme, config, warm=None, x_clean=None):
    """Weighted NMF by multiplicative updates with per-iteration reweighting.

    The recorded objective is ``sum(G * (X - W H^T)^2)`` using the weights
    of that iteration.  With ``scheme='none'`` this is plain Lee-Seung.
    """
    x = nonneg_checked(x)
    if not isinstance(scheme, WeightScheme):
        scheme = WeightScheme(scheme)
    if warm is None:
        factors = init_factors(x, config)
    else:
        _check_shapes(x, warm)
        factors = warm.copy()
    fit = Fit(factors, clean_rre=[] if x_clean is not None else None)
    approx = factors.product()
    for it in range(config.n_iter_max):
        g = compute_weights(scheme, x, approx)
        fit.factors, approx = weighted_mu_step(x, fit.factors, g, scheme.epsilon, approx)
        r = x - approx
        fit.objective.append(float(np.sum(g * r * r)))
        if x_clean is not None:
            fit.clean_rre.append(_rre(x_clean, fit.factors))
        if it > 0 and relative_change(fit.objective[-2], fit.objective[-1]) < config.tol:
            break
    return fit


def with_iterations(config, n_iter_max):
    return replace(config, n_iter_max=n_iter_max)
