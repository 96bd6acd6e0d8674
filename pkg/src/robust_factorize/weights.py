"""Entrywise weights derived from the residual ``X - W H^T``.

Supported schemes:

* ``none``  -- all ones (ordinary least squares).
* ``cim``   -- correntropy weights ``exp(-r^2 / sigma^2)``.
* ``huber`` -- 1 inside ``delta = median |r|``, ``delta / |r|`` outside.
* ``l1``    -- IRLS weights ``1 / |r|``.
* ``l21``   -- IRLS weights ``1 / ||r_j||_2``, constant per column.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ShapeError
from .tensor import EPS

KINDS = ("none", "cim", "huber", "l1", "l21")
SIGMA_SOURCES = ("residual", "data")


@dataclass(frozen=True)
class WeightScheme:
    kind: str = "none"
    epsilon: float = EPS
    # which matrix's variance sets the CIM bandwidth
    cim_sigma_source: str = "data"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight scheme {self.kind!r}; expected one of {KINDS}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.cim_sigma_source not in SIGMA_SOURCES:
            raise ValueError(f"cim_sigma_source must be one of {SIGMA_SOURCES}")


def _as_scheme(scheme):
    return scheme if isinstance(scheme, WeightScheme) else WeightScheme(str(scheme))


def compute_weights(scheme, x, approx):
    """Weight matrix ``G`` for the residual ``x - approx``.

    Parameters
    ----------
    scheme : WeightScheme or str
    x, approx : ndarray of the same shape

    Returns
    -------
    ndarray
        Same shape as ``x``.  Entries lie in (0, 1] for ``none``, ``cim``
        and ``huber``; ``l1``/``l21`` weights are positive but unbounded.
    """
    scheme = _as_scheme(scheme)
    if x.shape != approx.shape:
        raise ShapeError(f"shape mismatch {x.shape} vs {approx.shape}")
    if scheme.kind == "none":
        return np.ones_like(x, dtype=np.float64)

    r = x - approx
    if scheme.kind == "cim":
        return _cim(r, x, scheme)
    if scheme.kind == "huber":
        return _huber(np.abs(r), scheme.epsilon)
    if scheme.kind == "l1":
        return 1.0 / np.maximum(np.abs(r), scheme.epsilon)
    # l21
    col_norms = np.sqrt(np.sum(r * r, axis=0))
    g = 1.0 / np.maximum(col_norms, scheme.epsilon)
    return np.broadcast_to(g, x.shape).copy()


def _cim(r, x, scheme):
    sigma2 = float(np.var(r if scheme.cim_sigma_source == "residual" else x))
    if sigma2 <= 0.0:
        return np.ones_like(r)
    with np.errstate(over="ignore"):  # tiny sigma2 -> exp(-inf) = 0, floored below
        g = np.exp(-(r * r) / sigma2)
    # keep weights strictly positive even when the exponent underflows
    return np.maximum(g, np.finfo(np.float64).tiny)


def _huber(abs_r, eps):
    delta = float(np.median(abs_r))
    g = np.ones_like(abs_r)
    outside = abs_r > delta
    scale = delta if delta > 0.0 else eps
    with np.errstate(over="ignore"):  # denormal |r| -> inf, clipped to 1
        g[outside] = np.clip(scale / abs_r[outside], np.finfo(np.float64).tiny, 1.0)
    return g


def unit_interval(g):
    """Rescale positive weights into (0, 1] by dividing by the largest entry."""
    return g / float(np.max(g))
