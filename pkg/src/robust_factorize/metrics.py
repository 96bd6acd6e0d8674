"""Reconstruction and clustering metrics."""

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.cluster import KMeans

from .exceptions import NumericError, ShapeError


def rre(x_clean, factors):
    """Relative reconstruction error ``||X - W H^T||_F / ||X||_F``."""
    approx = factors.product()
    if approx.shape != x_clean.shape:
        raise ShapeError(f"factor product {approx.shape} vs data {x_clean.shape}")
    denom = float(np.linalg.norm(x_clean))
    if denom == 0.0:
        raise NumericError("reference matrix is identically zero")
    return float(np.linalg.norm(x_clean - approx)) / denom


def cluster_assign(h, k, seed=0):
    """k-means (k-means++ seeding, single start) on the rows of ``h``."""
    h = np.asarray(h, dtype=np.float64)
    if k < 1 or k > h.shape[0]:
        raise ValueError(f"k={k} must be in [1, {h.shape[0]}]")
    km = KMeans(n_clusters=k, init="k-means++", n_init=1, max_iter=300, tol=1e-6,
                random_state=seed)
    return km.fit_predict(h)


def contingency(a, b):
    """Joint count table with rows indexed by the labels of ``a``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError("label vectors must be 1-D and of equal length")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def accuracy(pred, truth):
    """Fraction of samples matched under the best one-to-one relabelling."""
    table = contingency(pred, truth)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / float(table.sum())


def nmi(a, b):
    """Normalized mutual information, ``I(a; b) / sqrt(H(a) H(b))``.

    If either partition has a single cluster the score is 1 when both are
    the single same cluster and 0 otherwise.
    """
    table = contingency(a, b).astype(np.float64)
    n = table.sum()
    pa = table.sum(axis=1) / n
    pb = table.sum(axis=0) / n
    ha = -np.sum(pa * np.log(pa))
    hb = -np.sum(pb * np.log(pb))
    if ha == 0.0 or hb == 0.0:
        return 1.0 if table.shape == (1, 1) else 0.0
    pab = table / n
    nz = pab > 0
    mi = np.sum(pab[nz] * np.log(pab[nz] / np.outer(pa, pb)[nz]))
    return float(min(max(mi / np.sqrt(ha * hb), 0.0), 1.0))
