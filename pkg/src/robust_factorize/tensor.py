"""Dense matrix helpers and serialization.

Matrices are plain 2-D ``float64`` numpy arrays.  The helpers here validate
them and provide the handful of kernels the solvers share.
"""

import struct
from pathlib import Path

import numpy as np

from .exceptions import DataError, NumericError, ShapeError

EPS = 1e-12
RFM_MAGIC = b"RFM1"

_OPS = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": np.divide,
}


def as_matrix(a, nonneg=False):
    """Return ``a`` as a finite 2-D float64 array (a copy only if needed)."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError("matrix contains NaN or Inf")
    if nonneg and np.any(arr < 0):
        raise DataError("matrix has negative entries")
    return arr


def nonneg_checked(a):
    return as_matrix(a, nonneg=True)


def matmul(a, b):
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def frobenius_norm(a):
    return float(np.linalg.norm(a))


def global_median(a):
    """Median over all entries; mean of the two central values for even counts."""
    return float(np.median(a))


def elementwise(a, b, op):
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown op {op!r}") from None
    if op == "div":
        b = np.maximum(b, EPS)
    with np.errstate(over="ignore", invalid="ignore"):
        out = fn(a, b)
    if not np.all(np.isfinite(out)):
        raise NumericError(f"non-finite result in elementwise {op}")
    return out


# -- serialization ----------------------------------------------------------

def save_matrix(a, path):
    """Write ``a`` as RFM1 binary, or CSV when the suffix is ``.csv``."""
    a = as_matrix(a)
    path = Path(path)
    if path.suffix.lower() == ".csv":
        # repr round-trips float64 exactly
        lines = [",".join(repr(float(v)) for v in row) for row in a]
        path.write_text("\n".join(lines) + "\n")
        return
    rows, cols = a.shape
    with open(path, "wb") as fh:
        fh.write(RFM_MAGIC)
        fh.write(struct.pack("<QQ", rows, cols))
        fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_matrix(path, nonneg=False):
    """Load a matrix written by :func:`save_matrix` (format auto-detected)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if raw[:4] == RFM_MAGIC:
        if len(raw) < 20:
            raise DataError(f"{path}: truncated RFM1 header")
        rows, cols = struct.unpack("<QQ", raw[4:20])
        body = raw[20:]
        if len(body) != rows * cols * 8:
            raise DataError(f"{path}: expected {rows}x{cols} float64 payload")
        arr = np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(np.float64)
    else:
        arr = _parse_csv(raw.decode("utf-8", errors="strict"), path)
    try:
        return as_matrix(arr, nonneg=nonneg)
    except (NumericError, ShapeError) as exc:
        raise DataError(f"{path}: {exc}") from exc


def _parse_csv(text, path):
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty CSV")
    if len({len(r) for r in rows}) != 1:
        raise DataError(f"{path}: ragged CSV rows")
    return np.array(rows, dtype=np.float64)
