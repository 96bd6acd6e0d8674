"""Seeded block and salt corruption of image columns."""

from dataclasses import dataclass

import numpy as np

from .exceptions import ShapeError


@dataclass(frozen=True)
class CorruptionSpec:
    kind: str = "none"
    block_size: int = 10
    salt_fraction: float = 0.10
    intensity: float = 1.0
    seed: int = 0
    block_h: int = None
    block_w: int = None

    def __post_init__(self):
        if self.kind not in ("block", "salt", "none"):
            raise ValueError(f"unknown corruption kind {self.kind!r}")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if not 0.0 <= self.salt_fraction <= 1.0:
            raise ValueError("salt_fraction must lie in [0, 1]")

    @property
    def block_shape(self):
        return (self.block_h or self.block_size, self.block_w or self.block_size)

    def to_dict(self):
        return {
            "kind": self.kind,
            "block_size": self.block_size,
            "salt_fraction": self.salt_fraction,
            "intensity": self.intensity,
            "seed": self.seed,
            "block_h": self.block_h,
            "block_w": self.block_w,
        }


def corrupt(x, image_shape, spec):
    """Return a corrupted copy of ``x`` (one image per column).

    Each image gets its own generator seeded by ``(spec.seed, column)``, so
    the mask of any column does not depend on how many columns there are.
    """
    height, width = image_shape
    if x.shape[0] != height * width:
        raise ShapeError(f"{x.shape[0]} rows do not match image shape {height}x{width}")
    out = np.array(x, dtype=np.float64, copy=True)
    if spec.kind == "none":
        return out

    if spec.kind == "block":
        bh, bw = spec.block_shape
        if bh > height or bw > width:
            raise ShapeError(f"block {bh}x{bw} does not fit a {height}x{width} image")
    else:
        n_salt = int(np.floor(spec.salt_fraction * height * width))

    for j in range(out.shape[1]):
        rng = np.random.default_rng((spec.seed, j))
        img = out[:, j].reshape(height, width)
        if spec.kind == "block":
            top = rng.integers(0, height - bh + 1)
            left = rng.integers(0, width - bw + 1)
            img[top:top + bh, left:left + bw] = spec.intensity
        else:
            idx = rng.choice(height * width, size=n_salt, replace=False)
            img.reshape(-1)[idx] = spec.intensity
        out[:, j] = img.reshape(-1)
    return out
