import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from robust_factorize.corruption import CorruptionSpec, corrupt
from robust_factorize.exceptions import ShapeError


def images(rng, shape=(20, 20), n=6):
    # values strictly below the corruption intensity so every hit is visible
    return rng.random((shape[0] * shape[1], n)) * 0.9


def test_none_is_identity(rng):
    x = images(rng)
    assert np.array_equal(corrupt(x, (20, 20), CorruptionSpec("none")), x)


def test_full_salt(rng):
    x = images(rng)
    out = corrupt(x, (20, 20), CorruptionSpec("salt", salt_fraction=1.0, intensity=0.75))
    assert np.all(out == 0.75)


def test_block_is_one_contiguous_square(rng):
    x = images(rng)
    out = corrupt(x, (20, 20), CorruptionSpec("block", block_size=5, seed=3))
    for j in range(x.shape[1]):
        diff = (out[:, j] != x[:, j]).reshape(20, 20)
        assert diff.sum() == 25
        lab, count = ndimage.label(diff)
        assert count == 1
        rows, cols = np.nonzero(diff)
        assert rows.max() - rows.min() == 4 and cols.max() - cols.min() == 4


def test_rectangular_override(rng):
    x = images(rng, (12, 16), 3)
    out = corrupt(x, (12, 16), CorruptionSpec("block", block_h=3, block_w=7, seed=1))
    assert np.all(np.sum(out != x, axis=0) == 21)


@settings(max_examples=30, deadline=None)
@given(kind=st.sampled_from(["block", "salt"]), seed=st.integers(0, 2**31),
       frac=st.floats(0, 1), size=st.integers(1, 8))
def test_counts_values_and_determinism(kind, seed, frac, size):
    rng = np.random.default_rng(seed)
    x = images(rng, (9, 11), 4)
    spec = CorruptionSpec(kind, block_size=size, salt_fraction=frac, intensity=1.0, seed=seed)
    out = corrupt(x, (9, 11), spec)
    changed = out != x
    expected = size * size if kind == "block" else int(np.floor(frac * 99))
    assert np.all(changed.sum(axis=0) == expected)
    assert np.all(out[changed] == 1.0)
    assert np.array_equal(out[~changed], x[~changed])
    assert np.array_equal(corrupt(x, (9, 11), spec), out)


def test_seed_changes_mask(rng):
    x = images(rng)
    a = corrupt(x, (20, 20), CorruptionSpec("salt", seed=1))
    b = corrupt(x, (20, 20), CorruptionSpec("salt", seed=2))
    assert not np.array_equal(a, b)


def test_errors(rng):
    with pytest.raises(ShapeError):
        corrupt(images(rng), (19, 20), CorruptionSpec("salt"))
    with pytest.raises(ShapeError):
        corrupt(images(rng, (4, 4)), (4, 4), CorruptionSpec("block", block_size=5))
    with pytest.raises(ValueError):
        CorruptionSpec("gauss")
    with pytest.raises(ValueError):
        CorruptionSpec("salt", salt_fraction=1.5)
