import hypothesis
import numpy as np
import pytest

from robust_factorize.dataio import write_pgm

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def planted(seed, m, n, r):
    """Exactly rank-r nonnegative matrix."""
    g = np.random.default_rng(seed)
    return g.random((m, r)) @ g.random((r, n))


def planted_outliers(seed, m=400, n=100, r=10, frac=0.05, factor=10.0):
    """Planted low-rank matrix and a copy with ``frac`` entries set to ``factor * max``."""
    g = np.random.default_rng(seed)
    clean = g.random((m, r)) @ g.random((r, n))
    noisy = clean.copy()
    noisy[g.random((m, n)) < frac] = factor * clean.max()
    return clean, noisy


def write_synthetic_faces(root, n_subjects=4, per_subject=6, shape=(12, 10), seed=0):
    """Flat-layout PGM dataset: each subject is a distinct smooth template plus jitter."""
    g = np.random.default_rng(seed)
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    root.mkdir(parents=True, exist_ok=True)
    for s in range(n_subjects):
        cy, cx = g.uniform(0, h), g.uniform(0, w)
        template = 0.15 + 0.6 * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (0.15 * h * w))
        for i in range(per_subject):
            img = np.clip(template * g.uniform(0.8, 1.2) + 0.03 * g.random(shape), 0, 1)
            write_pgm(root / f"subj{s}_{i:02d}.pgm", img)
    return root


@pytest.fixture
def faces_dir(tmp_path):
    return write_synthetic_faces(tmp_path / "faces")


# one line per acceptance criterion, collected by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
