from __future__ import annotations

import numpy as np
import pytest

from ciet.data import NUMERIC, Dataset


def make_ds(x, treated, outcome, names=None) -> Dataset:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if names is None:
        names = tuple(f"f{i}" for i in range(x.shape[1]))
    return Dataset(tuple(names), (NUMERIC,) * x.shape[1], x,
                   np.asarray(treated, dtype=bool), np.asarray(outcome, dtype=np.uint8), {})


def random_trial(rng, n_rows, n_features, distinct=8, p_t=0.5, p_y=0.4) -> Dataset:
    """A random small randomized trial with low-cardinality numeric features."""
    x = rng.integers(0, distinct, size=(n_rows, n_features)).astype(np.float64)
    treated = rng.random(n_rows) < p_t
    outcome = (rng.random(n_rows) < p_y).astype(np.uint8)
    return make_ds(x, treated, outcome)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
