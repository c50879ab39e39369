import os

# Pin BLAS threading before numpy loads so every test run is reproducible.
for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")

import numpy as np
import pytest

from latent_lookahead import numcore as nc


@pytest.fixture
def f64():
    """Run the test in float64 with deterministic reductions, then restore."""
    nc.set_default_dtype(np.float64)
    nc.set_deterministic(True)
    yield
    nc.set_default_dtype(np.float32)
    nc.set_deterministic(False)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
