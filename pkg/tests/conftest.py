import math

import numpy as np
import pytest

from segerdahl.models import DriftSpec, ModelParams


@pytest.fixture
def canonical():
    """c = r = lam = mu = 1, no killing."""
    return ModelParams(1.0, 1.0, 1.0, 1.0, 0.0)


@pytest.fixture
def canonical_drift():
    return DriftSpec.linear(1.0, 1.0)


def rel_err(got, want):
    got, want = np.asarray(got, dtype=float), np.asarray(want, dtype=float)
    return np.max(np.abs(got - want) / np.maximum(np.abs(want), 1e-300))


def within_stderr(est, se, truth, k=3.0):
    return abs(est - truth) <= k * se + 1e-15


E = math.e
