import numpy as np
import pytest

from umsa.models import EllipticModel, SirModel

DATA_SEED = 20240801


@pytest.fixture(scope="session")
def elliptic_model():
    """Elliptic model with one pinned synthetic dataset (theta_true = 100)."""
    base = EllipticModel()
    rng = np.random.default_rng(DATA_SEED)
    y, u_true = base.generate_data(np.array([100.0]), rng, l_data=12)
    model = base.with_data(y)
    model.u_true = u_true  # test-only attribute
    return model


@pytest.fixture(scope="session")
def sir_model():
    """Epidemic model with one pinned synthetic dataset (theta_true = (2, 0.1))."""
    base = SirModel()
    rng = np.random.default_rng(DATA_SEED)
    y, u_true = base.generate_data(np.array([2.0, 0.1]), rng, l_data=10)
    model = base.with_data(y)
    model.u_true = u_true
    return model
