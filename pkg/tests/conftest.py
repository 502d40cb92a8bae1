import numpy as np
import pytest

from aloft import SyntheticFieldSpec, generate_synthetic_field


@pytest.fixture(scope="session")
def default_field():
    """The bundled 4416-step synthetic field used by the acceptance suite."""
    return generate_synthetic_field(SyntheticFieldSpec())


@pytest.fixture()
def rng():
    return np.random.default_rng(20140814)
