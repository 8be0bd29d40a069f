import pytest

from cayley_ising import ModelParams


@pytest.fixture
def ti_point():
    """A parameter point with three translation-invariant solutions."""
    return ModelParams.from_thetas(5.0, 2.0)


@pytest.fixture
def periodic_point():
    """A parameter point with a period-two pair of solutions."""
    return ModelParams.from_thetas(5.0, 0.5)
