import numpy as np
import pytest

from involstab import algebra


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture(params=["scalar", "matrix", "pointwise"])
def any_spec(request):
    if request.param == "scalar":
        return algebra.SCALAR
    if request.param == "matrix":
        return algebra.matrix_spec(2)
    return algebra.pointwise_spec(3)
