import numpy as np
import pytest

from hougaard import _kernels
from hougaard.rng import RandomStream


@pytest.fixture
def stream():
    return RandomStream(20240601, 0)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    """Run a test under each variate-generator backend."""
    old = _kernels.backend()
    if request.param == "numba" and not _kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(old)


def within_se(est, target, se, k=4.0):
    return abs(est - target) <= k * se


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
