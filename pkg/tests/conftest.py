import numpy as np
import pytest

from quasilab import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=sorted(kernels.implementations()))
def impl(request):
    """Each available kernel implementation (numpy, and cython when built)."""
    return kernels.implementations()[request.param]
