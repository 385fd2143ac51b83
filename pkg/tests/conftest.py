import importlib.util

import numpy as np
import pytest

from carapace_id._kernels import _numpy

HAS_NUMBA = importlib.util.find_spec("numba") is not None


def _backends():
    params = [pytest.param(_numpy, id="numpy")]
    if HAS_NUMBA:
        from carapace_id._kernels import _numba

        params.append(pytest.param(_numba, id="numba"))
    return params


@pytest.fixture(params=_backends())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def blocky_texture(rng, h, w, block=6, contrast=200.0):
    """Piecewise-constant random texture: plenty of FAST corners."""
    coarse = rng.uniform(0, contrast, (h // block + 1, w // block + 1))
    return np.kron(coarse, np.ones((block, block)))[:h, :w] + 20.0
