import mpmath
import numpy as np
import pytest

from lgdecomp.polar_grid import DetectorSpec


def lg_reference(l, p, w0, r, dps=60):
    """LG radial profile in arbitrary precision (mpmath), returned as mpf."""
    with mpmath.workdps(dps):
        a = abs(l)
        r, w0 = mpmath.mpf(r), mpmath.mpf(w0)
        x = 2 * r ** 2 / w0 ** 2
        norm = mpmath.sqrt(2 * mpmath.factorial(p) / (mpmath.pi * mpmath.factorial(p + a))) / w0
        return norm * (mpmath.sqrt(2) * r / w0) ** a * mpmath.exp(-r ** 2 / w0 ** 2) \
            * mpmath.laguerre(p, a, x)


@pytest.fixture
def det256():
    return DetectorSpec(256, 256, 50e-6)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
