import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peridyn_rk.exceptions import KernelError, KernelSingularityError, NonIntegrableKernelError
from peridyn_rk.kernel import RadialKernel, compute_moments, kernel_value, sphere_area


def test_inverse_distance_value():
    k = RadialKernel.inverse_distance(0.1)
    assert kernel_value(k, 0.05) == pytest.approx(3 / (2 * math.pi * 0.001 * 0.05), rel=1e-13)
    assert kernel_value(k, 0.1) == 0.0
    assert kernel_value(k, 0.2) == 0.0
    with pytest.raises(KernelSingularityError):
        kernel_value(k, 0.0)


# frozen from tests/oracles/derive_oracles.py (symbolic polar integration)
@pytest.mark.parametrize("delta", [1.0, 0.25, 0.01])
@pytest.mark.parametrize("numeric", [False, True])
def test_moments(delta, numeric):
    mom = compute_moments(RadialKernel.inverse_distance(delta), numeric=numeric)
    assert mom.m == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(mom.M4, [[3 / 8, 1 / 8], [1 / 8, 3 / 8]], rtol=1e-12)
    assert mom.M6 == pytest.approx(3 * delta**2 / 5, rel=1e-12)
    assert mom.M4.sum() == pytest.approx(mom.m, rel=1e-12)


@given(st.sampled_from(["inverse_distance", "constant", "polynomial"]), st.integers(2, 3), st.floats(0.01, 2.0))
def test_moment_identities(family, dim, delta):
    coeffs = {"inverse_distance": (0.7,), "constant": (1.3,), "polynomial": (1.0, -0.5, -0.25)}[family]
    k = RadialKernel(family, coeffs, delta, dim)
    closed = compute_moments(k)
    numeric = compute_moments(k, numeric=True)
    assert closed.M4.sum() == pytest.approx(closed.m, rel=1e-12)
    assert numeric.m == pytest.approx(closed.m, rel=1e-10)
    assert closed.m == pytest.approx(compute_moments(k.with_delta(delta / 2)).m, rel=1e-13)


def test_non_integrable():
    with pytest.raises(NonIntegrableKernelError):
        compute_moments(RadialKernel("inverse_distance", (1.0,), 1.0, 2, power=4.0))


def test_bad_families():
    with pytest.raises(KernelError):
        RadialKernel("gaussian", (1.0,))
    with pytest.raises(KernelError):
        RadialKernel("polynomial", (0.0, 1.0))
    with pytest.raises(ValueError):
        RadialKernel.inverse_distance(-1.0)


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
