import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holderdini.errors import IllConditionedError, InvalidSpecError, OrderingError, TruncationWarning
from holderdini.heat_kernel import DiffusionSpec, accumulate, kernel, kernel_derivatives, kernel_mass

ONE = DiffusionSpec.identity(1)
TWO = DiffusionSpec.identity(2)


def test_accumulate_identity():
    pair = accumulate(DiffusionSpec.identity(2), 0.0, 2.0)
    assert np.allclose(pair.A, 2 * np.eye(2))
    assert np.allclose(pair.B, 0.5 * np.eye(2))


def test_accumulate_linear_closed_form():
    pair = accumulate(DiffusionSpec.linear([[1.0]], [[0.5]]), 0.0, 1.0)
    assert pair.A[0, 0] == pytest.approx(1.25, rel=1e-14)
    assert pair.B[0, 0] == pytest.approx(0.8, rel=1e-14)


def test_accumulate_bounds_equality_case():
    pair = accumulate(ONE, 0.0, 1.0)
    assert pair.A[0, 0] == 1.0


@given(st.floats(0.0, 0.9), st.floats(0.01, 1.0), st.floats(0.0, 2 * math.pi))
@settings(max_examples=30, deadline=None)
def test_accumulate_ellipticity_bounds(r, gap, angle):
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    mat = rot @ np.diag([0.5, 2.0]) @ rot.T
    spec = DiffusionSpec.linear(mat, 0.1 * np.eye(2), Gamma=2.5)
    pair = accumulate(spec, r, r + gap)
    ev = np.linalg.eigvalsh(pair.A)
    assert ev.min() >= gap / spec.Gamma - 1e-12
    assert ev.max() <= gap * spec.Gamma + 1e-12
    assert np.allclose(pair.B @ pair.A, np.eye(2), atol=1e-10)


def test_accumulate_ordering_error():
    with pytest.raises(OrderingError):
        accumulate(ONE, 1.0, 1.0)


def test_accumulate_ill_conditioned():
    spec = DiffusionSpec(n=2, a_time=lambda t: np.diag([1.0, 1e-14]), Gamma=1e14)
    with pytest.raises(IllConditionedError):
        accumulate(spec, 0.0, 1.0)


def test_non_elliptic_rejected():
    with pytest.raises(InvalidSpecError):
        DiffusionSpec.constant([[1.0, 0.0], [0.0, -1.0]], Gamma=2.0)


def test_kernel_values(frozen):
    assert kernel(ONE, 0.0, 1.0, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
    assert kernel(ONE, 0.0, 1.0, 1.0) == pytest.approx(frozen["gauss_at_1"], rel=1e-14)


def test_kernel_zero_before_start():
    assert np.all(kernel(ONE, 1.0, 1.0, np.linspace(-1, 1, 5)) == 0.0)
    assert np.all(kernel(ONE, 1.0, 0.5, np.linspace(-1, 1, 5)) == 0.0)


def test_kernel_derivatives_at_origin():
    k0 = 1 / math.sqrt(2 * math.pi)
    assert kernel_derivatives(ONE, 0.0, 1.0, 0.0, 1)[0] == 0.0
    assert kernel_derivatives(ONE, 0.0, 1.0, 0.0, 2)[0, 0] == pytest.approx(-k0, rel=1e-15)
    hess = kernel_derivatives(TWO, 0.0, 1.0, np.zeros(2), 2)
    assert np.trace(hess) == pytest.approx(-2 * kernel(TWO, 0.0, 1.0, np.zeros(2)), rel=1e-14)


@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(0.2, 2.0))
@settings(max_examples=40, deadline=None)
def test_derivatives_match_finite_differences(x0, x1, t):
    spec = DiffusionSpec.constant([[1.0, 0.3], [0.3, 0.8]])
    x = np.array([x0, x1]) * math.sqrt(t)
    h = 1e-5
    grad = kernel_derivatives(spec, 0.0, t, x, 1)
    hess = kernel_derivatives(spec, 0.0, t, x, 2)
    scale = kernel(spec, 0.0, t, np.zeros(2))
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (kernel(spec, 0.0, t, x + e) - kernel(spec, 0.0, t, x - e)) / (2 * h)
        assert grad[i] == pytest.approx(fd, rel=1e-5, abs=1e-8 * scale)
        fd2 = (kernel_derivatives(spec, 0.0, t, x + e, 1) - kernel_derivatives(spec, 0.0, t, x - e, 1)) / (2 * h)
        assert np.allclose(hess[:, i], fd2, rtol=1e-5, atol=1e-7 * scale)


@given(st.floats(0.05, 4.0), st.floats(-3.0, 3.0))
@settings(max_examples=30, deadline=None)
def test_scaling(t, x):
    assert kernel(ONE, 0.0, t, x) == pytest.approx(t ** -0.5 * kernel(ONE, 0.0, 1.0, x / math.sqrt(t)), rel=1e-13)


def test_chapman_kolmogorov():
    z = np.linspace(-12, 12, 4001)
    dz = z[1] - z[0]
    x, y = 0.3, -0.7
    lhs = np.sum(kernel(ONE, 0.0, 0.4, x - z) * kernel(ONE, 0.4, 1.0, z - y)) * dz
    assert lhs == pytest.approx(float(kernel(ONE, 0.0, 1.0, x - y)), abs=1e-6)


def test_kernel_mass_unit_gap():
    assert kernel_mass(ONE, 0.0, 1.0, L=8.0, N=512) == pytest.approx(1.0, abs=1e-8)


def test_kernel_mass_sharp_kernel():
    assert kernel_mass(ONE, 0.0, 1e-4, L=8.0, N=512) == pytest.approx(1.0, abs=1e-8)


def test_kernel_mass_degenerate():
    assert kernel_mass(ONE, 1.0, 1.0) == 0.0


def test_kernel_mass_truncation_warning():
    with pytest.warns(TruncationWarning):
        kernel_mass(ONE, 0.0, 10.0, L=2.0, N=64)
