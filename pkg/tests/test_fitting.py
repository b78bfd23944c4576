import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubblelab.core.errors import CODE_INSUFFICIENT_DATA, NumericalError
from bubblelab.core.fitting import fit_log_power, fit_power, log_slope, noise_floor_mask


@settings(max_examples=50, deadline=None)
@given(p=st.floats(-6.0, 6.0), c=st.floats(1e-3, 1e3))
def test_fit_power_recovers_exact_law(p, c):
    x = np.logspace(0, 3, 20)
    fit = fit_power(x, c * x**p)
    assert fit.exponent == pytest.approx(p, abs=1e-9)
    assert fit.prefactor == pytest.approx(c, rel=1e-8)
    assert fit.n_points == 20


def test_fit_power_ignores_nonpositive_samples():
    x = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    y = x**-2.0
    y[1] = 0.0
    assert fit_power(x, y).n_points == 4


def test_fit_power_needs_data():
    with pytest.raises(NumericalError) as e:
        fit_power(np.array([1.0, 2.0]), np.array([1.0, 0.0]))
    assert e.value.code == CODE_INSUFFICIENT_DATA


def test_fit_log_power():
    x = np.logspace(-6, -2, 40)
    y = x**4 * (2.0 * np.log(x) + 3.0)
    fit = fit_log_power(x, y, guess=4.2, window=0.5)
    assert fit.exponent == pytest.approx(4.0, abs=1e-4)


@pytest.mark.parametrize("alpha, beta", [(2.0, 3.0), (0.3, 5.0), (-2.0, -30.0), (0.0, 1.0)])
def test_fit_log_power_over_two_decades(alpha, beta):
    x = np.logspace(-6, -4, 50)
    y = x**4 * (alpha * np.log(x) + beta)
    fit = fit_log_power(x, y, guess=4.0, window=1.0)
    assert fit.exponent == pytest.approx(4.0, abs=1e-3)


def test_log_slope():
    nu = np.array([0.3, 0.1, 0.03, 0.01])
    assert log_slope(nu, nu**-0.5) == pytest.approx(-0.5)


def test_noise_floor_mask():
    values = np.array([1e-3, 1e-9, -1e-2, 1e-14])
    assert noise_floor_mask(values, 1e-8).tolist() == [True, False, True, False]
    assert noise_floor_mask(values, None).all()
