import mpmath
import numpy as np
import pytest

from paramodular_verify.gammainc import upper_gamma, upper_gamma_scaled


# ---------------------------------------------------------
# Helpers
# ---------------------------------------------------------
def reference(a, x):
    return complex(mpmath.gammainc(a, x) * mpmath.power(x, -a))


POINTS = [0.05, 0.3, 1.0, 1.4, 2.0, 5.0, 20.0, 60.0]


@pytest.mark.parametrize("a", [2.5, 0.5 + 1j, -1.5, 3.0, 0.7 - 2.0j, 0.0, -2.0, -0.4 + 0.3j])
def test_scaled_incomplete_gamma_matches_mpmath(a):
    values = upper_gamma_scaled(a, np.array(POINTS))
    for x, value in zip(POINTS, values, strict=True):
        expected = reference(a, x)
        assert abs(value - expected) <= 1e-10 * abs(expected)


def test_scalar_input_gives_scalar():
    value = upper_gamma_scaled(1.0, 2.0)
    assert np.ndim(value) == 0
    # x^-1 Gamma(1, x) = e^-x / x
    assert complex(value) == pytest.approx(np.exp(-2.0) / 2.0, rel=1e-13)


def test_high_precision_path():
    x = np.array([0.5, 3.0])
    fast = upper_gamma_scaled(1.5 + 0.5j, x)
    slow = upper_gamma_scaled(1.5 + 0.5j, x, precision_bits=120)
    assert np.allclose(fast, slow, rtol=1e-12, atol=0)


def test_unscaled():
    assert complex(upper_gamma(2.0, 1.0)) == pytest.approx(2 * np.exp(-1.0), rel=1e-13)


def test_non_positive_arguments():
    with pytest.raises(ValueError):
        upper_gamma_scaled(1.0, np.array([1.0, 0.0]))
