"""
Scaled upper incomplete gamma function G(a, x) = x^-a Gamma(a, x)

Vectorised over x > 0 for a fixed complex a. Series expansion below
max(Re a + 1, 3/2), Lentz continued fraction above, both after
"Numerical Recipes", chapter 6. Non-positive integers a go through the
exponential integral.
"""

import logging
import math

import mpmath
import numpy as np

from paramodular_verify.exceptions import ConvergenceError


logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps
FPMIN = 1e-300
EULER_GAMMA = 0.57721566490153286061


def _continued_fraction(a: complex, x: np.ndarray, accuracy: float, max_iteration: int) -> np.ndarray:
    """e^-x h with h the Lentz evaluation of the Legendre continued fraction."""
    b = x + 1.0 - a
    c = np.full(x.shape, 1.0 / FPMIN, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, max_iteration + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < FPMIN, FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < FPMIN, FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= accuracy
        if not active.any():
            return np.exp(-x) * h
    raise ConvergenceError(f"incomplete gamma continued fraction did not converge for a = {a}")


def _lower_series(a: complex, x: np.ndarray, accuracy: float, max_iteration: int) -> np.ndarray:
    """sum_n x^n / (a (a+1) ... (a+n))."""
    term = np.full(x.shape, 1.0 / a, dtype=complex)
    total = term.copy()
    for n in range(1, max_iteration + 1):
        term = term * x / (a + n)
        total = total + term
        if np.all(np.abs(term) < np.abs(total) * accuracy):
            return total
    raise ConvergenceError(f"incomplete gamma series did not converge for a = {a}")


def _exp_integral(x: np.ndarray, accuracy: float, max_iteration: int) -> np.ndarray:
    """E1(x) = -gamma - ln x - sum_k (-x)^k / (k k!) for small x."""
    term = np.ones(x.shape)
    total = np.zeros(x.shape)
    for k in range(1, max_iteration + 1):
        term = term * (-x) / k
        total = total + term / k
        if np.all(np.abs(term / k) < np.abs(total) * accuracy + FPMIN):
            return -EULER_GAMMA - np.log(x) - total
    raise ConvergenceError("exponential integral series did not converge")


def _non_positive_integer(n: int, x: np.ndarray, accuracy: float, max_iteration: int) -> np.ndarray:
    """x^n Gamma(-n, x) from E1 and a finite sum."""
    e1 = _exp_integral(x, accuracy, max_iteration)
    finite = np.zeros(x.shape)
    for k in range(n):
        finite = finite + (-1) ** k * math.factorial(k) * x ** (n - k - 1)
    return ((-1) ** n / math.factorial(n)) * (x**n * e1 - np.exp(-x) * finite) + 0j


def upper_gamma_scaled(
    a: complex,
    x: np.ndarray | float,
    precision_bits: int = 53,
    accuracy: float = 1e-15,
    max_iteration: int = 2000,
) -> np.ndarray:
    """x^-a Gamma(a, x) for x > 0 as a complex array shaped like x."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x <= 0):
        raise ValueError("incomplete gamma needs x > 0")
    a = complex(a)

    if precision_bits > 53:
        with mpmath.workprec(precision_bits):
            a_mp = mpmath.mpc(a.real, a.imag)
            out = np.array(
                [complex(mpmath.gammainc(a_mp, mpmath.mpf(float(v))) * mpmath.power(mpmath.mpf(float(v)), -a_mp)) for v in x]
            )
        return out[0] if scalar else out

    out = np.empty(x.shape, dtype=complex)
    large = x >= max(a.real + 1.0, 1.5)
    if large.any():
        out[large] = _continued_fraction(a, x[large], accuracy, max_iteration)
    small = ~large
    if small.any():
        xs = x[small]
        if a.imag == 0 and a.real <= 0 and a.real == round(a.real):
            out[small] = _non_positive_integer(int(-round(a.real)), xs, accuracy, max_iteration)
        else:
            gamma_a = complex(mpmath.gamma(a))
            out[small] = np.exp(-a * np.log(xs)) * gamma_a - np.exp(-xs) * _lower_series(a, xs, accuracy, max_iteration)
    return out[0] if scalar else out


def upper_gamma(a: complex, x: np.ndarray | float, precision_bits: int = 53) -> np.ndarray:
    """Gamma(a, x)."""
    x_arr = np.asarray(x, dtype=float)
    return np.exp(complex(a) * np.log(x_arr)) * upper_gamma_scaled(a, x_arr, precision_bits)
