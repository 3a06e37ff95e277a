"""Rankin-type Dirichlet series over coefficient data and the prefactor algebra of their functional equations."""

import logging
import math
from pathlib import Path
from typing import NamedTuple

import mpmath
import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from paramodular_verify.characters import DirichletCharacter, dirichlet_l, gauss_sum, is_prime, twist_kernel, two_variable_kernel
from paramodular_verify.exceptions import (
    ConvergenceError,
    DivergentSeriesError,
    NotFoundError,
    PoleError,
    PreconditionError,
)


logger = logging.getLogger(__name__)


class CoeffSeries(BaseModel):
    """Coefficients c_1, c_2, ... with |c_m| <= growth_constant * m^growth_exponent on the stored prefix."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coefficients: np.ndarray
    weight: int
    genus: int = 2
    growth_exponent: float = 0.0
    growth_constant: float | None = None

    @field_validator("coefficients", mode="before")
    @classmethod
    def as_array(cls, value: object) -> np.ndarray:
        array = np.asarray(value, dtype=complex).reshape(-1)
        array.setflags(write=False)
        return array

    @field_validator("genus")
    @classmethod
    def check_genus(cls, value: int) -> int:
        if value != 2:
            raise ValueError("only genus 2 series are supported")
        return value

    @model_validator(mode="after")
    def check_growth(self) -> "CoeffSeries":
        m = np.arange(1, len(self.coefficients) + 1, dtype=float)
        ratios = np.abs(self.coefficients) / m**self.growth_exponent
        observed = float(ratios.max()) if len(ratios) else 0.0
        if self.growth_constant is None:
            object.__setattr__(self, "growth_constant", observed)
        elif observed > self.growth_constant * (1 + 1e-12):
            raise ValueError(
                f"|c_m| exceeds {self.growth_constant} m^{self.growth_exponent} on the stored prefix (ratio {observed})"
            )
        return self

    def __len__(self) -> int:
        return len(self.coefficients)

    def with_coefficients(self, coefficients: np.ndarray) -> "CoeffSeries":
        return CoeffSeries(
            coefficients=coefficients,
            weight=self.weight,
            genus=self.genus,
            growth_exponent=self.growth_exponent,
            growth_constant=self.growth_constant,
        )


class SeriesResult(NamedTuple):
    value: complex
    tail_bound: float
    terms_used: int


class TwistCheck(NamedTuple):
    averaged_error: float
    gauss_error: float | None


def load_coefficients(path: str | Path, weight: int, growth_exponent: float = 0.0) -> CoeffSeries:
    """Read lines "m re im"; blank lines and lines starting with # are skipped, missing m are zero."""
    entries: dict[int, complex] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'm re im', got {line!r}")
        m = int(parts[0])
        if m < 1:
            raise ValueError(f"{path}:{lineno}: index m = {m} must be positive")
        entries[m] = complex(float(parts[1]), float(parts[2]))
    size = max(entries, default=0)
    coefficients = np.zeros(size, dtype=complex)
    for m, value in entries.items():
        coefficients[m - 1] = value
    logger.debug(f"loaded {len(entries)} coefficients from {path}")
    return CoeffSeries(coefficients=coefficients, weight=weight, growth_exponent=growth_exponent)


def dirichlet_D(c: CoeffSeries, chi: DirichletCharacter, s: complex, cutoff: int | None = None) -> SeriesResult:  # noqa: N802
    """sum_{m <= M} chi(m) c_m m^-s with the tail bound C M^(g - sigma + 1) / (sigma - g - 1)."""
    s = complex(s)
    g = c.growth_exponent
    if s.real <= g + 1:
        raise DivergentSeriesError(f"D(s) needs Re s > {g + 1}, got {s.real}")
    size = len(c) if cutoff is None else min(cutoff, len(c))
    m = np.arange(1, size + 1)
    weights = chi.value_table[m % chi.modulus]
    value = complex(np.sum(weights * c.coefficients[:size] * np.exp(-s * np.log(m))))
    tail = float(c.growth_constant) * size ** (g - s.real + 1) / (s.real - g - 1)  # type: ignore[arg-type]
    return SeriesResult(value, tail, size)


def completion_prefactor(chi: DirichletCharacter, k: int, s: complex, precision_bits: int = 53) -> complex:
    """(2 pi / N)^(-2s) Gamma(s) Gamma(s - k + 2) L(2s - 2k + 4, chi^2)."""
    s = complex(s)
    n = chi.modulus
    for a in (s, s - k + 2):
        if a.imag == 0 and a.real <= 0 and a.real == round(a.real):
            raise PoleError(f"Gamma has a pole at {a.real}")
    square = chi * chi
    w = 2 * s - 2 * k + 4
    if square.is_principal() and w == 1:
        raise PoleError("L(w, chi^2) has a pole at w = 1")
    gammas = complex(mpmath.gamma(s) * mpmath.gamma(s - k + 2))
    return (2 * math.pi / n) ** (-2 * s) * gammas * dirichlet_l(square, w, precision_bits)


def completed_D(  # noqa: N802
    c: CoeffSeries, chi: DirichletCharacter, s: complex, cutoff: int | None = None
) -> SeriesResult:
    """The completed series (2 pi / N)^(-2s) Gamma(s) Gamma(s - k + 2) L(2s - 2k + 4, chi^2) D(s)."""
    factor = completion_prefactor(chi, c.weight, s)
    series = dirichlet_D(c, chi, s, cutoff)
    return SeriesResult(factor * series.value, abs(factor) * series.tail_bound, series.terms_used)


def twist_check(c: CoeffSeries, chi: DirichletCharacter, terms: int = 100) -> TwistCheck:
    """Largest deviation of chi(m) c_m from the averaged form and, for primitive chi, from the Gauss form."""
    size = min(terms, len(c))
    direct = np.array([chi(m) for m in range(1, size + 1)]) * c.coefficients[:size]
    averaged = np.array([two_variable_kernel(chi, m) for m in range(1, size + 1)]) * c.coefficients[:size]
    averaged_error = float(np.max(np.abs(direct - averaged), initial=0.0))
    gauss_error = None
    if chi.is_primitive():
        g = complex(gauss_sum(chi.conj()))
        gauss = np.array([twist_kernel(chi, m) / g for m in range(1, size + 1)]) * c.coefficients[:size]
        gauss_error = float(np.max(np.abs(direct - gauss), initial=0.0))
    return TwistCheck(averaged_error, gauss_error)


def twist_coeffs(c: CoeffSeries, chi: DirichletCharacter, validate: bool = True) -> CoeffSeries:
    """c_m -> chi(m) c_m."""
    m = np.arange(1, len(c) + 1)
    twisted = c.with_coefficients(chi.value_table[m % chi.modulus] * c.coefficients)
    if validate:
        check = twist_check(c, chi)
        scale = float(np.max(np.abs(c.coefficients), initial=0.0)) * chi.modulus
        worst = max(check.averaged_error, check.gauss_error or 0.0)
        if worst > 1e-9 * max(scale, 1.0):
            raise ConvergenceError(f"twisted coefficients disagree with the kernel forms by {worst:.3g}")
    return twisted


def _require_primitive(chi: DirichletCharacter, N: int) -> None:  # noqa: N803
    if chi.modulus != N:
        raise PreconditionError(f"character modulus {chi.modulus} differs from N = {N}")
    if not chi.is_primitive():
        raise PreconditionError(f"{chi} is not primitive")


def fe_factor(chi: DirichletCharacter, N: int, p: int, k: int, s: complex) -> complex:  # noqa: N803
    """G_chi^4 / N^2 p^(3(k - s - 1)) (1 + p^-(k - s)) (1 + p^-(s - k + 2))^-1."""
    _require_primitive(chi, N)
    if not is_prime(p) or (p - 1) % N:
        raise PreconditionError(f"p = {p} must be a prime with p = 1 mod {N}")
    s = complex(s)
    denominator = 1 + complex(p) ** (-(s - k + 2))
    if abs(denominator) < 1e-14:
        raise PoleError(f"1 + p^-(s - k + 2) vanishes at s = {s}")
    g = complex(gauss_sum(chi))
    return g**4 / N**2 * complex(p) ** (3 * (k - s - 1)) * (1 + complex(p) ** (-(k - s))) / denominator


def spinor_fe_factor(chi: DirichletCharacter, N: int, k: int) -> complex:  # noqa: N803
    """(-1)^k G_chi^4 / N^2."""
    _require_primitive(chi, N)
    return (-1) ** k * complex(gauss_sum(chi)) ** 4 / N**2


def euler_factor_gritsenko(p: int, k: int, s: complex) -> complex:
    """p^-s (1 - p^(k - 2 - s)) (p + (-1)^k p^(k - s))."""
    s = complex(s)
    pc = complex(p)
    return pc ** (-s) * (1 - pc ** (k - 2 - s)) * (p + (-1) ** k * pc ** (k - s))


def find_prime(N: int, bound: int = 1_000_000) -> int:  # noqa: N803
    """Smallest prime p <= bound with p = 1 mod N."""
    if N < 1:
        raise PreconditionError(f"N = {N} must be positive")
    for p in range(N + 1, bound + 1, N):
        if is_prime(p):
            return p
    raise NotFoundError(f"no prime p = 1 mod {N} below {bound}")
