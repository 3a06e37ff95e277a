"""
Epstein zeta functions with characteristics over positive definite 4x4 forms

    zeta(s, u, v, Q) = sum_{lam in Z^4, lam + u != 0} e^{2 pi i v.lam} Q[lam + u]^-s
    Lambda(s, u, v, Q) = pi^-s Gamma(s) zeta(s, u, v, Q)

Lambda is continued to all s by splitting the theta integral at t0:

    Lambda = sum'_{x in Z^4 + u} e^{2 pi i v.(x - u)} t0^s G(s, pi t0 Q[x])
           + D sum'_{y in Z^4 + v} e^{-2 pi i u.y} t0^(s-2) G(2 - s, pi Q^-1[y] / t0)
           + D [v in Z^4] t0^(s-2) / (s - 2) - [u in Z^4] t0^s / s

with D = det(Q)^-1/2, G(a, x) = x^-a Gamma(a, x) and u reduced to [0, 1)^4.
"""

import logging
import math
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath
import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from scipy.special import erfc

from paramodular_verify.exceptions import DivergentSeriesError, PoleError, PreconditionError, TailBoundError
from paramodular_verify.gammainc import upper_gamma_scaled


logger = logging.getLogger(__name__)

# above this many shift plus phase classes the refinement lattice is used
CLASS_PATH_LIMIT = 32
# largest weight table (product of refinement periods) the refinement path builds
FINE_TABLE_LIMIT = 20_000_000


def to_fraction(x: Fraction | int | float | str) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int | str):
        return Fraction(x)
    return Fraction(float(x)).limit_denominator(10**6)


def gamma_factor(s: complex) -> complex:
    """pi^-s Gamma(s)."""
    return complex(mpmath.power(mpmath.pi, -s) * mpmath.gamma(s))


# ---------------------------------------------------------------------------
# lattice enumeration
# ---------------------------------------------------------------------------


def iter_ellipsoid_points(
    gram: np.ndarray,
    bound: float,
    center: Sequence[float] | np.ndarray | None = None,
    exclude_zero: bool = True,
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Integer points lam with gram[lam + center] <= bound, one slab of the last coordinate at a time.

    Fincke-Pohst: the last two coordinates are looped over, the first two are
    vectorised. Yields (lam, values) in a deterministic order.
    """
    gram = np.asarray(gram, dtype=float)
    c = np.zeros(4) if center is None else np.asarray(center, dtype=float)
    r = np.linalg.cholesky(gram).T
    slack = bound * (1 + 1e-12) + 1e-300

    def span(budget: float, offset: float, diag: float, shift: float) -> range:
        # x = lam + shift with |diag * x + offset| <= sqrt(budget)
        root = math.sqrt(max(budget, 0.0))
        lo = math.ceil((-root - offset) / diag - shift)
        hi = math.floor((root - offset) / diag - shift)
        return range(lo, hi + 1)

    for l3 in span(slack, 0.0, r[3, 3], c[3]):
        x3 = l3 + c[3]
        b3 = slack - (r[3, 3] * x3) ** 2
        chunks: list[np.ndarray] = []
        for l2 in span(b3, r[2, 3] * x3, r[2, 2], c[2]):
            x2 = l2 + c[2]
            b2 = b3 - (r[2, 2] * x2 + r[2, 3] * x3) ** 2
            l1 = np.array(span(b2, r[1, 2] * x2 + r[1, 3] * x3, r[1, 1], c[1]), dtype=np.int64)
            if l1.size == 0:
                continue
            x1 = l1 + c[1]
            b1 = b2 - (r[1, 1] * x1 + r[1, 2] * x2 + r[1, 3] * x3) ** 2
            offset0 = r[0, 1] * x1 + r[0, 2] * x2 + r[0, 3] * x3
            root = np.sqrt(np.maximum(b1, 0.0))
            lo = np.ceil((-root - offset0) / r[0, 0] - c[0]).astype(np.int64)
            hi = np.floor((root - offset0) / r[0, 0] - c[0]).astype(np.int64)
            counts = np.maximum(hi - lo + 1, 0)
            total = int(counts.sum())
            if total == 0:
                continue
            starts = np.repeat(np.cumsum(counts) - counts, counts)
            l0 = np.repeat(lo, counts) + (np.arange(total) - starts)
            block = np.empty((total, 4), dtype=np.int64)
            block[:, 0] = l0
            block[:, 1] = np.repeat(l1, counts)
            block[:, 2] = l2
            block[:, 3] = l3
            chunks.append(block)
        if not chunks:
            continue
        lam = np.concatenate(chunks)
        x = lam + c
        values = np.einsum("ni,ij,nj->n", x, gram, x)
        keep = values <= bound
        if exclude_zero:
            keep &= ~np.all(x == 0, axis=1)
        if keep.any():
            yield lam[keep], values[keep]


def ellipsoid_points(
    gram: np.ndarray,
    bound: float,
    center: Sequence[float] | np.ndarray | None = None,
    exclude_zero: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Integer points lam with gram[lam + center] <= bound as (lam, values)."""
    slabs = list(iter_ellipsoid_points(gram, bound, center, exclude_zero))
    if not slabs:
        return np.empty((0, 4), dtype=np.int64), np.empty(0)
    return np.concatenate([lam for lam, _ in slabs]), np.concatenate([values for _, values in slabs])


# ---------------------------------------------------------------------------
# characteristics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CharacteristicBatch:
    """Terms c_j Lambda(s, u_j, v_j, Q) with u_j = shift_numerators_j / shift_denominators
    and v_j = phase_numerators_j / phase_denominators (coordinatewise)."""

    coefficients: np.ndarray
    shift_numerators: np.ndarray
    shift_denominators: tuple[int, int, int, int]
    phase_numerators: np.ndarray
    phase_denominators: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=complex).reshape(-1))
        for name in ("shift_numerators", "phase_numerators"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64).reshape(-1, 4))
        k = len(self.coefficients)
        if self.shift_numerators.shape[0] != k or self.phase_numerators.shape[0] != k:
            raise ValueError("characteristic arrays disagree in length")

    def __len__(self) -> int:
        return len(self.coefficients)

    @classmethod
    def from_characteristics(
        cls, items: Iterable[tuple[complex, Sequence[Fraction | int | float], Sequence[Fraction | int | float]]]
    ) -> "CharacteristicBatch":
        coefficients, shifts, phases = [], [], []
        for c, u, v in items:
            coefficients.append(complex(c))
            shifts.append([to_fraction(x) for x in u])
            phases.append([to_fraction(x) for x in v])
        if not coefficients:
            raise ValueError("empty characteristic batch")
        m = tuple(math.lcm(*(u[i].denominator for u in shifts)) for i in range(4))
        n = tuple(math.lcm(*(v[i].denominator for v in phases)) for i in range(4))
        return cls(
            np.array(coefficients),
            np.array([[int(u[i] * m[i]) for i in range(4)] for u in shifts]),
            m,  # type: ignore[arg-type]
            np.array([[int(v[i] * n[i]) for i in range(4)] for v in phases]),
            n,  # type: ignore[arg-type]
        )

    @classmethod
    def single(
        cls,
        shift: Sequence[Fraction | int | float] = (0, 0, 0, 0),
        phase: Sequence[Fraction | int | float] = (0, 0, 0, 0),
        coefficient: complex = 1.0,
    ) -> "CharacteristicBatch":
        return cls.from_characteristics([(coefficient, shift, phase)])

    def rescaled(self, m: Sequence[int], n: Sequence[int]) -> "CharacteristicBatch":
        """The same terms over the common denominators m (shifts) and n (phases)."""
        fm = np.array([mi // di for mi, di in zip(m, self.shift_denominators, strict=True)])
        fn = np.array([ni // di for ni, di in zip(n, self.phase_denominators, strict=True)])
        return CharacteristicBatch(
            self.coefficients, self.shift_numerators * fm, tuple(m), self.phase_numerators * fn, tuple(n)  # type: ignore[arg-type]
        )

    def scaled(self, factor: complex) -> "CharacteristicBatch":
        return CharacteristicBatch(
            self.coefficients * factor,
            self.shift_numerators,
            self.shift_denominators,
            self.phase_numerators,
            self.phase_denominators,
        )

    @classmethod
    def combine(cls, batches: Sequence["CharacteristicBatch"]) -> "CharacteristicBatch":
        m = tuple(math.lcm(*(b.shift_denominators[i] for b in batches)) for i in range(4))
        n = tuple(math.lcm(*(b.phase_denominators[i] for b in batches)) for i in range(4))
        parts = [b.rescaled(m, n) for b in batches]
        return cls(
            np.concatenate([b.coefficients for b in parts]),
            np.concatenate([b.shift_numerators for b in parts]),
            m,  # type: ignore[arg-type]
            np.concatenate([b.phase_numerators for b in parts]),
            n,  # type: ignore[arg-type]
        )


class EpsteinResult(NamedTuple):
    value: complex
    tail_bound: float
    terms_used: int
    t0: float | None = None


class FunctionalCheck(NamedTuple):
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: float


def functional_check(lhs: complex, rhs: complex) -> FunctionalCheck:
    abs_err = abs(lhs - rhs)
    return FunctionalCheck(lhs, rhs, abs_err, abs_err / max(abs(lhs), abs(rhs), 1e-300))


def _reduced_terms(batch: CharacteristicBatch) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Shift classes a in [0, m), phase classes b in [0, n) and coefficients with e^{-2 pi i v.floor(u)} applied,
    duplicates merged."""
    m = np.array(batch.shift_denominators, dtype=np.int64)
    n = np.array(batch.phase_denominators, dtype=np.int64)
    floor = np.floor_divide(batch.shift_numerators, m)
    a = batch.shift_numerators - floor * m
    b = np.mod(batch.phase_numerators, n)
    correction = (np.mod(b * floor, n) / n).sum(axis=1)
    c = batch.coefficients * np.exp(-2j * np.pi * correction)
    keys, inverse = np.unique(np.concatenate([a, b], axis=1), axis=0, return_inverse=True)
    merged = np.zeros(len(keys), dtype=complex)
    np.add.at(merged, inverse.reshape(-1), c)
    return keys[:, :4], keys[:, 4:], merged


def _check_poles(s: complex, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> None:
    if abs(s - 2) < 1e-14 and abs(c[np.all(b == 0, axis=1)].sum()) > 0:
        raise PoleError("Lambda has a pole at s = 2 for an integral phase")
    if abs(s) < 1e-14 and abs(c[np.all(a == 0, axis=1)].sum()) > 0:
        raise PoleError("Lambda has a pole at s = 0 for an integral shift")


def _exact_angles(numerators: np.ndarray, points: np.ndarray, denominators: np.ndarray) -> np.ndarray:
    """sum_i numerators_i points_i / denominators_i mod 1 for every (numerator row, point) pair."""
    prod = np.mod(numerators[:, None, :] * points[None, :, :], denominators)
    return (prod / denominators).sum(axis=2)


def _class_path(
    form: np.ndarray,
    inverse: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    m: np.ndarray,
    n: np.ndarray,
    bounds: tuple[float, float],
) -> tuple[list[tuple[np.ndarray, np.ndarray]], list[tuple[np.ndarray, np.ndarray]]]:
    """(weights, values) blocks for the direct and the dual side, one enumeration per class."""
    direct = []
    for cls_a in np.unique(a, axis=0):
        members = np.all(a == cls_a, axis=1)
        lam, values = ellipsoid_points(form, bounds[0], cls_a / m)
        if len(lam) == 0:
            continue
        weights = np.exp(2j * np.pi * _exact_angles(b[members], lam, n)).T @ c[members]
        direct.append((weights, values))
    dual = []
    for cls_b in np.unique(b, axis=0):
        members = np.all(b == cls_b, axis=1)
        mu, values = ellipsoid_points(inverse, bounds[1], cls_b / n)
        if len(mu) == 0:
            continue
        # u.y = a.mu / m + a.b / (m n) with y = mu + b / n
        angles = _exact_angles(a[members], mu, m) + (np.mod(a[members] * cls_b, m * n) / (m * n)).sum(axis=1)[:, None]
        weights = np.exp(-2j * np.pi * angles).T @ c[members]
        dual.append((weights, values))
    return direct, dual


def _fine_path(
    form: np.ndarray,
    inverse: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    m: np.ndarray,
    n: np.ndarray,
    bounds: tuple[float, float],
) -> tuple[list[tuple[np.ndarray, np.ndarray]], list[tuple[np.ndarray, np.ndarray]]]:
    """(weights, values) blocks on the refinement lattices (1/m)Z^4 and (1/n)Z^4 with periodic weight tables."""
    table = np.zeros((*m, *n), dtype=complex)
    np.add.at(table, tuple(a.T) + tuple(b.T), c)

    # direct weight at x = k / m: sum_b table[k mod m, b] e^{2 pi i b.lam / n}, lam = k // m
    direct_table = np.fft.ifftn(table, axes=(4, 5, 6, 7)) * float(np.prod(n))
    k, values = ellipsoid_points(form / np.outer(m, m), bounds[0])
    weights = direct_table[tuple(np.mod(k, m).T) + tuple(np.mod(k // m, n).T)]
    nonzero = weights != 0
    direct = [(weights[nonzero], values[nonzero])]

    # dual weight at y = k / n: sum_a table[a, k mod n] e^{-2 pi i a.y / m}
    twiddle = np.ones(table.shape, dtype=complex)
    for i in range(4):
        factor = np.exp(-2j * np.pi * np.outer(np.arange(m[i]), np.arange(n[i])) / (m[i] * n[i]))
        shape = [1] * 8
        shape[i], shape[4 + i] = m[i], n[i]
        twiddle = twiddle * factor.reshape(shape)
    dual_table = np.fft.fftn(table * twiddle, axes=(0, 1, 2, 3))
    k, values = ellipsoid_points(inverse / np.outer(n, n), bounds[1])
    weights = dual_table[tuple(np.mod(k // n, m).T) + tuple(np.mod(k, n).T)]
    dual = [(weights, values)]
    return direct, dual


def completed_epstein_sum(
    form: np.ndarray,
    batch: CharacteristicBatch,
    s: complex,
    tolerance: float = 1e-12,
    t0: float | None = None,
    precision_bits: int = 53,
    fine: bool | None = None,
) -> EpsteinResult:
    """sum_j c_j Lambda(s, u_j, v_j, Q) through the theta split."""
    form = np.asarray(form, dtype=float)
    s = complex(s)
    a, b, c = _reduced_terms(batch)
    _check_poles(s, a, b, c)
    m = np.array(batch.shift_denominators, dtype=np.int64)
    n = np.array(batch.phase_denominators, dtype=np.int64)

    n_classes = len(np.unique(a, axis=0)) + len(np.unique(b, axis=0))
    table_size = int(np.prod(m) * np.prod(n))
    if fine is None:
        fine = n_classes > CLASS_PATH_LIMIT and table_size <= FINE_TABLE_LIMIT
    if fine and table_size > FINE_TABLE_LIMIT:
        raise PreconditionError(f"refinement table of {table_size} entries is too large")
    if fine:
        densities = float(np.prod(m)), float(np.prod(n))
    else:
        densities = float(len(np.unique(a, axis=0))), float(len(np.unique(b, axis=0)))

    det = float(np.linalg.det(form))
    d_factor = det**-0.5
    if t0 is None:
        t0 = (densities[0] / (densities[1] * det)) ** 0.25
    cutoff = math.log(1.0 / tolerance) + 8.0
    bounds = (cutoff / (math.pi * t0), cutoff * t0 / math.pi)
    inverse = np.linalg.inv(form)
    inverse = (inverse + inverse.T) / 2

    path = _fine_path if fine else _class_path
    direct, dual = path(form, inverse, a, b, c, m, n, bounds)

    total = 0j
    terms = 0
    for weights, values in direct:
        total += complex(np.sum(weights * upper_gamma_scaled(s, math.pi * t0 * values, precision_bits))) * t0**s
        terms += len(values)
    for weights, values in dual:
        g = upper_gamma_scaled(2 - s, math.pi * values / t0, precision_bits)
        total += d_factor * complex(np.sum(weights * g)) * t0 ** (s - 2)
        terms += len(values)

    integral_phase = np.all(b == 0, axis=1)
    integral_shift = np.all(a == 0, axis=1)
    if integral_phase.any():
        total += d_factor * complex(c[integral_phase].sum()) * t0 ** (s - 2) / (s - 2)
    if integral_shift.any():
        total -= complex(c[integral_shift].sum()) * t0**s / s

    logger.debug(
        f"theta split: {'refinement' if fine else 'class'} path, t0 = {t0:.6g}, "
        f"{terms} lattice points, {len(c)} characteristic classes"
    )
    return EpsteinResult(total, tolerance * float(np.abs(c).sum()), terms, t0)


def residue_class_sum(
    form: np.ndarray,
    scale: Sequence[float],
    weights: Sequence[complex] | np.ndarray,
    s: complex,
    tolerance: float = 1e-12,
    precision_bits: int = 53,
) -> EpsteinResult:
    """pi^-s Gamma(s) sum_{lam != 0} w(lam_4 mod M) form[scale * lam]^-s, continued in s.

    lam_4 = a + M mu turns the sum into Epstein functions of diag(1, 1, 1, M) A diag(1, 1, 1, M),
    A = diag(scale) form diag(scale), with shifts (0, 0, 0, a/M).
    """
    w = np.asarray(weights, dtype=complex)
    modulus = len(w)
    scaled = np.asarray(form, dtype=float) * np.outer(scale, scale)
    e = np.array([1.0, 1.0, 1.0, float(modulus)])
    classes = np.flatnonzero(w)
    if len(classes) == 0:
        return EpsteinResult(0j, 0.0, 0)
    shifts = np.zeros((len(classes), 4), dtype=np.int64)
    shifts[:, 3] = classes
    batch = CharacteristicBatch(
        w[classes], shifts, (1, 1, 1, modulus), np.zeros((len(classes), 4), dtype=np.int64), (1, 1, 1, 1)
    )
    return completed_epstein_sum(scaled * np.outer(e, e), batch, s, tolerance, precision_bits=precision_bits)


# ---------------------------------------------------------------------------
# single Epstein functions
# ---------------------------------------------------------------------------


class EpsteinParams(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    form: np.ndarray
    s: complex
    shift: tuple[Fraction, Fraction, Fraction, Fraction] = (Fraction(0),) * 4
    phase: tuple[Fraction, Fraction, Fraction, Fraction] = (Fraction(0),) * 4
    truncation_radius: float | None = None
    precision_bits: int = 53
    tolerance: float = 1e-12

    @field_validator("form", mode="before")
    @classmethod
    def check_form(cls, value: object) -> np.ndarray:
        form = np.asarray(value, dtype=float)
        if form.shape != (4, 4) or not np.allclose(form, form.T):
            raise ValueError("form must be a symmetric 4x4 matrix")
        try:
            np.linalg.cholesky(form)
        except np.linalg.LinAlgError as e:
            raise ValueError("form is not positive definite") from e
        return (form + form.T) / 2

    @field_validator("shift", "phase", mode="before")
    @classmethod
    def check_characteristic(cls, value: object) -> tuple[Fraction, ...]:
        items = tuple(to_fraction(x) for x in value)  # type: ignore[attr-defined]
        if len(items) != 4:
            raise ValueError("characteristics have four entries")
        return items

    @field_validator("s", mode="before")
    @classmethod
    def check_s(cls, value: object) -> complex:
        return complex(value)  # type: ignore[arg-type]

    @property
    def batch(self) -> CharacteristicBatch:
        return CharacteristicBatch.single(self.shift, self.phase)

    def reflected(self) -> "EpsteinParams":
        """Parameters of Lambda(2 - s, v, -u, Q^-1)."""
        inverse = np.linalg.inv(self.form)
        return self.model_copy(
            update={
                "form": (inverse + inverse.T) / 2,
                "s": 2 - self.s,
                "shift": self.phase,
                "phase": tuple(-x for x in self.shift),
            }
        )


def _direct_characters(params: EpsteinParams) -> tuple[list[float], Callable[[np.ndarray], np.ndarray]]:
    """Shift reduced to [0, 1)^4 and lam -> e^{2 pi i v.lam} with the phase of the integer part of the shift folded in."""
    floor = [math.floor(u) for u in params.shift]
    reduced = [float(u - f) for u, f in zip(params.shift, floor, strict=True)]
    den = np.array([v.denominator for v in params.phase], dtype=np.int64)
    num = np.array([v.numerator for v in params.phase], dtype=np.int64)
    correction = complex(np.exp(-2j * np.pi * sum(float(v * f) for v, f in zip(params.phase, floor, strict=True))))

    def characters(lam: np.ndarray) -> np.ndarray:
        return np.exp(2j * np.pi * (np.mod(num * lam, den) / den).sum(axis=1)) * correction

    return reduced, characters


def epstein_direct(
    params: EpsteinParams,
    completed: bool = False,
    tail_tolerance: float | None = None,
) -> EpsteinResult:
    """Truncated series over Q[lam + u] <= R^2.

    For integral phases the continuum tail 2 pi^2 D R^(4 - 2s) / (2s - 4) is added
    and its size reported as the tail bound.
    """
    s = params.s
    if s.real <= 2:
        raise DivergentSeriesError(f"the Epstein series diverges at Re s = {s.real}")
    form = params.form
    d_factor = float(np.linalg.det(form)) ** -0.5

    def tail(radius: float) -> complex:
        return 2 * math.pi**2 * d_factor * radius ** (4 - 2 * s) / (2 * s - 4)

    radius = params.truncation_radius
    if radius is None:
        target = params.tolerance * (2 * s.real - 4) / (2 * math.pi**2 * d_factor)
        radius = min(target ** (1 / (4 - 2 * s.real)), 40.0 / math.sqrt(float(np.linalg.eigvalsh(form)[0])))

    reduced, characters = _direct_characters(params)
    lam, values = ellipsoid_points(form, radius * radius, reduced)
    value = complex(np.sum(characters(lam) * values ** (-s)))

    tail_bound = abs(tail(radius))
    if all(v.denominator == 1 for v in params.phase):
        value += tail(radius)
    if tail_tolerance is not None and tail_bound > tail_tolerance:
        raise TailBoundError(f"tail bound {tail_bound:.3g} exceeds {tail_tolerance:.3g} at radius {radius:.4g}")
    logger.debug(f"direct Epstein sum: radius {radius:.4g}, {len(values)} terms, tail {tail_bound:.3g}")
    if completed:
        factor = gamma_factor(s)
        return EpsteinResult(value * factor, tail_bound * abs(factor), len(values))
    return EpsteinResult(value, tail_bound, len(values))


# the smoothed series damps its dual terms like exp(-SMOOTH_DAMPING^2 / 4)
SMOOTH_DAMPING = 9.6
# cut-off centre and end of summation, in units of the cut-off width
SMOOTH_CENTRE = 6.0
SMOOTH_END = 11.0
SMOOTH_POINT_LIMIT = 200_000_000


def dual_gap(params: EpsteinParams) -> float:
    """2 pi min Q^-1[mu - v]^(1/2) over mu in Z^4 with mu != v."""
    inverse = np.linalg.inv(params.form)
    inverse = (inverse + inverse.T) / 2
    center = [float(-v % 1) for v in params.phase]
    # every point with coordinates in [-1, 1] lies below the sum of |entries|
    _, values = ellipsoid_points(inverse, float(np.abs(inverse).sum()), center)
    return 2 * math.pi * math.sqrt(float(values.min()))


def _smoothed_continuum(s: complex, d_factor: float, centre: float, width: float, start: float) -> complex:
    """2 pi^2 D int_start^inf erfc((centre - r) / width) / 2 r^(3 - 2s) dr."""

    def integrand(r: mpmath.mpf) -> mpmath.mpc:
        return mpmath.erfc((centre - r) / width) / 2 * mpmath.power(r, 3 - 2 * s)

    breaks = [start] + [b for b in (centre - 5 * width, centre, centre + 5 * width) if b > start] + [mpmath.inf]
    return complex(2 * mpmath.pi**2 * d_factor * mpmath.quad(integrand, breaks))


def epstein_smoothed(params: EpsteinParams, completed: bool = False) -> EpsteinResult:
    """Series with the smooth cut-off erfc((Q[lam + u]^(1/2) - c) / sigma) / 2.

    sigma = SMOOTH_DAMPING / k for the dual gap k and c = SMOOTH_CENTRE sigma. By
    Poisson summation the cut-away part of the series equals dual terms of size
    about exp(-(k sigma)^2 / 4) plus, for integral phases, its continuum integral,
    which is added back. The sum runs to SMOOTH_END sigma and agrees with the
    continuation to about 1e-10 relative to the continuum scale.
    """
    s = params.s
    if s.real <= 2:
        raise DivergentSeriesError(f"the Epstein series diverges at Re s = {s.real}")
    form = params.form
    d_factor = float(np.linalg.det(form)) ** -0.5
    width = SMOOTH_DAMPING / dual_gap(params)
    centre, radius = SMOOTH_CENTRE * width, SMOOTH_END * width
    estimate = math.pi**2 / 2 * d_factor * radius**4
    if estimate > SMOOTH_POINT_LIMIT:
        raise PreconditionError(f"the smoothed series needs about {estimate:.3g} terms, more than {SMOOTH_POINT_LIMIT}")

    reduced, characters = _direct_characters(params)
    value, terms, nearest = 0j, 0, radius * radius
    for lam, values in iter_ellipsoid_points(form, radius * radius, reduced):
        weights = erfc((np.sqrt(values) - centre) / width) / 2
        value += complex(np.sum(weights * characters(lam) * values ** (-s)))
        terms += len(values)
        nearest = min(nearest, float(values.min()))
    if all(v.denominator == 1 for v in params.phase):
        value += _smoothed_continuum(s, d_factor, centre, width, math.sqrt(nearest) / 2)

    tail_bound = 2 * math.pi**2 * d_factor * centre ** (4 - 2 * s.real) / (2 * s.real - 4) * math.exp(-(SMOOTH_DAMPING**2) / 4)
    logger.debug(f"smoothed Epstein sum: width {width:.4g}, radius {radius:.4g}, {terms} terms")
    if completed:
        factor = gamma_factor(s)
        return EpsteinResult(value * factor, tail_bound * abs(factor), terms)
    return EpsteinResult(value, tail_bound, terms)


def epstein_continued(params: EpsteinParams, t0: float | None = None) -> EpsteinResult:
    """Lambda(s, u, v, Q) by analytic continuation."""
    return completed_epstein_sum(
        params.form, params.batch, params.s, params.tolerance, t0=t0, precision_bits=params.precision_bits
    )


def epstein_functional_check(params: EpsteinParams) -> FunctionalCheck:
    """Lambda(s, u, v, Q) against D e^{-2 pi i u.v} Lambda(2 - s, v, -u, Q^-1)."""
    lhs = epstein_continued(params).value
    d_factor = float(np.linalg.det(params.form)) ** -0.5
    uv = sum((u * v for u, v in zip(params.shift, params.phase, strict=True)), Fraction(0))
    rhs = d_factor * complex(np.exp(-2j * np.pi * float(uv % 1))) * epstein_continued(params.reflected()).value
    return functional_check(lhs, rhs)


RESIDUE_STEPS = (4e-3, 2e-3, 1e-3)


def symmetric_residue(f, eps: Sequence[float] = RESIDUE_STEPS) -> complex:  # noqa: ANN001
    """Limit of f(e) = R + a1 e + a2 e^2 + ... at e = 0.

    f is evaluated at +e and -e for three halving steps. The odd terms cancel in
    (f(e) + f(-e)) / 2 and two Richardson steps in e^2 remove the e^2 and e^4
    terms.
    """
    e1, e2, e3 = eps
    if not (math.isclose(e2, e1 / 2) and math.isclose(e3, e2 / 2)):
        raise PreconditionError("Richardson steps must halve")
    h1, h2, h3 = ((f(e) + f(-e)) / 2 for e in (e1, e2, e3))
    r1 = (4 * h2 - h1) / 3
    r2 = (4 * h3 - h2) / 3
    return (16 * r2 - r1) / 15


def epstein_residue(params: EpsteinParams, eps: Sequence[float] = RESIDUE_STEPS) -> tuple[complex, float]:
    """Numeric residue of Lambda at s = 2 and the expected value D [v in Z^4]."""

    def scaled(e: float) -> complex:
        return e * epstein_continued(params.model_copy(update={"s": 2 + e})).value

    expected = float(np.linalg.det(params.form)) ** -0.5 if all(v.denominator == 1 for v in params.phase) else 0.0
    return symmetric_residue(scaled, eps), expected


def four_squares_oracle(s: complex) -> complex:
    """8 (1 - 4^(1-s)) zeta(s) zeta(s-1), the Epstein zeta function of the sum of four squares."""
    return complex(8 * (1 - mpmath.power(4, 1 - s)) * mpmath.zeta(s) * mpmath.zeta(s - 1))
