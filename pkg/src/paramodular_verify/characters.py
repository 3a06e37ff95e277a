"""Dirichlet characters with exact rational angles, Gauss sums and the A_{chi,nu} character sums."""

import cmath
import itertools
import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import mpmath
import numpy as np

from paramodular_verify.exceptions import PreconditionError


logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# elementary arithmetic
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation of n >= 1 as ((prime, exponent), ...) in increasing order."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            factors.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        factors.append((n, 1))
    return tuple(factors)


def is_prime(n: int) -> bool:
    return n > 1 and factorize(n) == ((n, 1),)


def prime_divisors(n: int) -> list[int]:
    return [q for q, _ in factorize(n)]


def euler_phi(n: int) -> int:
    result = n
    for q, _ in factorize(n):
        result = result // q * (q - 1)
    return result


def mobius(n: int) -> int:
    factors = factorize(n)
    if any(e > 1 for _, e in factors):
        return 0
    return -1 if len(factors) % 2 else 1


def radical(n: int) -> int:
    return math.prod(prime_divisors(n))


def divisors(n: int) -> list[int]:
    result = [1]
    for q, e in factorize(n):
        result = [d * q**k for d in result for k in range(e + 1)]
    return sorted(result)


def crt_lift(residue: int, modulus: int, total: int) -> int:
    """The x mod total with x = residue (mod modulus) and x = 1 modulo the cofactor."""
    cofactor = total // modulus
    if cofactor == 1:
        return residue % total
    return (residue * cofactor * pow(cofactor, -1, modulus) + modulus * pow(modulus, -1, cofactor)) % total


# ---------------------------------------------------------------------------
# unit groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnitGroup:
    modulus: int
    generators: tuple[int, ...]
    orders: tuple[int, ...]
    logs: dict[int, tuple[int, ...]]


def _local_generators(prime: int, exponent: int) -> list[tuple[int, int]]:
    q = prime**exponent
    if prime == 2:
        if exponent == 1:
            return []
        if exponent == 2:
            return [(3, 2)]
        return [(q - 1, 2), (5, 2 ** (exponent - 2))]
    order = euler_phi(q)
    order_factors = prime_divisors(order)
    for g in range(2, q):
        if math.gcd(g, prime) == 1 and all(pow(g, order // f, q) != 1 for f in order_factors):
            return [(g, order)]
    raise AssertionError(f"no primitive root modulo {q}")


@lru_cache(maxsize=256)
def unit_group(modulus: int) -> UnitGroup:
    """Generators of (Z/N)^x ordered by prime, with a discrete logarithm table."""
    generators: list[int] = []
    orders: list[int] = []
    local_tables: list[tuple[int, dict[int, tuple[int, ...]]]] = []
    for prime, exponent in factorize(modulus) if modulus > 1 else ():
        q = prime**exponent
        local = _local_generators(prime, exponent)
        table: dict[int, tuple[int, ...]] = {}
        for ks in itertools.product(*(range(o) for _, o in local)):
            residue = 1
            for (g, _), k in zip(local, ks, strict=True):
                residue = residue * pow(g, k, q) % q
            table[residue] = ks
        local_tables.append((q, table))
        for g, o in local:
            generators.append(crt_lift(g, q, modulus))
            orders.append(o)

    logs: dict[int, tuple[int, ...]] = {}
    for n in range(modulus):
        if math.gcd(n, modulus) != 1:
            continue
        logs[n] = tuple(k for q, table in local_tables for k in table[n % q])
    return UnitGroup(modulus, tuple(generators), tuple(orders), logs)


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DirichletCharacter:
    """A character mod N given by its exponent vector on the generators of unit_group(N).

    Values are exact angles q in Q/Z (chi(n) = exp(2 pi i q)); non-units map to 0.
    """

    modulus: int
    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise PreconditionError(f"modulus must be positive, got {self.modulus}")
        orders = unit_group(self.modulus).orders
        if len(self.exponents) != len(orders):
            raise PreconditionError(f"character mod {self.modulus} needs {len(orders)} exponents")
        object.__setattr__(self, "exponents", tuple(k % o for k, o in zip(self.exponents, orders, strict=True)))

    @classmethod
    def principal(cls, modulus: int) -> "DirichletCharacter":
        return cls(modulus, (0,) * len(unit_group(modulus).orders))

    @classmethod
    def from_angle_function(cls, modulus: int, angle: Callable[[int], Fraction]) -> "DirichletCharacter":
        group = unit_group(modulus)
        exponents = []
        for g, o in zip(group.generators, group.orders, strict=True):
            k = Fraction(angle(g)) * o
            if k.denominator != 1:
                raise PreconditionError(f"angle {angle(g)} at generator {g} is not of order dividing {o}")
            exponents.append(int(k))
        return cls(modulus, tuple(exponents))

    @property
    def orders(self) -> tuple[int, ...]:
        return unit_group(self.modulus).orders

    @property
    def index(self) -> int:
        """Position in enumerate_characters(modulus)."""
        idx = 0
        for k, o in zip(self.exponents, self.orders, strict=True):
            idx = idx * o + k
        return idx

    def angle(self, n: int) -> Fraction | None:
        logs = unit_group(self.modulus).logs.get(n % self.modulus)
        if logs is None:
            return None
        total = sum(
            (Fraction(k * lg, o) for k, lg, o in zip(self.exponents, logs, self.orders, strict=True)),
            Fraction(0),
        )
        return total - math.floor(total)

    def __call__(self, n: int) -> complex:
        return complex(self.value_table[n % self.modulus])

    @cached_property
    def angle_table(self) -> tuple[Fraction | None, ...]:
        return tuple(self.angle(n) for n in range(self.modulus))

    @cached_property
    def value_table(self) -> np.ndarray:
        """chi(0), ..., chi(N-1) as complex numbers."""
        table = np.zeros(self.modulus, dtype=complex)
        for n, a in enumerate(self.angle_table):
            if a is not None:
                table[n] = _root_of_unity(a)
        return table

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple(-k for k in self.exponents))

    def __pow__(self, e: int) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple(k * e for k in self.exponents))

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        """Pointwise product; characters of different moduli are lifted to the lcm."""
        if not isinstance(other, DirichletCharacter):
            return NotImplemented
        if other.modulus == self.modulus:
            return DirichletCharacter(self.modulus, tuple(a + b for a, b in zip(self.exponents, other.exponents, strict=True)))
        modulus = math.lcm(self.modulus, other.modulus)
        return DirichletCharacter.from_angle_function(
            modulus, lambda n: self.angle(n) + other.angle(n)  # type: ignore[operator]
        )

    def induce(self, modulus: int) -> "DirichletCharacter":
        if modulus % self.modulus:
            raise PreconditionError(f"cannot induce a character mod {self.modulus} to modulus {modulus}")
        return DirichletCharacter.from_angle_function(modulus, lambda n: self.angle(n))  # type: ignore[arg-type,return-value]

    def is_principal(self) -> bool:
        return all(k == 0 for k in self.exponents)

    def is_even(self) -> bool:
        return self.angle(-1) == 0

    @cached_property
    def conductor(self) -> int:
        logs = unit_group(self.modulus).logs
        for d in divisors(self.modulus):
            if all(self.angle(n) == 0 for n in logs if n % d == 1 % d):
                return d
        return self.modulus

    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def primitive_core(self) -> "DirichletCharacter":
        conductor = self.conductor

        def lifted_angle(n: int) -> Fraction:
            for k in range(self.modulus // conductor):
                m = n + k * conductor
                if math.gcd(m, self.modulus) == 1:
                    return self.angle(m)  # type: ignore[return-value]
            raise AssertionError("unit without a lift")

        return DirichletCharacter.from_angle_function(conductor, lifted_angle)

    def __str__(self) -> str:
        return f"chi_{self.modulus}[{self.index}]"


def _root_of_unity(angle: Fraction) -> complex:
    if angle == 0:
        return 1.0 + 0.0j
    if angle == Fraction(1, 2):
        return -1.0 + 0.0j
    if angle == Fraction(1, 4):
        return 1.0j
    if angle == Fraction(3, 4):
        return -1.0j
    return cmath.exp(2j * math.pi * float(angle))


def enumerate_characters(modulus: int) -> list[DirichletCharacter]:
    """All characters mod N in canonical order (exponent vectors, lexicographic)."""
    orders = unit_group(modulus).orders
    return [DirichletCharacter(modulus, ks) for ks in itertools.product(*(range(o) for o in orders))]


def character(modulus: int, index: int) -> DirichletCharacter:
    characters = enumerate_characters(modulus)
    if not 0 <= index < len(characters):
        raise PreconditionError(f"character index {index} out of range for modulus {modulus}")
    return characters[index]


def iter_primitive_characters(max_modulus: int) -> Iterator[DirichletCharacter]:
    for modulus in range(1, max_modulus + 1):
        for chi in enumerate_characters(modulus):
            if chi.is_primitive():
                yield chi


@dataclass(frozen=True)
class CharacterDecomposition:
    conductor: int
    primitive_core: DirichletCharacter
    R: int
    LR: int
    nu: int


def decompose(chi: DirichletCharacter) -> CharacterDecomposition:
    """Conductor L, primitive core chi_L, R = product of primes of N missing from L, LR and N/(LR)."""
    conductor = chi.conductor
    r = math.prod(q for q in prime_divisors(chi.modulus) if conductor % q)
    return CharacterDecomposition(
        conductor=conductor,
        primitive_core=chi.primitive_core(),
        R=r,
        LR=conductor * r,
        nu=chi.modulus // (conductor * r),
    )


def gauss_sum(chi: DirichletCharacter, precision_bits: int = 53) -> complex | mpmath.mpc:
    """G_chi = sum over gamma mod N of chi(gamma) exp(2 pi i gamma / N)."""
    angles = [a + Fraction(g, chi.modulus) for g, a in enumerate(chi.angle_table) if a is not None]
    if precision_bits > 53:
        with mpmath.workprec(precision_bits):
            return mpmath.fsum(mpmath.expjpi(2 * mpmath.mpf(a.numerator) / a.denominator) for a in angles)
    return complex(np.sum(np.exp(2j * np.pi * np.array([float(a % 1) for a in angles]))))


def twist_kernel(chi: DirichletCharacter, m: int) -> complex:
    """sum over mu mod N of conj(chi)(mu) exp(2 pi i m mu / N)."""
    n = chi.modulus
    mu = np.arange(n)
    return complex(np.sum(np.conj(chi.value_table) * np.exp(2j * np.pi * m * mu / n)))


def two_variable_kernel(chi: DirichletCharacter, m: int) -> complex:
    """(1/N) sum over nu, mu mod N of chi(nu) exp(-2 pi i nu mu / N) exp(2 pi i m mu / N)."""
    n = chi.modulus
    nu, mu = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    phases = np.exp(2j * np.pi * (m - nu) * mu / n)
    return complex(np.sum(chi.value_table[nu] * phases) / n)


@lru_cache(maxsize=1024)
def achisum_table(chi: DirichletCharacter, nu: int) -> np.ndarray:
    """A_{chi,nu}(m) for m = 0, ..., N nu - 1 by the defining double sum.

    The sum over unit pairs (beta, gamma) with beta = gamma (nu) is collected by
    the residue of gamma* - beta* mod N nu; an inverse FFT then produces every m.
    """
    n = chi.modulus
    if n % nu:
        raise PreconditionError(f"nu = {nu} does not divide N = {n}")
    big = n * nu
    units = np.array([b for b in range(big) if math.gcd(b, big) == 1], dtype=np.int64)
    inverses = np.array([pow(int(b), -1, big) for b in units], dtype=np.int64)
    beta, gamma = np.meshgrid(np.arange(len(units)), np.arange(len(units)), indexing="ij")
    diff = units[beta] - units[gamma]
    mask = diff % nu == 0
    values = chi.value_table[(diff[mask] // nu) % n]
    keys = (inverses[gamma[mask]] - inverses[beta[mask]]) % big
    coefficients = np.zeros(big, dtype=complex)
    np.add.at(coefficients, keys, values)
    return big * np.fft.ifft(coefficients)


def achisum_bruteforce(chi: DirichletCharacter, nu: int, m: int) -> complex:
    return complex(achisum_table(chi, nu)[m % (chi.modulus * nu)])


def achisum_closed(chi: DirichletCharacter, nu: int, m: int) -> complex:
    """Closed form of A_{chi,nu}(m) through the decomposition of chi^2."""
    n = chi.modulus
    if n % nu:
        raise PreconditionError(f"nu = {nu} does not divide N = {n}")
    square = decompose(chi * chi)
    lr = square.LR
    if nu % (n // lr):
        return 0j
    r = n // math.gcd(n, square.conductor * nu)
    if square.R % r:
        return 0j
    core = square.primitive_core
    value = (
        nu
        / lr
        * chi(-m)
        * core(square.R)
        * core.conj()(lr * nu // n)
        * mobius(r)
        * euler_phi(square.R // r)
        * complex(gauss_sum(chi.conj())) ** 3
        * complex(gauss_sum(core))
    )
    return complex(value)


def dirichlet_l(chi: DirichletCharacter, w: complex, precision_bits: int = 53) -> complex:
    """L(w, chi) = N^{-w} sum_a chi(a) zeta(w, a/N) via the Hurwitz zeta function."""
    n = chi.modulus
    with mpmath.workprec(max(precision_bits, 53) + 10):
        w_mp = mpmath.mpc(w)
        total = mpmath.fsum(
            mpmath.mpc(chi(a)) * mpmath.zeta(w_mp, mpmath.mpf(a) / n) for a in range(1, n + 1) if chi(a) != 0
        )
        return complex(total * mpmath.power(n, -w_mp))
