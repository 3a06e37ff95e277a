"""Exact arithmetic in Q and in real quadratic fields Q(sqrt(p))."""

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import mpmath

from paramodular_verify.exceptions import RadicandMismatchError


Rational = Fraction

_SCALAR = (int, Fraction)


class QuadOp(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"


def _is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True, slots=True)
class QuadExt:
    """The number a + b*sqrt(radicand).

    Values with b = 0 are stored with radicand 1, so rationals compare and hash
    structurally whatever field they came from.
    """

    a: Fraction
    b: Fraction = Fraction(0)
    radicand: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if not _is_squarefree(self.radicand):
            raise ValueError(f"radicand must be a positive square-free integer, got {self.radicand}")
        if self.radicand == 1 and self.b != 0:
            object.__setattr__(self, "a", self.a + self.b)
            object.__setattr__(self, "b", Fraction(0))
        if self.b == 0:
            object.__setattr__(self, "radicand", 1)

    @classmethod
    def coerce(cls, value: "QuadExt | int | Fraction") -> "QuadExt":
        if isinstance(value, QuadExt):
            return value
        if isinstance(value, _SCALAR):
            return cls(Fraction(value))
        raise TypeError(f"cannot interpret {value!r} as a QuadExt")

    @classmethod
    def sqrt_of(cls, d: int, coefficient: int | Fraction = 1) -> "QuadExt":
        """coefficient * sqrt(d) for a square-free d."""
        return cls(Fraction(0), Fraction(coefficient), d)

    def is_rational(self) -> bool:
        return self.b == 0

    def is_integral(self) -> bool:
        return self.b == 0 and self.a.denominator == 1

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def conjugate(self) -> "QuadExt":
        return QuadExt(self.a, -self.b, self.radicand)

    def norm(self) -> Fraction:
        return self.a * self.a - self.radicand * self.b * self.b

    def _common_radicand(self, other: "QuadExt") -> int:
        if self.radicand == other.radicand or other.radicand == 1:
            return self.radicand
        if self.radicand == 1:
            return other.radicand
        raise RadicandMismatchError(f"cannot combine sqrt({self.radicand}) and sqrt({other.radicand})")

    def __add__(self, other: "QuadExt | int | Fraction") -> "QuadExt":
        if not isinstance(other, (QuadExt, *_SCALAR)):
            return NotImplemented
        other = QuadExt.coerce(other)
        d = self._common_radicand(other)
        return QuadExt(self.a + other.a, self.b + other.b, d)

    __radd__ = __add__

    def __neg__(self) -> "QuadExt":
        return QuadExt(-self.a, -self.b, self.radicand)

    def __sub__(self, other: "QuadExt | int | Fraction") -> "QuadExt":
        if not isinstance(other, (QuadExt, *_SCALAR)):
            return NotImplemented
        return self + (-QuadExt.coerce(other))

    def __rsub__(self, other: "QuadExt | int | Fraction") -> "QuadExt":
        return QuadExt.coerce(other) - self

    def __mul__(self, other: "QuadExt | int | Fraction") -> "QuadExt":
        if not isinstance(other, (QuadExt, *_SCALAR)):
            return NotImplemented
        other = QuadExt.coerce(other)
        d = self._common_radicand(other)
        return QuadExt(
            self.a * other.a + d * self.b * other.b,
            self.a * other.b + self.b * other.a,
            d,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadExt":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(p))")
        c = self.conjugate()
        return QuadExt(c.a / n, c.b / n, self.radicand)

    def __truediv__(self, other: "QuadExt | int | Fraction") -> "QuadExt":
        if not isinstance(other, (QuadExt, *_SCALAR)):
            return NotImplemented
        other = QuadExt.coerce(other)
        self._common_radicand(other)
        return self * other.inverse()

    def __rtruediv__(self, other: "QuadExt | int | Fraction") -> "QuadExt":
        return QuadExt.coerce(other) / self

    def __eq__(self, other: object) -> bool:
        if isinstance(other, _SCALAR):
            return self.b == 0 and self.a == other
        if not isinstance(other, QuadExt):
            return NotImplemented
        return self.radicand == other.radicand and self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.radicand))

    def __float__(self) -> float:
        return float(embed_real(self))

    def __str__(self) -> str:
        return format_quad(self)


def quad_arith(x: QuadExt, y: QuadExt, op: QuadOp | str) -> QuadExt:
    op = QuadOp(op)
    if op is QuadOp.ADD:
        return x + y
    if op is QuadOp.SUB:
        return x - y
    if op is QuadOp.MUL:
        return x * y
    return x / y


def embed_real(x: QuadExt | int | Fraction, precision_bits: int = 53) -> float | mpmath.mpf:
    """Round a + b*sqrt(d) to a binary float.

    At 53 bits the value is a Python float, above that an mpmath.mpf carrying
    the requested number of bits. The intermediate evaluation uses 32 guard bits.
    """
    if precision_bits < 53:
        raise ValueError(f"precision must be at least 53 bits, got {precision_bits}")
    x = QuadExt.coerce(x)
    if x.b == 0 and precision_bits == 53:
        return float(x.a)
    with mpmath.workprec(precision_bits + 32):
        value = mpmath.mpf(x.a.numerator) / x.a.denominator
        if x.b != 0:
            value += mpmath.mpf(x.b.numerator) / x.b.denominator * mpmath.sqrt(x.radicand)
    if precision_bits == 53:
        return float(value)
    with mpmath.workprec(precision_bits):
        return +value


def _format_fraction(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def format_quad(x: QuadExt) -> str:
    """Text form "a/b+c/d*sqrt(p)"."""
    return f"{_format_fraction(x.a)}+{_format_fraction(x.b)}*sqrt({x.radicand})"


_QUAD_RE = re.compile(r"^\s*(-?\d+)/(\d+)\+(-?\d+)/(\d+)\*sqrt\((\d+)\)\s*$")


def parse_quad(text: str) -> QuadExt:
    match = _QUAD_RE.match(text)
    if match is None:
        raise ValueError(f"not a quadratic field element: {text!r}")
    an, ad, bn, bd, d = (int(g) for g in match.groups())
    return QuadExt(Fraction(an, ad), Fraction(bn, bd), d)
