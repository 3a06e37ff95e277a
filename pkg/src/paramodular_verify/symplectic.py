"""4x4 matrices over Q(sqrt(p)) and the paramodular groups, generators and characters built on them.

Every matrix lives in the J_1 model (J = [[0, I], [-I, 0]]). A paramodular
matrix of polarisation t is one whose integral model S M S^-1, S = diag(1, t, 1, 1),
is integral; that model then satisfies the J_t relation.
"""

import logging
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from paramodular_verify.characters import DirichletCharacter, is_prime
from paramodular_verify.exceptions import MembershipError, PreconditionError
from paramodular_verify.qfield import QuadExt, embed_real, format_quad, parse_quad


logger = logging.getLogger(__name__)

Scalar = QuadExt | int | Fraction


def bezout(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        return -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def inverse_mod(a: int, modulus: int) -> int:
    """a^-1 mod modulus, with the convention 0 for modulus 1."""
    if modulus == 1:
        return 0
    if math.gcd(a, modulus) != 1:
        raise PreconditionError(f"{a} is not invertible mod {modulus}")
    return pow(a, -1, modulus)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpMatrix:
    entries: tuple[tuple[QuadExt, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(QuadExt.coerce(x) for x in row) for row in self.entries)
        if len(rows) != 4 or any(len(row) != 4 for row in rows):
            raise ValueError("SpMatrix must be 4x4")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Scalar]]) -> "SpMatrix":
        return cls(tuple(tuple(QuadExt.coerce(x) for x in row) for row in rows))

    @classmethod
    def identity(cls) -> "SpMatrix":
        return cls.from_rows([[int(i == j) for j in range(4)] for i in range(4)])

    @classmethod
    def from_blocks(
        cls,
        a: Sequence[Sequence[Scalar]],
        b: Sequence[Sequence[Scalar]],
        c: Sequence[Sequence[Scalar]],
        d: Sequence[Sequence[Scalar]],
    ) -> "SpMatrix":
        return cls.from_rows([[*a[i], *b[i]] for i in range(2)] + [[*c[i], *d[i]] for i in range(2)])

    def __getitem__(self, index: tuple[int, int]) -> QuadExt:
        i, j = index
        return self.entries[i][j]

    def row(self, i: int) -> tuple[QuadExt, ...]:
        return self.entries[i]

    def __matmul__(self, other: "SpMatrix") -> "SpMatrix":
        if not isinstance(other, SpMatrix):
            return NotImplemented
        cols = list(zip(*other.entries, strict=True))
        return SpMatrix(
            tuple(
                tuple(_dot(row, col) for col in cols)
                for row in self.entries
            )
        )

    def scale(self, factor: Scalar) -> "SpMatrix":
        return SpMatrix(tuple(tuple(x * factor for x in row) for row in self.entries))

    def __neg__(self) -> "SpMatrix":
        return self.scale(-1)

    def transpose(self) -> "SpMatrix":
        return SpMatrix(tuple(zip(*self.entries, strict=True)))

    def inverse(self) -> "SpMatrix":
        """Exact Gauss-Jordan inverse."""
        work = [list(row) + [QuadExt(int(i == j)) for j in range(4)] for i, row in enumerate(self.entries)]
        for col in range(4):
            pivot = next((r for r in range(col, 4) if not work[r][col].is_zero()), None)
            if pivot is None:
                raise ZeroDivisionError("singular matrix")
            work[col], work[pivot] = work[pivot], work[col]
            inv = work[col][col].inverse()
            work[col] = [x * inv for x in work[col]]
            for r in range(4):
                if r != col and not work[r][col].is_zero():
                    factor = work[r][col]
                    work[r] = [x - factor * y for x, y in zip(work[r], work[col], strict=True)]
        return SpMatrix(tuple(tuple(row[4:]) for row in work))

    def symplectic_inverse(self) -> "SpMatrix":
        """-J M^tr J, the inverse of a J_1-symplectic matrix."""
        return -(J1 @ self.transpose() @ J1)

    def is_integral(self) -> bool:
        return all(x.is_integral() for row in self.entries for x in row)

    def determinant(self) -> QuadExt:
        a = [list(row) for row in self.entries]
        det = QuadExt(1)
        for col in range(4):
            pivot = next((r for r in range(col, 4) if not a[r][col].is_zero()), None)
            if pivot is None:
                return QuadExt(0)
            if pivot != col:
                a[col], a[pivot] = a[pivot], a[col]
                det = -det
            det = det * a[col][col]
            inv = a[col][col].inverse()
            for r in range(col + 1, 4):
                factor = a[r][col] * inv
                a[r] = [x - factor * y for x, y in zip(a[r], a[col], strict=True)]
        return det

    def to_float(self, precision_bits: int = 53) -> np.ndarray:
        return np.array([[float(embed_real(x, precision_bits)) for x in row] for row in self.entries])

    def serialize(self) -> str:
        return " ".join(format_quad(x) for row in self.entries for x in row)

    @classmethod
    def parse(cls, text: str) -> "SpMatrix":
        tokens = text.split()
        if len(tokens) != 16:
            raise ValueError(f"expected 16 matrix entries, got {len(tokens)}")
        values = [parse_quad(tok) for tok in tokens]
        return cls(tuple(tuple(values[4 * i : 4 * i + 4]) for i in range(4)))

    def __str__(self) -> str:
        return "\n".join(" ".join(str(x) for x in row) for row in self.entries)


def _dot(row: Iterable[QuadExt], col: Iterable[QuadExt]) -> QuadExt:
    total = QuadExt(0)
    for x, y in zip(row, col, strict=True):
        if not (x.is_zero() or y.is_zero()):
            total = total + x * y
    return total


J1 = SpMatrix.from_blocks([[0, 0], [0, 0]], [[1, 0], [0, 1]], [[-1, 0], [0, -1]], [[0, 0], [0, 0]])


def jt_matrix(t: int) -> SpMatrix:
    return SpMatrix.from_rows([[0, 0, 1, 0], [0, 0, 0, t], [-1, 0, 0, 0], [0, -t, 0, 0]])


def to_integral_model(m: SpMatrix, t: int) -> SpMatrix:
    """S M S^-1 with S = diag(1, t, 1, 1)."""
    s = (1, t, 1, 1)
    return SpMatrix(tuple(tuple(m[i, j] * Fraction(s[i], s[j]) for j in range(4)) for i in range(4)))


# ---------------------------------------------------------------------------
# group context and membership
# ---------------------------------------------------------------------------


class GroupContext(BaseModel):
    """Prime p, level N coprime to p, kappa | N, polarisation t and the optional coset divisors nu, theta."""

    model_config = ConfigDict(frozen=True)

    p: int
    N: int
    kappa: int = 1
    t: int | None = None
    nu: int | None = None
    theta: int | None = None

    @model_validator(mode="after")
    def check_divisibility(self) -> "GroupContext":
        if not is_prime(self.p):
            raise PreconditionError(f"p = {self.p} is not prime")
        if self.N < 1 or math.gcd(self.p, self.N) != 1:
            raise PreconditionError(f"level N = {self.N} must be positive and coprime to p = {self.p}")
        if self.kappa < 1 or self.N % self.kappa:
            raise PreconditionError(f"kappa = {self.kappa} does not divide N = {self.N}")
        for name in ("nu", "theta"):
            value = getattr(self, name)
            if value is not None and (value < 1 or self.N % value):
                raise PreconditionError(f"{name} = {value} does not divide N = {self.N}")
        if self.nu is not None and self.theta is not None and self.nu * self.theta != self.N:
            raise PreconditionError(f"nu * theta = {self.nu * self.theta} differs from N = {self.N}")
        return self

    @property
    def polarisation(self) -> int:
        return self.p if self.t is None else self.t

    @property
    def p_star(self) -> int:
        return inverse_mod(self.p, self.N)

    def with_level(self, N: int, kappa: int = 1) -> "GroupContext":  # noqa: N803
        return GroupContext(p=self.p, N=N, kappa=kappa, t=self.t)


class GroupKind(str, Enum):
    SP_T = "Sp_t"
    PARAMODULAR_T = "Paramodular_t"
    GAMMA21 = "Gamma21"
    GAMMA21_LEVEL = "Gamma21_level"
    GAMMA21_LEVEL_1 = "Gamma21_level_1"
    GAMMA_STAR = "GammaStar"


def is_j_symplectic(m: SpMatrix) -> bool:
    return m @ J1 @ m.transpose() == J1


def satisfies_jt(m: SpMatrix, t: int) -> bool:
    """The J_t relation on the integral model of m."""
    model = to_integral_model(m, t)
    jt = jt_matrix(t)
    return model @ jt @ model.transpose() == jt


def _divisible(x: QuadExt, modulus: int | Fraction) -> bool:
    if not x.is_rational():
        return False
    q = x.a / modulus
    return q.denominator == 1


def _in_level(m: SpMatrix, ctx: GroupContext) -> bool:
    p, n, kappa = ctx.p, ctx.N, ctx.kappa
    if not similitude_member(m, GroupKind.PARAMODULAR_T, ctx):
        return False
    return (
        _divisible(m[3, 0], n * p)
        and _divisible(m[3, 1], Fraction(p * n * n, kappa))
        and _divisible(m[3, 2], n * p)
    )


def similitude_member(m: SpMatrix, group: GroupKind | str, ctx: GroupContext) -> bool:
    group = GroupKind(group)
    t = ctx.polarisation
    if group is GroupKind.SP_T:
        return satisfies_jt(m, t)
    if group is GroupKind.PARAMODULAR_T:
        return to_integral_model(m, t).is_integral() and satisfies_jt(m, t)
    if group is GroupKind.GAMMA21:
        return similitude_member(m, GroupKind.PARAMODULAR_T, ctx) and m.row(3) == (0, 0, 0, 1)
    if group is GroupKind.GAMMA21_LEVEL:
        return _in_level(m, ctx)
    if group is GroupKind.GAMMA21_LEVEL_1:
        if not _in_level(m, ctx):
            return False
        delta = int(m[3, 3].a)
        return delta % ctx.N in {1 % ctx.N, (-1) % ctx.N}
    return _in_level(m, ctx) or _in_level(m @ make_Hp(ctx.p, ctx.N).symplectic_inverse(), ctx)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


class GeneratorKind(str, Enum):
    M_ETA = "M_eta"
    W_ETA = "W_eta"
    D_ETA = "D_eta"
    P_DT = "P_dt"
    M_LAMBDA = "M_lambda"
    M_DGAMMA = "M_dgamma"
    J = "J"


def canonical_bezout(d: int, t: int) -> tuple[int, int]:
    """The pair (x, y) with x d - y t/d = 1 and 0 <= x < t/d."""
    cofactor = t // d
    if cofactor == 1:
        return 0, -1
    x = pow(d, -1, cofactor)
    return x, (x * d - 1) // cofactor


def sl2_completion(lam: tuple[int, int]) -> tuple[int, int]:
    """(a, b) with a*lam2 - b*lam1 = 1 from the extended Euclidean algorithm."""
    lam1, lam2 = lam
    g, x, y = bezout(lam2, lam1)
    if g != 1:
        raise PreconditionError(f"lambda = {lam} is not primitive")
    return x, -y


def _m_eta(eta: Scalar) -> SpMatrix:
    return SpMatrix.from_blocks([[1, 0], [0, 1]], [[0, 0], [0, eta]], [[0, 0], [0, 0]], [[1, 0], [0, 1]])


def _w_eta(eta: Scalar) -> SpMatrix:
    eta = QuadExt.coerce(eta)
    return SpMatrix.from_rows([[0, 0, 1, 0], [0, 0, 0, eta.inverse()], [-1, 0, 0, 0], [0, -eta, 0, 0]])


def _d_eta(eta: Scalar) -> SpMatrix:
    eta = QuadExt.coerce(eta)
    return SpMatrix.from_rows([[1, 0, 0, 0], [0, eta, 0, 0], [0, 0, 1, 0], [0, 0, 0, eta.inverse()]])


def _p_dt(d: int, t: int, x: int | None = None, y: int | None = None) -> SpMatrix:
    if d < 1 or t % d or math.gcd(d, t // d) != 1:
        raise PreconditionError(f"P_dt needs d | t with gcd(d, t/d) = 1, got d = {d}, t = {t}")
    if x is None or y is None:
        x, y = canonical_bezout(d, t)
    if x * d - y * (t // d) != 1:
        raise PreconditionError(f"(x, y) = ({x}, {y}) violates x d - y t/d = 1")
    root = QuadExt.sqrt_of(d) if d > 1 else QuadExt(1)

    def over_root(c: int) -> QuadExt:
        return root * Fraction(c, d)

    return SpMatrix.from_rows(
        [
            [root * x, -over_root(t), 0, 0],
            [-over_root(y), root, 0, 0],
            [0, 0, root, over_root(y)],
            [0, 0, over_root(t), root * x],
        ]
    )


def _m_lambda(lam: tuple[int, int]) -> SpMatrix:
    a, b = sl2_completion(lam)
    return embed_sl2(((a, b), lam), (0, 2))


def _m_dgamma(N: int, d: int, p: int, gamma: int, theta: int, nu: int | None = None) -> SpMatrix:  # noqa: N803
    if N % theta:
        raise PreconditionError(f"theta = {theta} does not divide N = {N}")
    if nu is not None and nu % d:
        raise PreconditionError(f"d = {d} does not divide nu = {nu}")
    return SpMatrix.from_rows(
        [
            [1, -N * d * p, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 1, 0],
            [0, Fraction(N * N * p * gamma, theta), N * d * p, 1],
        ]
    )


def embed_sl2(block: Sequence[Sequence[Scalar]], positions: tuple[int, int]) -> SpMatrix:
    """Identity with a 2x2 block placed on rows/columns (i, j)."""
    i, j = positions
    rows: list[list[Scalar]] = [[int(r == c) for c in range(4)] for r in range(4)]
    rows[i][i], rows[i][j] = block[0][0], block[0][1]
    rows[j][i], rows[j][j] = block[1][0], block[1][1]
    return SpMatrix.from_rows(rows)


def block_diagonal(u: Sequence[Sequence[Scalar]]) -> SpMatrix:
    """diag(U^-tr, U) for a 2x2 U of determinant one."""
    (a, b), (c, d) = ((QuadExt.coerce(x) for x in row) for row in u)
    det = a * d - b * c
    if det != 1:
        raise PreconditionError(f"det U = {det} is not 1")
    return SpMatrix.from_blocks([[d, -c], [-b, a]], [[0, 0], [0, 0]], [[0, 0], [0, 0]], [[a, b], [c, d]])


def translation(b: Sequence[Sequence[Scalar]]) -> SpMatrix:
    return SpMatrix.from_blocks([[1, 0], [0, 1]], b, [[0, 0], [0, 0]], [[1, 0], [0, 1]])


def lower_translation(c: Sequence[Sequence[Scalar]]) -> SpMatrix:
    return SpMatrix.from_blocks([[1, 0], [0, 1]], [[0, 0], [0, 0]], c, [[1, 0], [0, 1]])


def make_generator(kind: GeneratorKind | str, **params) -> SpMatrix:
    kind = GeneratorKind(kind)
    if kind is GeneratorKind.M_ETA:
        return _m_eta(params["eta"])
    if kind is GeneratorKind.W_ETA:
        return _w_eta(params["eta"])
    if kind is GeneratorKind.D_ETA:
        return _d_eta(params["eta"])
    if kind is GeneratorKind.P_DT:
        return _p_dt(params["d"], params["t"], params.get("x"), params.get("y"))
    if kind is GeneratorKind.M_LAMBDA:
        return _m_lambda(tuple(params["lam"]))  # type: ignore[arg-type]
    if kind is GeneratorKind.M_DGAMMA:
        return _m_dgamma(params["N"], params["d"], params["p"], params["gamma"], params["theta"], params.get("nu"))
    return _w_eta(1)


def make_Hp(p: int, N: int) -> SpMatrix:  # noqa: N802, N803
    """The extension element diag(U^-tr, U) P_{p,p} of the level group."""
    p_star = inverse_mod(p, N)
    u = [[1 + p_star * p, -1], [-p_star * p, 1]]
    h = block_diagonal(u) @ _p_dt(p, p, 1, p - 1)
    corner = h[3, 2] * QuadExt.sqrt_of(p)
    if not _divisible(corner, N):
        raise AssertionError(f"N = {N} does not divide sqrt(p) * H[4, 3] = {corner}")
    return h


# ---------------------------------------------------------------------------
# last-row classification
# ---------------------------------------------------------------------------


class RowVariant(str, Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    T4 = "T4"


class RowType(NamedTuple):
    variant: RowVariant
    lam: tuple[int, int, int, int]
    unit_index: int
    """1-based index of the lambda entry coprime to p."""


def _as_integers(values: Sequence[Fraction], divisors: Sequence[int | Fraction]) -> tuple[int, ...] | None:
    out = []
    for value, divisor in zip(values, divisors, strict=True):
        q = Fraction(value) / divisor
        if q.denominator != 1:
            return None
        out.append(int(q))
    return tuple(out)


def classify_row(row: Sequence[QuadExt], ctx: GroupContext) -> RowType:
    p, n = ctx.p, ctx.N
    middle = Fraction(p * n * n, ctx.kappa)
    row = [QuadExt.coerce(x) for x in row]
    if all(x.is_rational() for x in row):
        values = [x.a for x in row]
        if _divisible(row[3], p):
            variant, unit_index = RowVariant.T2, 2
            lam = _as_integers(values, (p * n, middle, p * n, p))
        else:
            variant, unit_index = RowVariant.T1, 4
            lam = _as_integers(values, (p * n, middle, p * n, 1))
    elif all(x.a == 0 and x.radicand == p for x in row if not x.is_zero()):
        values = [x.b for x in row]
        first = Fraction(values[0]) / n
        if first.denominator == 1 and int(first) % p:
            variant, unit_index = RowVariant.T3, 1
            lam = _as_integers(values, (n, middle, n, 1))
        else:
            variant, unit_index = RowVariant.T4, 3
            lam = _as_integers(values, (p * n, middle, n, 1))
    else:
        raise MembershipError(f"row {[str(x) for x in row]} mixes rational and sqrt({p}) entries")

    if lam is None:
        raise MembershipError(f"row {[str(x) for x in row]} fits no last-row pattern")
    if math.gcd(*lam) != 1 or math.gcd(lam[3], n) != 1 or lam[unit_index - 1] % p == 0:
        raise MembershipError(f"row {[str(x) for x in row]} gives lambda = {lam} violating the {variant.value} conditions")
    return RowType(variant, lam, unit_index)  # type: ignore[arg-type]


def classify_last_row(m: SpMatrix, ctx: GroupContext) -> RowType:
    return classify_row(m.row(3), ctx)


# ---------------------------------------------------------------------------
# coset representatives
# ---------------------------------------------------------------------------


def coset_count(nu: int, theta: int) -> int:
    """Sum over d | nu of theta nu^2 (nu/d)^2."""
    return sum(theta * nu * nu * (nu // d) ** 2 for d in range(1, nu + 1) if nu % d == 0)


def coset_reps(ctx: GroupContext, nu: int, theta: int) -> list[SpMatrix]:
    """M_{d,gamma} M_lambda for d | nu, gamma mod theta nu^2 and primitive lambda in {1..nu/d}^2."""
    if ctx.N % nu or ctx.N % theta:
        raise PreconditionError(f"nu = {nu} and theta = {theta} must divide N = {ctx.N}")
    reps = []
    skipped = 0
    for d in (d for d in range(1, nu + 1) if nu % d == 0):
        lambdas = [(a, b) for a in range(1, nu // d + 1) for b in range(1, nu // d + 1)]
        for lam in lambdas:
            if math.gcd(*lam) != 1:
                skipped += theta * nu * nu
                continue
            m_lam = _m_lambda(lam)
            reps.extend(_m_dgamma(ctx.N, d, ctx.p, gamma, theta, nu) @ m_lam for gamma in range(theta * nu * nu))
    if skipped:
        logger.warning(
            f"skipped {skipped} representatives with non-primitive lambda; built {len(reps)} of {coset_count(nu, theta)}"
        )
    return reps


def level_subgroup(ctx: GroupContext, nu: int) -> Callable[[SpMatrix], bool]:
    """Membership in the finer level group of level N nu."""
    finer = ctx.with_level(ctx.N * nu)
    return lambda m: similitude_member(m, GroupKind.GAMMA21_LEVEL, finer)


def coset_equivalent(m1: SpMatrix, m2: SpMatrix, subgroup: Callable[[SpMatrix], bool]) -> bool:
    return subgroup(m1 @ m2.inverse())


# ---------------------------------------------------------------------------
# extended character
# ---------------------------------------------------------------------------


class SignChoice(str, Enum):
    PLUS = "plus"
    K_MINUS = "k_minus"


def extended_char_angle(
    m: SpMatrix,
    chi: DirichletCharacter,
    sign_choice: SignChoice | str,
    ctx: GroupContext,
    k: int = 0,
) -> Fraction:
    """Exact angle in Q/Z of the extended character at m."""
    sign_choice = SignChoice(sign_choice)
    if chi.modulus != ctx.N:
        raise PreconditionError(f"character modulus {chi.modulus} differs from N = {ctx.N}")
    if (ctx.p - 1) % ctx.N:
        raise PreconditionError(f"the extended character needs p = 1 mod N, got p = {ctx.p}, N = {ctx.N}")
    extra = Fraction(0)
    base = m
    if not _in_level(m, ctx):
        base = m @ make_Hp(ctx.p, ctx.N).symplectic_inverse()
        if not _in_level(base, ctx):
            raise MembershipError("matrix lies outside the extended level group")
        if sign_choice is SignChoice.K_MINUS:
            extra = Fraction(k, 2)
    angle = chi.angle(int(base[3, 3].a))
    if angle is None:
        raise MembershipError(f"delta = {base[3, 3]} is not a unit mod {ctx.N}")
    total = angle + extra
    return total - math.floor(total)


def extended_char_eval(
    m: SpMatrix,
    chi: DirichletCharacter,
    sign_choice: SignChoice | str,
    ctx: GroupContext,
    k: int = 0,
) -> complex:
    angle = extended_char_angle(m, chi, sign_choice, ctx, k)
    return complex(np.exp(2j * np.pi * float(angle)))


# ---------------------------------------------------------------------------
# Fourier-Jacobi conjugators
# ---------------------------------------------------------------------------


class FJConjugators(NamedTuple):
    h1: SpMatrix
    h2: SpMatrix
    h3: SpMatrix
    h4: SpMatrix | None
    r: int


def build_fj_conjugators(
    ctx: GroupContext,
    *,
    C: int,  # noqa: N803
    gamma: int,
    gamma_star: int,
    mu: int,
    mu_star: int,
    d: int,
    eps_gamma: int,
    p_star: int | None = None,
) -> FJConjugators:
    """The conjugating matrices H1..H4 of a Fourier-Jacobi coefficient computation.

    ctx.nu must be set. H4 exists only for mu = 1 and C nu | N.
    """
    if ctx.nu is None:
        raise PreconditionError("build_fj_conjugators needs ctx.nu")
    p, n, nu = ctx.p, ctx.N, ctx.nu
    if p_star is None:
        p_star = inverse_mod(p, n * nu)
    if (n * nu) % C:
        raise PreconditionError(f"C = {C} does not divide N nu = {n * nu}")
    modulus = n * nu // C
    checks = {
        "gamma gamma* = 1 mod N nu / C": (gamma * gamma_star - 1) % modulus == 0,
        "p p* = 1 mod N nu / C": (p * p_star - 1) % modulus == 0,
        "C | N d mu": (n * d * mu) % C == 0,
        "mu mu* = 1 mod N d mu p / C": (n * d * mu * p) % C == 0 and (mu * mu_star - 1) % (n * d * mu * p // C) == 0,
        "nu | eps_gamma - gamma*": (eps_gamma - gamma_star) % nu == 0,
    }
    failed = [name for name, ok in checks.items() if not ok]
    if failed:
        raise PreconditionError(f"Fourier-Jacobi congruences violated: {', '.join(failed)}")
    r = (eps_gamma - gamma_star) // nu

    h1 = embed_sl2(
        (
            (Fraction((1 - p * gamma * p_star * gamma_star) * C, n * nu), p_star * gamma_star),
            (-p * gamma, Fraction(n * nu, C)),
        ),
        (1, 3),
    )
    ndp_mu = n * d * p * mu
    (u11, u12), (u21, u22) = [[mu, Fraction(ndp_mu, C)], [Fraction((mu * mu_star - 1) * C, ndp_mu), mu_star]]
    # diag(U, U^-tr) is block_diagonal of U^-tr
    h2 = block_diagonal([[u22, -u21], [-u12, u11]])
    off = d * p * p_star * mu_star * mu * r
    h3 = translation([[Fraction(n * d * d * p * p * p_star * mu * mu * r, C), off], [off, 0]])
    h4 = None
    if mu == 1 and n % (C * nu) == 0:
        h4 = translation([[Fraction(n * d * d * p * p * p_star * eps_gamma, C * nu), 0], [0, 0]])
    conjugators = FJConjugators(h1, h2, h3, h4, r)
    for name, h in zip(("H1", "H2", "H3", "H4"), conjugators[:4], strict=True):
        if h is not None and not (h.is_integral() and is_j_symplectic(h)):
            raise AssertionError(f"{name} is not an integral symplectic matrix")
    return conjugators


def fj_conjugator_product(
    conjugators: FJConjugators,
    w: SpMatrix,
    ctx: GroupContext,
    *,
    C: int,  # noqa: N803
    gamma: int,
    d: int,
    lam: tuple[int, int],
    eps: int,
) -> SpMatrix:
    """-H3 H2 H1 W W_{N nu p} M_{d, C gamma} M_lambda D_eps with the W matrix chosen by the caller."""
    if ctx.nu is None or ctx.theta is None:
        raise PreconditionError("fj_conjugator_product needs ctx.nu and ctx.theta")
    product = (
        conjugators.h3
        @ conjugators.h2
        @ conjugators.h1
        @ w
        @ _w_eta(ctx.N * ctx.nu * ctx.p)
        @ _m_dgamma(ctx.N, d, ctx.p, C * gamma, ctx.theta, ctx.nu)
        @ _m_lambda(lam)
        @ _d_eta(eps)
    )
    return -product


# ---------------------------------------------------------------------------
# random words
# ---------------------------------------------------------------------------


def _random_sl2(rng: np.random.Generator, spread: int = 3) -> list[list[int]]:
    x, y = (int(v) for v in rng.integers(-spread, spread + 1, size=2))
    return [[1 + x * y, x], [y, 1]]


def level_generators(ctx: GroupContext, rng: np.random.Generator) -> list[SpMatrix]:
    """One randomly parametrised element of each generator family of the level group."""
    p, n = ctx.p, ctx.N
    b11, b12, b22 = (int(v) for v in rng.integers(-3, 4, size=3))
    c11, c12, c22 = (int(v) for v in rng.integers(-2, 3, size=3))
    k = int(rng.integers(-2, 3))
    gamma = int(rng.integers(0, 4))
    return [
        translation([[b11, b12], [b12, Fraction(b22, p)]]),
        lower_translation([[c11, c12 * n * p], [c12 * n * p, c22 * Fraction(p * n * n, ctx.kappa)]]),
        embed_sl2(_random_sl2(rng), (0, 2)),
        block_diagonal([[1 + n * p * k, k], [n * p, 1]]),
        _m_dgamma(n, 1, p, gamma, ctx.kappa),
    ]


def random_word(ctx: GroupContext, length: int, rng: np.random.Generator) -> SpMatrix:
    """A product of `length` random level generators, H_p(N) and their inverses."""
    h = make_Hp(ctx.p, ctx.N)
    word = SpMatrix.identity()
    for _ in range(length):
        pool = [*level_generators(ctx, rng), h]
        g = pool[int(rng.integers(len(pool)))]
        if rng.integers(2):
            g = g.symplectic_inverse()
        word = word @ g
    return word
