"""The completed paramodular Klingen-Eisenstein series of weight 0 and the identities it satisfies.

    E(Z, s)  = sum over the four last-row types of chi+(M) P_Z[row]^-s
    EE(Z, s) = pi^-s p^(3s/2) (1 + p^-s) N^(2s) Gamma(s) L(2s, chi) E(Z, s)

EE is evaluated from its lattice form (two weighted lattice sums in P_Z), from
the residue-class expansions into Epstein functions with characteristics, or
from the coset sum itself.
"""

import logging
import math
from collections.abc import Sequence
from enum import Enum
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, InstanceOf, field_validator, model_validator

from paramodular_verify.characters import (
    DirichletCharacter,
    decompose,
    dirichlet_l,
    divisors,
    euler_phi,
    gauss_sum,
    is_prime,
    mobius,
)
from paramodular_verify.epstein import (
    RESIDUE_STEPS,
    CharacteristicBatch,
    EpsteinResult,
    FunctionalCheck,
    completed_epstein_sum,
    ellipsoid_points,
    functional_check,
    gamma_factor,
    residue_class_sum,
    symmetric_residue,
)
from paramodular_verify.exceptions import DivergentSeriesError, PreconditionError
from paramodular_verify.majorant import SiegelPoint, pz_form, siegel_action
from paramodular_verify.symplectic import (
    GroupContext,
    SpMatrix,
    bezout,
    block_diagonal,
    embed_sl2,
    lower_translation,
    make_generator,
    translation,
)


logger = logging.getLogger(__name__)

# lattice points used by the truncated direct sum when no radius is given
DIRECT_POINTS = 200_000


class Representation(str, Enum):
    LATTICE = "lattice"
    SECOND = "second"
    THIRD = "third"
    COSET = "coset"


class FunctionalForm(str, Enum):
    PROPOSITION = "proposition"
    COROLLARY = "corollary"


class EisensteinParams(BaseModel):
    """Level data, character mod N, point Z and the complex variable s."""

    model_config = ConfigDict(frozen=True)

    ctx: GroupContext
    chi: InstanceOf[DirichletCharacter]
    point: SiegelPoint = SiegelPoint()
    s: complex
    truncation_radius: float | None = None
    precision_bits: int = 53
    tolerance: float = 1e-12

    @field_validator("s", mode="before")
    @classmethod
    def check_s(cls, value: object) -> complex:
        return complex(value)  # type: ignore[arg-type]

    @model_validator(mode="after")
    def check_character(self) -> "EisensteinParams":
        if self.chi.modulus != self.ctx.N:
            raise PreconditionError(f"character modulus {self.chi.modulus} differs from N = {self.ctx.N}")
        return self

    def at(self, s: complex | None = None, point: SiegelPoint | None = None) -> "EisensteinParams":
        update: dict[str, object] = {}
        if s is not None:
            update["s"] = complex(s)
        if point is not None:
            update["point"] = point
        return self.model_copy(update=update)

    def with_level(self, N: int, kappa: int, chi: DirichletCharacter) -> "EisensteinParams":  # noqa: N803
        return EisensteinParams(
            ctx=GroupContext(p=self.ctx.p, N=N, kappa=kappa),
            chi=chi,
            point=self.point,
            s=self.s,
            truncation_radius=self.truncation_radius,
            precision_bits=self.precision_bits,
            tolerance=self.tolerance,
        )

    @property
    def form(self) -> np.ndarray:
        return pz_form(self.point).P


class DiffSeriesParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    base: EisensteinParams
    q: int
    r: int = 1

    @model_validator(mode="after")
    def check_coprime(self) -> "DiffSeriesParams":
        if not is_prime(self.q):
            raise PreconditionError(f"q = {self.q} is not prime")
        if self.r < 1:
            raise PreconditionError(f"r = {self.r} must be positive")
        ctx = self.base.ctx
        if math.gcd(ctx.p, ctx.N * self.q * self.r) != 1:
            raise PreconditionError(f"p = {ctx.p} must be coprime to N q r = {ctx.N * self.q * self.r}")
        return self

    def at(self, s: complex | None = None, point: SiegelPoint | None = None) -> "DiffSeriesParams":
        return self.model_copy(update={"base": self.base.at(s, point)})


class ResidueCheck(NamedTuple):
    numeric: complex
    expected: float


class VanishingSum(NamedTuple):
    value: complex
    scale: float


def _require_p_one_mod_n(ctx: GroupContext) -> None:
    if (ctx.p - 1) % ctx.N:
        raise PreconditionError(f"this representation needs p = 1 mod N, got p = {ctx.p}, N = {ctx.N}")


def lattice_scales(ctx: GroupContext) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Coordinate scales (N, N^2 p/kappa, N, 1) and (N p, N^2 p/kappa, N p, 1) of the two lattices."""
    n, p = ctx.N, ctx.p
    middle = n * n * p // ctx.kappa
    return (n, middle, n, 1), (n * p, middle, n * p, 1)


# ---------------------------------------------------------------------------
# lattice representation
# ---------------------------------------------------------------------------


def _direct_class_sum(
    form: np.ndarray, scale: Sequence[int], weights: np.ndarray, s: complex, radius: float | None
) -> tuple[complex, float, int]:
    """sum_{lam != 0, form[scale lam] <= R^2} w(lam_4) form[scale lam]^-s plus the continuum tail."""
    scaled = np.asarray(form, dtype=float) * np.outer(scale, scale)
    d_factor = float(np.linalg.det(scaled)) ** -0.5
    if radius is None:
        radius = (2 * DIRECT_POINTS / (math.pi**2 * d_factor)) ** 0.25
    lam, values = ellipsoid_points(scaled, radius * radius)
    w = weights[np.mod(lam[:, 3], len(weights))]
    value = complex(np.sum(w * values ** (-s)))
    mean_weight = complex(np.mean(weights))
    tail = mean_weight * 2 * math.pi**2 * d_factor * radius ** (4 - 2 * s) / (2 * s - 4)
    return value + tail, abs(tail), len(values)


def eis_lattice_rep(params: EisensteinParams, method: str = "continued") -> EpsteinResult:
    """pi^-s p^(3s/2) N^(2s) Gamma(s) sum_{lam != 0} chi(lam_4) (p^-s P_Z[first]^-s + P_Z[second]^-s).

    method "continued" splits both lattice sums through their theta functions and is valid for
    every s; "direct" truncates the series (Re s > 2) and adds the continuum tail.
    """
    ctx, s = params.ctx, params.s
    first, second = lattice_scales(ctx)
    weights = params.chi.value_table
    form = params.form
    if method == "direct":
        if s.real <= 2:
            raise DivergentSeriesError(f"the lattice series diverges at Re s = {s.real}")
        b1, t1, n1 = _direct_class_sum(form, first, weights, s, params.truncation_radius)
        b2, t2, n2 = _direct_class_sum(form, second, weights, s, params.truncation_radius)
        factor = gamma_factor(s)
        b1, b2, t1, t2 = b1 * factor, b2 * factor, t1 * abs(factor), t2 * abs(factor)
    elif method == "continued":
        r1 = residue_class_sum(form, first, weights, s, params.tolerance, params.precision_bits)
        r2 = residue_class_sum(form, second, weights, s, params.tolerance, params.precision_bits)
        b1, t1, n1 = r1.value, r1.tail_bound, r1.terms_used
        b2, t2, n2 = r2.value, r2.tail_bound, r2.terms_used
    else:
        raise ValueError(f"unknown lattice method {method!r}")
    p_pow = complex(ctx.p) ** (-s)
    outer = complex(ctx.p) ** (1.5 * s) * complex(ctx.N) ** (2 * s)
    return EpsteinResult(outer * (p_pow * b1 + b2), abs(outer) * (abs(p_pow) * t1 + t2), n1 + n2)


# ---------------------------------------------------------------------------
# Epstein representations
# ---------------------------------------------------------------------------


def _residue_grid(ctx: GroupContext, chi: DirichletCharacter) -> tuple[np.ndarray, np.ndarray]:
    """(alpha, beta, gamma, delta) over N x kappa x N x N^2 with chi(delta) != 0, and chi(delta)."""
    n, kappa = ctx.N, ctx.kappa
    grid = np.stack(np.meshgrid(np.arange(n), np.arange(kappa), np.arange(n), np.arange(n * n), indexing="ij"), -1)
    grid = grid.reshape(-1, 4)
    values = chi.value_table[grid[:, 3] % n]
    keep = values != 0
    return grid[keep].astype(np.int64), values[keep]


def _second_batch(params: EisensteinParams) -> CharacteristicBatch:
    ctx, s = params.ctx, params.s
    n, p, kappa = ctx.N, ctx.p, ctx.kappa
    grid, chi_delta = _residue_grid(ctx, params.chi)
    alpha, beta, gamma, delta = grid.T
    k = len(grid)
    outer = complex(n) ** (-2 * s)

    # p^(s/2 - 1) sum_h Lambda(shift (alpha/N, p beta/kappa, gamma/N, delta/N^2), phase (0, kappa h/p, 0, 0))
    h = np.repeat(np.arange(p), k)
    shifts = np.tile(np.stack([alpha, p * beta, gamma, delta], axis=1), (p, 1))
    phases = np.zeros((k * p, 4), dtype=np.int64)
    phases[:, 1] = kappa * h
    first = CharacteristicBatch(
        np.tile(chi_delta, p) * outer * complex(p) ** (s / 2 - 1), shifts, (n, kappa, n, n * n), phases, (1, p, 1, 1)
    )
    return CharacteristicBatch.combine([first, _trailing_batch(params, grid, chi_delta)])


def _trailing_batch(params: EisensteinParams, grid: np.ndarray, chi_delta: np.ndarray) -> CharacteristicBatch:
    """p^(-s/2) sum_g Lambda(shift (alpha/N, beta/kappa, gamma/N, (p delta + N^2 g)/(N^2 p)), phase 0)."""
    ctx, s = params.ctx, params.s
    n, p, kappa = ctx.N, ctx.p, ctx.kappa
    alpha, beta, gamma, delta = grid.T
    k = len(grid)
    g = np.repeat(np.arange(p), k)
    shifts = np.stack(
        [np.tile(alpha, p), np.tile(beta, p), np.tile(gamma, p), p * np.tile(delta, p) + n * n * g], axis=1
    )
    coefficients = np.tile(chi_delta, p) * complex(n) ** (-2 * s) * complex(p) ** (-s / 2)
    return CharacteristicBatch(
        coefficients, shifts, (n, kappa, n, n * n * p), np.zeros((k * p, 4), dtype=np.int64), (1, 1, 1, 1)
    )


def _third_batch(params: EisensteinParams) -> CharacteristicBatch:
    ctx, s = params.ctx, params.s
    n, p, kappa = ctx.N, ctx.p, ctx.kappa
    grid, chi_delta = _residue_grid(ctx, params.chi)
    alpha, beta, gamma, delta = grid.T
    k = len(grid)

    # p^(-3s/2) sum_{h1, h2, h3} Lambda(shift ((p alpha + N h1)/(N p), beta/kappa, (p gamma + N h2)/(N p),
    # (p delta + N^2 h3)/(N^2 p)), phase 0)
    hs = np.stack(np.meshgrid(np.arange(p), np.arange(p), np.arange(p), indexing="ij"), -1).reshape(-1, 3)
    reps = len(hs)
    h1, h2, h3 = (np.repeat(hs[:, i], k) for i in range(3))
    shifts = np.stack(
        [
            p * np.tile(alpha, reps) + n * h1,
            np.tile(beta, reps),
            p * np.tile(gamma, reps) + n * h2,
            p * np.tile(delta, reps) + n * n * h3,
        ],
        axis=1,
    )
    coefficients = np.tile(chi_delta, reps) * complex(n) ** (-2 * s) * complex(p) ** (-1.5 * s)
    first = CharacteristicBatch(
        coefficients, shifts, (n * p, kappa, n * p, n * n * p), np.zeros((k * reps, 4), dtype=np.int64), (1, 1, 1, 1)
    )
    return CharacteristicBatch.combine([first, _trailing_batch(params, grid, chi_delta)])


def eis_epstein_rep(params: EisensteinParams, variant: Representation | str = Representation.SECOND) -> EpsteinResult:
    """EE(Z, s) as a residue-class combination of completed Epstein functions in P_Z, valid on both sides of Re s = 2."""
    variant = Representation(variant)
    _require_p_one_mod_n(params.ctx)
    if variant is Representation.SECOND:
        batch = _second_batch(params)
    elif variant is Representation.THIRD:
        batch = _third_batch(params)
    else:
        raise ValueError(f"{variant.value} is not an Epstein representation")
    logger.debug(f"{variant.value} representation: {len(batch)} characteristics at s = {params.s}")
    return completed_epstein_sum(
        params.form, batch, params.s, params.tolerance, precision_bits=params.precision_bits
    )


# ---------------------------------------------------------------------------
# coset sum
# ---------------------------------------------------------------------------


def coset_rows(
    ctx: GroupContext, chi: DirichletCharacter, height_bound: int
) -> tuple[np.ndarray, np.ndarray]:
    """Real last rows of the coset representatives with |lam|_inf <= height_bound and their chi+ weights.

    Types: (pN l1, pN^2 l2/kappa, pN l3, l4) with p not dividing l4; (pN l1, pN^2 l2/kappa, pN l3, p l4) with
    p not dividing l2; sqrt(p) (N l1, pN^2 l2/kappa, N l3, l4) with p not dividing l1; sqrt(p) (pN l1,
    pN^2 l2/kappa, N l3, l4) with p not dividing l3. lam is primitive with gcd(l4, N) = 1. chi+ of a
    representative is chi of the delta entry of its level-group part, which is chi(l4) for the first type
    and chi(p l4) for the others.
    """
    p, n = ctx.p, ctx.N
    middle = p * n * n // ctx.kappa
    side = np.arange(-height_bound, height_bound + 1)
    lam = np.stack(np.meshgrid(side, side, side, side, indexing="ij"), -1).reshape(-1, 4).astype(np.int64)
    lam = lam[(np.gcd.reduce(lam, axis=1) == 1) & (np.gcd(lam[:, 3], n) == 1)]
    l1, l2, l3, l4 = lam.T
    root = math.sqrt(p)
    table = chi.value_table

    rows, weights = [], []
    patterns = (
        (l4 % p != 0, (p * n, middle, p * n, 1), 1.0, l4),
        (l2 % p != 0, (p * n, middle, p * n, p), 1.0, p * l4),
        (l1 % p != 0, (n, middle, n, 1), root, p * l4),
        (l3 % p != 0, (p * n, middle, n, 1), root, p * l4),
    )
    for keep, scale, factor, delta in patterns:
        rows.append(factor * lam[keep] * np.array(scale, dtype=float))
        weights.append(table[np.mod(delta[keep], n)])
    return np.concatenate(rows), np.concatenate(weights)


def eis_coset_rep(params: EisensteinParams, height_bound: int = 8) -> complex:
    """sum over truncated coset representatives of chi+(M) (det Im M<Z> / (Im M<Z>)_11)^s.

    (det Im M<Z> / (Im M<Z>)_11)^s = P_Z[last row of M]^-s.
    """
    s = params.s
    if s.real <= 2:
        raise DivergentSeriesError(f"the coset sum diverges at Re s = {s.real}")
    rows, weights = coset_rows(params.ctx, params.chi, height_bound)
    values = np.einsum("ni,ij,nj->n", rows, params.form, rows)
    logger.debug(f"coset sum over {len(rows)} representatives, height bound {height_bound}")
    return complex(np.sum(weights * values ** (-s)))


def completion_factor(params: EisensteinParams) -> complex:
    """pi^-s p^(3s/2) (1 + p^-s) N^(2s) Gamma(s) L(2s, chi), turning the coset sum into EE."""
    p, n, s = params.ctx.p, params.ctx.N, params.s
    l_value = dirichlet_l(params.chi, 2 * s, params.precision_bits)
    return gamma_factor(s) * complex(p) ** (1.5 * s) * (1 + complex(p) ** (-s)) * complex(n) ** (2 * s) * l_value


def coset_first_statement(params: EisensteinParams, height_bound: int = 8) -> FunctionalCheck:
    """(1 + p^-s) L(2s, chi) E(Z, s) against p^-s S_1 + S_2, the two lattice sums without Gamma factors."""
    s = params.s
    p = params.ctx.p
    l_value = dirichlet_l(params.chi, 2 * s, params.precision_bits)
    lhs = (1 + complex(p) ** (-s)) * l_value * eis_coset_rep(params, height_bound)
    first, second = lattice_scales(params.ctx)
    weights = params.chi.value_table
    b1 = residue_class_sum(params.form, first, weights, s, params.tolerance, params.precision_bits).value
    b2 = residue_class_sum(params.form, second, weights, s, params.tolerance, params.precision_bits).value
    rhs = (complex(p) ** (-s) * b1 + b2) / gamma_factor(s)
    return functional_check(lhs, rhs)


# ---------------------------------------------------------------------------
# residue and functional equations
# ---------------------------------------------------------------------------


def eis_residue(params: EisensteinParams, eps: Sequence[float] = RESIDUE_STEPS) -> ResidueCheck:
    """Limit of (s - 2) EE(Z, s) at s = 2 against 2 kappa phi(N) / N (0 for non-principal chi).

    The constant Laurent term of EE grows like p^3 N^4, so the limit is taken from both sides of s = 2.
    """
    ctx = params.ctx

    def scaled(e: float) -> complex:
        return e * eis_epstein_rep(params.at(s=2 + e)).value

    expected = 2 * ctx.kappa * euler_phi(ctx.N) / ctx.N if params.chi.is_principal() else 0.0
    return ResidueCheck(symmetric_residue(scaled, eps), expected)


def w_image(point: SiegelPoint, eta: int) -> SiegelPoint:
    """W_eta<Z>."""
    return siegel_action(make_generator("W_eta", eta=eta), point)


def _functional_data(params: EisensteinParams) -> tuple[int, int, DirichletCharacter, complex]:
    _require_p_one_mod_n(params.ctx)
    dec = decompose(params.chi)
    g = complex(gauss_sum(dec.primitive_core.conj(), params.precision_bits))
    return dec.conductor, dec.R, dec.primitive_core, g


def eis_fe_check(params: EisensteinParams, form: FunctionalForm | str = FunctionalForm.PROPOSITION) -> FunctionalCheck:
    """EE(Z, 2 - s) against the reflected side at W_{Np}<Z> and s.

    proposition: (phi(R)/R) (kappa/G) sum_{r | R} chi_L(r) mu(r)/phi(r) (Lr)^(2s) pi^-s Gamma(s)
    sum_lam conj(1_r chi_L)(lam_4) (p^(3s/2) P_W[(Lrp, Lr kappa p, Lrp, 1) lam]^-s + p^(s/2) P_W[(Lr, Lr kappa p, Lr, 1) lam]^-s);
    corollary (kappa | L): the inner sums are EE of level Lr, kappa' = Lr/kappa, character conj(1_r chi_L).
    """
    form = FunctionalForm(form)
    ctx, s = params.ctx, params.s
    conductor, r_part, core, g = _functional_data(params)
    if form is FunctionalForm.COROLLARY and conductor % ctx.kappa:
        raise PreconditionError(f"the corollary needs kappa = {ctx.kappa} to divide the conductor {conductor}")
    p = ctx.p
    reflected = w_image(params.point, ctx.N * p)
    p_form = pz_form(reflected).P

    total = 0j
    for r in divisors(r_part):
        lr = conductor * r
        coefficient = core(r) * mobius(r) / euler_phi(r)
        psi = core.induce(lr).conj()
        if form is FunctionalForm.PROPOSITION:
            weights = psi.value_table
            a = residue_class_sum(p_form, (lr * p, lr * ctx.kappa * p, lr * p, 1), weights, s, params.tolerance)
            b = residue_class_sum(p_form, (lr, lr * ctx.kappa * p, lr, 1), weights, s, params.tolerance)
            inner = complex(lr) ** (2 * s) * (complex(p) ** (1.5 * s) * a.value + complex(p) ** (s / 2) * b.value)
        else:
            level = params.with_level(lr, lr // ctx.kappa, psi).at(point=reflected)
            inner = eis_epstein_rep(level).value
        total += coefficient * inner
    rhs = euler_phi(r_part) / r_part * ctx.kappa / g * total
    lhs = eis_epstein_rep(params.at(s=2 - s)).value
    logger.debug(f"functional equation ({form.value}): L = {conductor}, R = {r_part}, lhs = {lhs}, rhs = {rhs}")
    return functional_check(lhs, rhs)


def mobius_telescoping(r_part: int) -> dict[int, tuple[Fraction, Fraction]]:
    """For every r | R: sum_{theta | R/r} mu(theta) phi(theta)/theta phi(R/theta)/(R/theta)
    against phi(R)/R [r = R], exactly."""
    if mobius(r_part) == 0:
        raise PreconditionError(f"R = {r_part} is not square-free")
    out = {}
    for r in divisors(r_part):
        lhs = sum(
            (
                Fraction(mobius(t) * euler_phi(t), t) * Fraction(euler_phi(r_part // t), r_part // t)
                for t in divisors(r_part // r)
            ),
            Fraction(0),
        )
        rhs = Fraction(euler_phi(r_part), r_part) if r == r_part else Fraction(0)
        out[r] = (lhs, rhs)
    return out


def smart_sum_check(params: EisensteinParams, conjugate_lhs: bool = False) -> FunctionalCheck:
    """sum_{theta | R} mu(theta) phi(theta)/theta EE_{LR/theta, kappa, 1_{R/theta} chi_L}(W_{(LR/theta) p}<Z>, 2 - s)
    against (mu(R)/R) (chi_L(R)/G) kappa EE_{LR, LR/kappa, conj(1_R chi_L)}(Z, s).

    conjugate_lhs puts conj(1_{R/theta} chi_L) on the left instead; the two readings coincide for real chi_L.
    """
    ctx, s = params.ctx, params.s
    conductor, r_part, core, g = _functional_data(params)
    if conductor % ctx.kappa:
        raise PreconditionError(f"the smart sum needs kappa = {ctx.kappa} to divide the conductor {conductor}")
    p = ctx.p
    lhs = 0j
    for theta in divisors(r_part):
        level = conductor * r_part // theta
        induced = core.induce(level)
        term = params.with_level(level, ctx.kappa, induced.conj() if conjugate_lhs else induced)
        term = term.at(s=2 - s, point=w_image(params.point, level * p))
        lhs += mobius(theta) * euler_phi(theta) / theta * eis_epstein_rep(term).value
    top = conductor * r_part
    target = params.with_level(top, top // ctx.kappa, core.induce(top).conj())
    rhs = mobius(r_part) / r_part * core(r_part) / g * ctx.kappa * eis_epstein_rep(target).value
    return functional_check(lhs, rhs)


# ---------------------------------------------------------------------------
# difference series
# ---------------------------------------------------------------------------


def diff_series_eval(params: DiffSeriesParams) -> EpsteinResult:
    """pi^-s (Nrq)^(2s) Gamma(s) sum_{lam != 0} chi(q lam_4) (p^(s/2) P_Z[(Nqr, N^2 q^2 r^2 p/kappa, Nqr, q) lam]^-s
    + p^(3s/2) P_Z[(Nqrp, N^2 q^2 r^2 p/kappa, Nqrp, q) lam]^-s)."""
    base = params.base
    ctx, s = base.ctx, base.s
    n, p, q, r = ctx.N, ctx.p, params.q, params.r
    nqr = n * q * r
    middle = n * n * q * q * r * r * p // ctx.kappa
    weights = np.array([base.chi(q * a) for a in range(n)])
    a = residue_class_sum(base.form, (nqr, middle, nqr, q), weights, s, base.tolerance, base.precision_bits)
    b = residue_class_sum(base.form, (nqr * p, middle, nqr * p, q), weights, s, base.tolerance, base.precision_bits)
    outer = complex(nqr) ** (2 * s)
    p1, p3 = complex(p) ** (s / 2), complex(p) ** (1.5 * s)
    return EpsteinResult(
        outer * (p1 * a.value + p3 * b.value),
        abs(outer) * (abs(p1) * a.tail_bound + abs(p3) * b.tail_bound),
        a.terms_used + b.terms_used,
    )


def diff_series_difference(params: DiffSeriesParams) -> complex:
    """EE_{Np, chi}(W_{Np}<Y>) - EE_{Nqp, 1_q chi}(W_{Nqp}<Y>) with Y = W_{Nqrp}<Z>."""
    base = params.base
    ctx = base.ctx
    n, p, q, r = ctx.N, ctx.p, params.q, params.r
    y = w_image(base.point, n * q * r * p)
    first = eis_lattice_rep(base.at(point=w_image(y, n * p))).value
    finer = base.with_level(n * q, ctx.kappa, base.chi.induce(n * q)).at(point=w_image(y, n * q * p))
    second = eis_lattice_rep(finer).value
    return first - second


def diff_series_invariance(params: DiffSeriesParams) -> FunctionalCheck:
    """The difference series at M^tr_eta<Z>, eta = N^2 r^2 q p / kappa, against its value at Z."""
    ctx = params.base.ctx
    eta = ctx.N * ctx.N * params.r * params.r * params.q * ctx.p // ctx.kappa
    moved = siegel_action(make_generator("M_eta", eta=eta).transpose(), params.base.point)
    return functional_check(diff_series_eval(params.at(point=moved)).value, diff_series_eval(params).value)


def symmetry_spot_elements(params: DiffSeriesParams) -> list[SpMatrix]:
    """Five elements of Gamma_{2,1} that map both lattices of the difference series onto themselves."""
    ctx = params.base.ctx
    n, p, q, r = ctx.N, ctx.p, params.q, params.r
    level = n * q * r * p
    chi = params.base.chi
    d = next((d for d in range(2, 4 * level) if math.gcd(d, level) == 1 and chi(d) != 1), level - 1)
    _, x, y = bezout(d, level)
    unit = block_diagonal([[x, -y], [level, d]])
    shift = translation([[1, 2], [2, 3]])
    return [
        shift,
        embed_sl2([[2, 1], [1, 1]], (0, 2)),
        lower_translation([[1, level], [level, n * n * q * r * r * p // ctx.kappa]]),
        unit,
        shift @ unit,
    ]


def diff_series_symmetry(params: DiffSeriesParams, m: SpMatrix) -> FunctionalCheck:
    """value at M<Z> against conj(chi(delta_M)) times the value at Z."""
    moved = siegel_action(m, params.base.point)
    delta = int(m[3, 3].a)
    lhs = diff_series_eval(params.at(point=moved)).value
    rhs = params.base.chi(delta).conjugate() * diff_series_eval(params).value
    return functional_check(lhs, rhs)


def vanishing_sum(params: EisensteinParams, q: int) -> VanishingSum:
    """sum_{nu mod q} of the lattice form with weights chi(lam_4 + N nu / q), for a prime q | N."""
    ctx, s = params.ctx, params.s
    n = ctx.N
    if not is_prime(q) or n % q:
        raise PreconditionError(f"q = {q} must be a prime divisor of N = {n}")
    first, second = lattice_scales(ctx)
    outer = complex(ctx.p) ** (1.5 * s) * complex(n) ** (2 * s)
    p_pow = complex(ctx.p) ** (-s)
    total, scale = 0j, 0.0
    for nu in range(q):
        weights = np.array([params.chi(a + n // q * nu) for a in range(n)])
        b1 = residue_class_sum(params.form, first, weights, s, params.tolerance, params.precision_bits).value
        b2 = residue_class_sum(params.form, second, weights, s, params.tolerance, params.precision_bits).value
        value = outer * (p_pow * b1 + b2)
        total += value
        scale += abs(value)
    return VanishingSum(total, scale)


def eisenstein_value(params: EisensteinParams, representation: Representation | str, height_bound: int = 8) -> complex:
    """EE(Z, s) through the named representation."""
    representation = Representation(representation)
    if representation is Representation.LATTICE:
        return eis_lattice_rep(params).value
    if representation is Representation.COSET:
        return completion_factor(params) * eis_coset_rep(params, height_bound)
    return eis_epstein_rep(params, representation).value
