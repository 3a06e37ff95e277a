from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from paramodular_verify.characters import character
from paramodular_verify.eisenstein import (
    DiffSeriesParams,
    EisensteinParams,
    Representation,
    coset_first_statement,
    coset_rows,
    diff_series_invariance,
    diff_series_symmetry,
    eis_coset_rep,
    eis_epstein_rep,
    eis_fe_check,
    eis_lattice_rep,
    eis_residue,
    eisenstein_value,
    lattice_scales,
    mobius_telescoping,
    smart_sum_check,
    symmetry_spot_elements,
    vanishing_sum,
    w_image,
)
from paramodular_verify.exceptions import DivergentSeriesError, PreconditionError
from paramodular_verify.majorant import SiegelPoint
from paramodular_verify.symplectic import GroupContext, J1


POINT = SiegelPoint.parse("0.1 0.2 -0.3 1.2 0.3 0.9")


# ---------------------------------------------------------
# Helpers
# ---------------------------------------------------------
def relative_error(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def params(p, N, kappa, index, s, point=POINT):  # noqa: N803
    return EisensteinParams(ctx=GroupContext(p=p, N=N, kappa=kappa), chi=character(N, index), point=point, s=s)


# ---------------------------------------------------------
# Parameters
# ---------------------------------------------------------
def test_lattice_scales():
    first, second = lattice_scales(GroupContext(p=7, N=6, kappa=2))
    assert first == (6, 126, 6, 1)
    assert second == (42, 126, 42, 1)


def test_character_modulus_must_match_level():
    with pytest.raises(ValidationError):
        EisensteinParams(ctx=GroupContext(p=7, N=6), chi=character(5, 1), s=2.6)


def test_s_is_coerced_to_complex():
    assert params(7, 1, 1, 0, 3).s == complex(3, 0)


@pytest.mark.parametrize("q,r", [(4, 1), (3, 0), (7, 1)])
def test_difference_series_parameters_are_validated(q, r):
    with pytest.raises(ValidationError):
        DiffSeriesParams(base=params(7, 2, 1, 0, 2.6), q=q, r=r)


def test_at_keeps_the_level_data():
    base = params(7, 6, 2, 1, 2.6)
    moved = base.at(s=1.5, point=SiegelPoint.identity())
    assert moved.s == complex(1.5)
    assert moved.ctx == base.ctx
    assert moved.chi == base.chi
    assert moved.point == SiegelPoint.identity()


# ---------------------------------------------------------
# Representations
# ---------------------------------------------------------
@pytest.mark.slow
def test_lattice_matches_second_representation():
    eisenstein = params(7, 1, 1, 0, 2.6)
    lattice = eis_lattice_rep(eisenstein).value
    second = eis_epstein_rep(eisenstein, Representation.SECOND).value
    assert relative_error(lattice, second) < 1e-6


@pytest.mark.slow
def test_lattice_matches_third_representation():
    eisenstein = params(7, 2, 1, 0, 2.6)
    lattice = eis_lattice_rep(eisenstein).value
    third = eis_epstein_rep(eisenstein, "third").value
    assert relative_error(lattice, third) < 1e-6


@pytest.mark.slow
def test_direct_lattice_sum_approaches_the_continuation():
    eisenstein = params(7, 1, 1, 0, 3.0)
    direct = eis_lattice_rep(eisenstein, method="direct")
    continued = eis_lattice_rep(eisenstein)
    assert relative_error(direct.value, continued.value) < 1e-3


def test_direct_lattice_sum_diverges():
    with pytest.raises(DivergentSeriesError):
        eis_lattice_rep(params(7, 1, 1, 0, 1.8), method="direct")


def test_unknown_lattice_method():
    with pytest.raises(ValueError):
        eis_lattice_rep(params(7, 1, 1, 0, 2.6), method="exact")


def test_epstein_representations_need_p_one_mod_n():
    with pytest.raises(PreconditionError):
        eis_epstein_rep(params(5, 6, 1, 0, 2.6))


def test_coset_is_not_an_epstein_representation():
    with pytest.raises(ValueError):
        eis_epstein_rep(params(7, 6, 1, 0, 2.6), Representation.COSET)


# ---------------------------------------------------------
# Coset sum
# ---------------------------------------------------------
def test_coset_rows_weights_vanish_off_units():
    rows, weights = coset_rows(GroupContext(p=7, N=6), character(6, 1), 3)
    assert rows.shape[1] == 4
    assert len(rows) == len(weights)
    assert np.all(np.abs(np.abs(weights) - 1) < 1e-12)


def test_coset_sum_diverges_at_the_boundary():
    with pytest.raises(DivergentSeriesError):
        eis_coset_rep(params(5, 1, 1, 0, 2.0))


@pytest.mark.slow
@pytest.mark.parametrize("p,N", [(5, 1), (3, 2)])
def test_coset_sum_matches_lattice_sums(p, N):  # noqa: N803
    check = coset_first_statement(params(p, N, 1, 0, 6.0), height_bound=8)
    assert check.rel_err < 1e-6


@pytest.mark.slow
def test_coset_value_matches_lattice_value():
    eisenstein = params(5, 1, 1, 0, 6.0)
    coset = eisenstein_value(eisenstein, "coset", height_bound=8)
    lattice = eisenstein_value(eisenstein, Representation.LATTICE)
    assert relative_error(coset, lattice) < 1e-6


# ---------------------------------------------------------
# Residue and functional equations
# ---------------------------------------------------------
@pytest.mark.slow
def test_residue_of_principal_series():
    residue = eis_residue(params(7, 1, 1, 0, 2.0, SiegelPoint.identity()))
    assert residue.expected == 2.0
    assert abs(residue.numeric - 2.0) < 1e-3


@pytest.mark.slow
@pytest.mark.parametrize(
    "p,N,kappa,expected",
    [(7, 6, 1, 2 / 3), (7, 6, 2, 4 / 3), (13, 6, 2, 4 / 3), (13, 6, 1, 2 / 3)],
)
def test_residue_at_level_six_does_not_depend_on_p(p, N, kappa, expected):  # noqa: N803
    residue = eis_residue(params(p, N, kappa, 0, 2.0))
    assert residue.expected == pytest.approx(expected, rel=1e-12)
    assert abs(residue.numeric - expected) < 1e-3


@pytest.mark.slow
def test_residue_vanishes_for_non_principal_character():
    residue = eis_residue(params(7, 6, 1, 1, 2.0))
    assert residue.expected == 0.0
    assert abs(residue.numeric) < 1e-3


def test_w_image_is_an_involution():
    back = w_image(w_image(POINT, 42), 42)
    assert np.allclose(back.Z, POINT.Z, atol=1e-12)


def test_w_image_of_one():
    image = w_image(SiegelPoint.identity(), 1)
    assert np.allclose(image.Z, SiegelPoint.identity().Z, atol=1e-14)


@pytest.mark.slow
@pytest.mark.integration
def test_functional_equation_trivial_character():
    check = eis_fe_check(params(3, 2, 1, 0, complex(2.4, 0.3)), "proposition")
    assert check.abs_err <= 1e-6 * (1 + abs(check.lhs))


@pytest.mark.slow
@pytest.mark.integration
def test_smart_sum_trivial_character():
    check = smart_sum_check(params(3, 2, 1, 0, complex(2.4, 0.0)))
    assert check.abs_err <= 1e-6 * (1 + abs(check.lhs))


@pytest.mark.slow
@pytest.mark.integration
@pytest.mark.parametrize("form", ["proposition", "corollary"])
def test_functional_equation_cubic_character(form):
    eisenstein = params(29, 7, 1, 2, complex(2.4, 0.3))
    assert eisenstein.chi.is_even()
    assert not (eisenstein.chi**2).is_principal()
    check = eis_fe_check(eisenstein, form)
    assert abs(check.lhs) > 1e-8
    assert check.rel_err < 1e-5


@pytest.mark.slow
@pytest.mark.integration
def test_smart_sum_cubic_character_needs_the_unconjugated_left_side():
    eisenstein = params(29, 7, 1, 2, complex(2.4, 0.0))
    check = smart_sum_check(eisenstein)
    assert abs(check.lhs) > 1e-8
    assert check.rel_err < 1e-5
    assert smart_sum_check(eisenstein, conjugate_lhs=True).rel_err > 1e-3


@pytest.mark.slow
def test_series_vanishes_for_odd_character():
    eisenstein = params(7, 6, 1, 1, 2.6)
    assert not eisenstein.chi.is_even()
    assert abs(eis_epstein_rep(eisenstein).value) < 1e-6


def test_corollary_needs_kappa_dividing_conductor():
    with pytest.raises(PreconditionError):
        eis_fe_check(params(7, 6, 2, 0, 2.4), "corollary")


@pytest.mark.parametrize("r_part", [1, 2, 6, 30, 210])
def test_mobius_telescoping(r_part):
    for r, (lhs, rhs) in mobius_telescoping(r_part).items():
        assert lhs == rhs
        assert isinstance(lhs, Fraction)
    assert mobius_telescoping(30)[30][1] == Fraction(8, 30)


def test_mobius_telescoping_needs_square_free():
    with pytest.raises(PreconditionError):
        mobius_telescoping(12)


# ---------------------------------------------------------
# Difference series
# ---------------------------------------------------------
def test_vanishing_sum():
    result = vanishing_sum(params(11, 5, 1, 2, 2.6), 5)
    assert result.scale > 0
    assert abs(result.value) <= 1e-8 * result.scale


def test_vanishing_sum_needs_prime_divisor():
    with pytest.raises(PreconditionError):
        vanishing_sum(params(7, 6, 1, 1, 2.6), 5)


def test_symmetry_spot_elements_are_symplectic():
    diff = DiffSeriesParams(base=params(5, 2, 1, 0, 2.6), q=3)
    for m in symmetry_spot_elements(diff):
        assert m.transpose() @ J1 @ m == J1


@pytest.mark.slow
def test_difference_series_symmetries():
    diff = DiffSeriesParams(base=params(5, 2, 1, 0, 2.6), q=3)
    for m in symmetry_spot_elements(diff):
        check = diff_series_symmetry(diff, m)
        assert check.abs_err <= 1e-6 * max(abs(check.lhs), abs(check.rhs), 1.0)
    invariance = diff_series_invariance(diff)
    assert invariance.abs_err <= 1e-8 * max(abs(invariance.lhs), 1.0)
