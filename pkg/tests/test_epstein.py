import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from paramodular_verify.epstein import (
    CharacteristicBatch,
    EpsteinParams,
    completed_epstein_sum,
    dual_gap,
    ellipsoid_points,
    epstein_continued,
    epstein_direct,
    epstein_functional_check,
    epstein_residue,
    epstein_smoothed,
    four_squares_oracle,
    gamma_factor,
    iter_ellipsoid_points,
    residue_class_sum,
    symmetric_residue,
    to_fraction,
)
from paramodular_verify.exceptions import DivergentSeriesError, PoleError, PreconditionError, TailBoundError
from paramodular_verify.majorant import SiegelPoint, pz_form


FORM = pz_form(SiegelPoint.parse("0.1 0.2 -0.3 1.2 0.3 0.9")).P


# ---------------------------------------------------------
# Helpers
# ---------------------------------------------------------
def relative_error(a, b):
    return abs(a - b) / max(abs(a), abs(b))


def characteristic_params(s, **kwargs):
    return EpsteinParams(
        form=FORM,
        s=s,
        shift=(Fraction(1, 3), 0, Fraction(1, 2), 0),
        phase=(0, Fraction(1, 4), 0, 0),
        **kwargs,
    )


# ---------------------------------------------------------
# Lattice enumeration
# ---------------------------------------------------------
def test_ellipsoid_points_count_sums_of_four_squares():
    lam, values = ellipsoid_points(np.eye(4), 2.0)
    # r4(1) + r4(2)
    assert len(lam) == 8 + 24
    assert np.all(values <= 2.0)
    assert not np.any(np.all(lam == 0, axis=1))
    with_zero, _ = ellipsoid_points(np.eye(4), 2.0, exclude_zero=False)
    assert len(with_zero) == 33


def test_ellipsoid_points_with_shifted_center():
    lam, values = ellipsoid_points(np.eye(4), 0.25, center=(0.5, 0, 0, 0))
    assert sorted(lam[:, 0].tolist()) == [-1, 0]
    assert np.allclose(values, 0.25)


def test_ellipsoid_points_match_brute_force():
    bound = 6.0
    lam, values = ellipsoid_points(FORM, bound)
    side = np.arange(-6, 7)
    grid = np.stack(np.meshgrid(side, side, side, side, indexing="ij"), -1).reshape(-1, 4)
    brute = np.einsum("ni,ij,nj->n", grid, FORM, grid)
    expected = np.count_nonzero((brute <= bound) & np.any(grid != 0, axis=1))
    assert len(lam) == expected
    assert np.allclose(values, np.einsum("ni,ij,nj->n", lam, FORM, lam))


# ---------------------------------------------------------
# Characteristics
# ---------------------------------------------------------
def test_batch_denominators():
    batch = CharacteristicBatch.from_characteristics(
        [(1, (Fraction(1, 2), 0, 0, 0), (0, 0, 0, 0)), (2, (Fraction(1, 3), 0, 0, 0), (0, 0, 0, Fraction(1, 5)))]
    )
    assert batch.shift_denominators == (6, 1, 1, 1)
    assert batch.phase_denominators == (1, 1, 1, 5)
    assert batch.shift_numerators.tolist() == [[3, 0, 0, 0], [2, 0, 0, 0]]
    assert len(batch) == 2


def test_combine_rescales():
    a = CharacteristicBatch.single((Fraction(1, 2), 0, 0, 0))
    b = CharacteristicBatch.single((0, 0, 0, Fraction(1, 3)), coefficient=2.0)
    combined = CharacteristicBatch.combine([a, b.scaled(0.5)])
    assert combined.shift_denominators == (2, 1, 1, 3)
    assert combined.coefficients.tolist() == [1.0, 1.0]


def test_empty_batch():
    with pytest.raises(ValueError):
        CharacteristicBatch.from_characteristics([])


def test_to_fraction():
    assert to_fraction(0.25) == Fraction(1, 4)
    assert to_fraction("2/3") == Fraction(2, 3)


# ---------------------------------------------------------
# Continuation
# ---------------------------------------------------------
@pytest.mark.parametrize("s", [3.0, 2.5 + 1.0j, 1.3 + 0.5j, -0.7])
def test_sum_of_four_squares(s):
    value = epstein_continued(EpsteinParams(form=np.eye(4), s=s)).value / gamma_factor(s)
    assert relative_error(value, four_squares_oracle(s)) < 1e-9


def test_split_point_does_not_matter():
    params = characteristic_params(1.7 + 0.4j)
    low = epstein_continued(params, t0=0.8).value
    high = epstein_continued(params, t0=1.3).value
    assert relative_error(low, high) < 1e-9


@pytest.mark.parametrize("s", [2.6, 0.4 + 1.0j])
def test_functional_equation(s):
    check = epstein_functional_check(characteristic_params(s))
    assert check.rel_err < 1e-9


def test_refinement_path_agrees_with_class_path():
    batch = CharacteristicBatch.from_characteristics(
        [
            (1.0, (Fraction(1, 2), 0, 0, 0), (0, 0, 0, Fraction(1, 3))),
            (0.5j, (0, 0, 0, 0), (0, Fraction(1, 3), 0, 0)),
        ]
    )
    coarse = completed_epstein_sum(FORM, batch, 2.6, fine=False).value
    fine = completed_epstein_sum(FORM, batch, 2.6, fine=True).value
    assert relative_error(coarse, fine) < 1e-9


def test_refinement_table_limit():
    batch = CharacteristicBatch.single((Fraction(1, 97), Fraction(1, 89), Fraction(1, 83), 0), (0, 0, Fraction(1, 79), Fraction(1, 73)))
    with pytest.raises(PreconditionError):
        completed_epstein_sum(FORM, batch, 2.6, fine=True)


def test_poles():
    with pytest.raises(PoleError):
        completed_epstein_sum(np.eye(4), CharacteristicBatch.single(), 2.0)
    with pytest.raises(PoleError):
        completed_epstein_sum(np.eye(4), CharacteristicBatch.single(), 0.0)
    # a non-integral shift removes the pole at s = 0
    shifted = CharacteristicBatch.single((Fraction(1, 2), 0, 0, 0))
    assert math.isfinite(abs(completed_epstein_sum(np.eye(4), shifted, 0.0).value))


def test_residue_class_sum_reassembles_the_full_lattice():
    full = epstein_continued(EpsteinParams(form=FORM, s=2.6)).value
    one_class = residue_class_sum(FORM, (1, 1, 1, 1), [1.0], 2.6).value
    two_classes = residue_class_sum(FORM, (1, 1, 1, 1), [1.0, 1.0], 2.6).value
    assert relative_error(one_class, full) < 1e-10
    assert relative_error(two_classes, full) < 1e-10
    assert residue_class_sum(FORM, (1, 1, 1, 1), [0.0, 0.0], 2.6).value == 0


# ---------------------------------------------------------
# Direct sums and residues
# ---------------------------------------------------------
def test_direct_sum_against_oracle():
    result = epstein_direct(EpsteinParams(form=np.eye(4), s=3, truncation_radius=12.0))
    assert relative_error(result.value, four_squares_oracle(3)) < 1e-3
    assert result.tail_bound > 0


def test_direct_sum_completed_matches_continuation():
    params = EpsteinParams(form=FORM, s=3.5, truncation_radius=12.0)
    direct = epstein_direct(params, completed=True).value
    continued = epstein_continued(params).value
    assert relative_error(direct, continued) < 1e-4


def test_direct_sum_diverges_left_of_two():
    with pytest.raises(DivergentSeriesError):
        epstein_direct(EpsteinParams(form=np.eye(4), s=2.0))


def test_direct_sum_tail_tolerance():
    with pytest.raises(TailBoundError):
        epstein_direct(EpsteinParams(form=np.eye(4), s=3, truncation_radius=2.0), tail_tolerance=1e-6)


def test_residue_at_two():
    numeric, expected = epstein_residue(EpsteinParams(form=FORM, s=2.5))
    assert expected == pytest.approx(1.0, rel=1e-10)
    assert abs(numeric - expected) < 1e-4
    numeric, expected = epstein_residue(characteristic_params(2.5))
    assert expected == 0.0
    assert abs(numeric) < 1e-4


def test_symmetric_residue_removes_even_terms_up_to_fourth_order():
    def f(e):
        return 2 + 1e6 * e + 5 * e**2 + 1e5 * e**3 - 7 * e**4

    assert symmetric_residue(f) == pytest.approx(2.0, abs=1e-9)


def test_symmetric_residue_ignores_large_odd_terms():
    # a pole with residue 1.5 and constant term 1e6, as for the Eisenstein sums of large level
    assert symmetric_residue(lambda e: e * (1.5 / e + 1e6 + 3e5 * e)) == pytest.approx(1.5, abs=1e-8)


def test_symmetric_residue_needs_halving_steps():
    with pytest.raises(PreconditionError):
        symmetric_residue(lambda e: e, eps=(1e-2, 4e-3, 2e-3))


# ---------------------------------------------------------
# Parameters
# ---------------------------------------------------------
def test_params_validation():
    with pytest.raises(ValidationError):
        EpsteinParams(form=np.arange(16.0).reshape(4, 4), s=2.5)
    with pytest.raises(ValidationError):
        EpsteinParams(form=np.eye(4), s=2.5, shift=(0, 0, 0))


def test_reflected_params():
    params = characteristic_params(2.6)
    reflected = params.reflected()
    assert reflected.s == pytest.approx(2 - 2.6)
    assert reflected.shift == params.phase
    assert reflected.phase == tuple(-x for x in params.shift)
    assert np.allclose(reflected.form @ params.form, np.eye(4))


def test_gamma_factor():
    assert gamma_factor(1) == pytest.approx(1 / math.pi)
    assert gamma_factor(2) == pytest.approx(1 / math.pi**2)


# ---------------------------------------------------------
# Smoothed direct sums
# ---------------------------------------------------------
def near_identity(seed):
    b = np.random.default_rng(seed).uniform(-1, 1, size=(4, 4))
    return np.eye(4) + 0.15 * (b + b.T) / 2


def test_slabs_reassemble_the_ellipsoid():
    lam, values = ellipsoid_points(FORM, 9.0, center=(0.25, 0, 0.5, 0))
    slabs = list(iter_ellipsoid_points(FORM, 9.0, center=(0.25, 0, 0.5, 0)))
    assert len(slabs) > 1
    assert np.array_equal(np.concatenate([block for block, _ in slabs]), lam)
    assert np.array_equal(np.concatenate([block_values for _, block_values in slabs]), values)
    assert len({int(block[0, 3]) for block, _ in slabs}) == len(slabs)


@pytest.mark.parametrize(
    "phase,expected",
    [((0, 0, 0, 0), 2 * math.pi), ((Fraction(1, 2), 0, 0, 0), math.pi), ((Fraction(1, 2), Fraction(1, 2), 0, 0), math.pi * math.sqrt(2))],
)
def test_dual_gap_of_the_identity(phase, expected):
    assert dual_gap(EpsteinParams(form=np.eye(4), s=3, phase=phase)) == pytest.approx(expected, rel=1e-12)


def test_smoothed_sum_against_oracle():
    result = epstein_smoothed(EpsteinParams(form=np.eye(4), s=3))
    assert relative_error(result.value, four_squares_oracle(3)) < 1e-9
    assert 0 < result.tail_bound < 1e-8


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3])
@pytest.mark.parametrize(
    "shift,phase",
    [
        ((Fraction(1, 3), 0, Fraction(3, 4), 0), (0, Fraction(1, 2), 0, 0)),
        ((0, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)), (Fraction(1, 2), 0, Fraction(1, 2), Fraction(1, 2))),
        ((Fraction(2, 3), 0, 0, 0), (0, 0, 0, 0)),
    ],
)
def test_smoothed_sum_matches_continuation(seed, shift, phase):
    params = EpsteinParams(form=near_identity(seed), s=2.5, shift=shift, phase=phase)
    smoothed = epstein_smoothed(params, completed=True).value
    continued = epstein_continued(params).value
    assert abs(smoothed - continued) <= 1e-8 * (1 + abs(continued))


def test_smoothed_sum_diverges_left_of_two():
    with pytest.raises(DivergentSeriesError):
        epstein_smoothed(EpsteinParams(form=np.eye(4), s=complex(2.0, 1.0)))


def test_smoothed_sum_refuses_tiny_gaps():
    with pytest.raises(PreconditionError):
        epstein_smoothed(EpsteinParams(form=np.eye(4), s=3, phase=(Fraction(1, 97), 0, 0, 0)))
