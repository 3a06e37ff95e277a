import numpy as np
import pytest
from pydantic import ValidationError

from paramodular_verify.exceptions import PreconditionError
from paramodular_verify.majorant import MajorantForm, SiegelPoint, condition_number, evaluate_form, pz_form, siegel_action
from paramodular_verify.symplectic import GeneratorKind, SpMatrix, make_generator


GENERIC = SiegelPoint.parse("0.1 0.2 -0.3 1.2 0.3 0.9")


def test_identity_point_has_identity_majorant():
    assert np.allclose(pz_form(SiegelPoint.identity()).P, np.eye(4))


def test_majorant_is_symmetric_with_determinant_one():
    p = pz_form(GENERIC).P
    assert np.allclose(p, p.T)
    assert np.linalg.det(p) == pytest.approx(1.0, rel=1e-12)
    assert np.all(np.linalg.eigvalsh(p) > 0)


def test_point_validation():
    with pytest.raises(ValidationError):
        SiegelPoint(y=(1.0, 2.0, 1.0))
    with pytest.raises(ValueError):
        SiegelPoint.parse("1 2 3")
    assert str(SiegelPoint.identity()) == "0.0 0.0 0.0 1.0 0.0 1.0"


def test_majorant_form_validation():
    with pytest.raises(ValueError):
        MajorantForm(np.diag([1.0, 2.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        MajorantForm(np.diag([-1.0, -1.0, 1.0, 1.0]))
    form = MajorantForm(np.diag([2.0, 0.5, 1.0, 1.0]))
    assert form(np.array([1.0, 2.0, 0.0, 1.0])) == pytest.approx(5.0)


def test_evaluate_form_on_stacks():
    vectors = np.array([[1, 0, 0, 0], [0, 1, 1, 0], [1, 1, 1, 1]])
    values = evaluate_form(np.eye(4), vectors)
    assert values.shape == (3,)
    assert np.allclose(values, [1, 2, 4])


def test_action_of_identity_and_j():
    image = siegel_action(SpMatrix.identity(), GENERIC)
    assert np.allclose(image.Z, GENERIC.Z)
    inverted = siegel_action(make_generator(GeneratorKind.J), GENERIC)
    assert np.allclose(inverted.Z, -np.linalg.inv(GENERIC.Z))


def test_action_composes():
    a = make_generator(GeneratorKind.M_LAMBDA, lam=(2, 3))
    b = make_generator(GeneratorKind.W_ETA, eta=3)
    step = siegel_action(a, siegel_action(b, GENERIC))
    direct = siegel_action(a @ b, GENERIC)
    assert np.allclose(step.Z, direct.Z)


def test_singular_action():
    # C = D = 0
    with pytest.raises(PreconditionError):
        siegel_action(np.zeros((4, 4)), GENERIC)


def test_condition_number():
    assert condition_number(SiegelPoint.identity()) == pytest.approx(1.0)
