"""Points of the genus-2 Siegel upper half-space and their majorant forms P_Z."""

import logging
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from paramodular_verify.exceptions import PreconditionError
from paramodular_verify.symplectic import SpMatrix


logger = logging.getLogger(__name__)


class SiegelPoint(BaseModel):
    """Z = X + iY with X = [[x11, x12], [x12, x22]] and Y positive definite."""

    model_config = ConfigDict(frozen=True)

    x: tuple[float, float, float] = (0.0, 0.0, 0.0)
    y: tuple[float, float, float] = (1.0, 0.0, 1.0)

    @model_validator(mode="after")
    def check_positive(self) -> "SiegelPoint":
        y11, y12, y22 = self.y
        if not (y11 > 0 and y11 * y22 - y12 * y12 > 0):
            raise ValueError(f"Im Z = {self.y} is not positive definite")
        return self

    @classmethod
    def identity(cls) -> "SiegelPoint":
        return cls()

    @classmethod
    def parse(cls, text: str) -> "SiegelPoint":
        """Six reals "x11 x12 x22 y11 y12 y22"."""
        values = [float(tok) for tok in text.replace(",", " ").split()]
        if len(values) != 6:
            raise ValueError(f"expected six reals for Z, got {len(values)}")
        return cls(x=tuple(values[:3]), y=tuple(values[3:]))

    @classmethod
    def from_complex(cls, z: np.ndarray) -> "SiegelPoint":
        z = (z + z.T) / 2
        return cls(
            x=(float(z[0, 0].real), float(z[0, 1].real), float(z[1, 1].real)),
            y=(float(z[0, 0].imag), float(z[0, 1].imag), float(z[1, 1].imag)),
        )

    @property
    def X(self) -> np.ndarray:  # noqa: N802
        x11, x12, x22 = self.x
        return np.array([[x11, x12], [x12, x22]])

    @property
    def Y(self) -> np.ndarray:  # noqa: N802
        y11, y12, y22 = self.y
        return np.array([[y11, y12], [y12, y22]])

    @property
    def Z(self) -> np.ndarray:  # noqa: N802
        return self.X + 1j * self.Y

    def __str__(self) -> str:
        return " ".join(repr(v) for v in (*self.x, *self.y))


@dataclass(frozen=True)
class MajorantForm:
    """A symmetric positive definite 4x4 form of determinant one."""

    P: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.P, dtype=float)
        if p.shape != (4, 4) or not np.allclose(p, p.T, rtol=1e-12, atol=1e-12):
            raise ValueError("majorant must be a symmetric 4x4 matrix")
        try:
            np.linalg.cholesky(p)
        except np.linalg.LinAlgError as e:
            raise ValueError("majorant is not positive definite") from e
        det = np.linalg.det(p)
        if abs(det - 1.0) > 1e-10 * max(1.0, float(np.linalg.cond(p))):
            raise ValueError(f"majorant determinant {det} differs from 1")
        object.__setattr__(self, "P", p)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return evaluate_form(self.P, v)


def pz_form(z: SiegelPoint) -> MajorantForm:
    """P_Z = [[Y + X Y^-1 X, X Y^-1], [Y^-1 X, Y^-1]]."""
    x, y = z.X, z.Y
    y_inv = np.linalg.inv(y)
    return MajorantForm(np.block([[y + x @ y_inv @ x, x @ y_inv], [y_inv @ x, y_inv]]))


def evaluate_form(p: np.ndarray, v: np.ndarray) -> np.ndarray:
    """v^tr P v for one vector or a stack of row vectors."""
    v = np.asarray(v, dtype=float)
    return np.einsum("...i,ij,...j->...", v, p, v)


def condition_number(z: SiegelPoint) -> float:
    return float(np.linalg.cond(z.Y))


def siegel_action(m: SpMatrix | np.ndarray, z: SiegelPoint) -> SiegelPoint:
    """M<Z> = (A Z + B)(C Z + D)^-1 in double precision."""
    g = m.to_float() if isinstance(m, SpMatrix) else np.asarray(m, dtype=float)
    a, b, c, d = g[:2, :2], g[:2, 2:], g[2:, :2], g[2:, 2:]
    zz = z.Z
    denom = c @ zz + d
    if abs(np.linalg.det(denom)) < 1e-14:
        raise PreconditionError("C Z + D is singular")
    image = (a @ zz + b) @ np.linalg.inv(denom)
    cond = condition_number(z)
    if cond > 1e8:
        logger.warning(f"Im Z is badly conditioned (cond = {cond:.3g}); float64 majorants lose accuracy")
    return SiegelPoint.from_complex(image)
