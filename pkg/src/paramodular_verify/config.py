from enum import Enum

from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from paramodular_verify.logger import LEVELS


class ReportFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    TEXT = "text"


class SuiteName(str, Enum):
    GROUP = "group"
    CHARS = "chars"
    ACHISUM = "achisum"
    EPSTEIN = "epstein"
    EISENSTEIN = "eisenstein"
    FE = "fe"
    SMARTSUM = "smartsum"
    DIFF = "diff"
    SERIES = "series"
    ALL = "all"


def parse_complex(value: object) -> complex:
    """Accepts a number, a pair [re, im] or the text "re im"."""
    if isinstance(value, str):
        parts = value.replace(",", " ").split()
        if len(parts) == 1:
            return complex(parts[0])
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
        raise ValueError(f"expected 're im', got {value!r}")
    if isinstance(value, list | tuple):
        if len(value) != 2:
            raise ValueError(f"expected [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)  # type: ignore[arg-type]


class GroupDefaults(BaseModel):
    p: int = Field(default=7)
    N: int = Field(default=6)
    kappa: int = Field(default=1)
    pairs: list[tuple[int, int]] = Field(default=[(5, 4), (7, 6), (7, 3), (13, 12), (11, 5)])
    """(p, N) pairs checked for the H_p(N) conditions."""
    words: int = Field(default=1000)
    """Random words classified into the four last-row types."""
    word_length: int = Field(default=8)
    character_pairs: int = Field(default=200)
    coset_levels: list[int] = Field(default=[1, 2, 3, 4, 6])
    """Levels N whose coset representatives for nu in {1, 2} are tested for pairwise inequivalence."""
    seed: int = Field(default=20240611)


class CharacterDefaults(BaseModel):
    max_modulus: int = Field(default=24)
    """Largest N of the character-sum lemma grid."""
    max_gauss_modulus: int = Field(default=50)


class EpsteinDefaults(BaseModel):
    radius: float | None = Field(default=None)
    """Truncation radius of direct sums in the metric of the form; None is 12."""
    Z: str | None = Field(default=None)
    """Point whose majorant P_Z is the form of single-point checks; None is iI."""
    s: complex = Field(default=complex(2.5, 0.0))
    forms: int = Field(default=10)
    residue_forms: int = Field(default=5)
    seed: int = Field(default=7)

    @field_validator("s", mode="before")
    @classmethod
    def check_s(cls, value: object) -> complex:
        return parse_complex(value)


class EisensteinDefaults(BaseModel):
    p: int = Field(default=7)
    N: int = Field(default=6)
    kappa: int = Field(default=1)
    chi_index: int = Field(default=0)
    """Index into the canonical enumeration of characters mod N."""
    Z: str | None = Field(default=None)
    """Six reals "x11 x12 x22 y11 y12 y22"; None is iI."""
    s: complex = Field(default=complex(2.6, 0.0))
    representation: str = Field(default="lattice")
    height_bound: int = Field(default=8)
    q: int = Field(default=3)
    r: int = Field(default=1)

    @field_validator("s", mode="before")
    @classmethod
    def check_s(cls, value: object) -> complex:
        return parse_complex(value)


class Tolerances(BaseModel):
    """Acceptance tolerances per suite; printed into every report."""

    achisum: float = Field(default=1e-9)
    chars: float = Field(default=1e-9)
    """Scaled by N."""
    epstein_oracle: float = Field(default=1e-3)
    epstein_continuation: float = Field(default=1e-8)
    epstein_residue: float = Field(default=1e-4)
    eisenstein: float = Field(default=1e-6)
    eisenstein_residue: float = Field(default=1e-3)
    fe: float = Field(default=1e-5)
    """Scaled by 1 + |lhs|."""
    smartsum: float = Field(default=1e-5)
    diff: float = Field(default=1e-6)
    diff_vanishing: float = Field(default=1e-8)
    series: float = Field(default=1e-12)


class Config(BaseSettings):
    """
    Configuration of verification runs. Values can be set via environment variables, a config file or flags.

    Pydantic maps uppercased environment variables onto the fields. Nested sections are addressed with a double
    underscore: `LOG_LEVEL` sets `log_level`, `EISENSTEIN__P=11` sets `eisenstein.p`, `TOLERANCES__FE=1e-4` sets
    `tolerances.fe`. The worker count is read from `PARAMOD_WORKERS`; it changes wall time only, never values.
    """

    model_config = SettingsConfigDict(env_nested_delimiter="__", populate_by_name=True)

    log_level: str = "INFO"

    @field_validator("log_level")
    @classmethod
    def check_log_level(cls, value: str) -> str:
        level = value.upper()
        if level not in LEVELS:
            raise ValueError(f"unknown log level {value!r}")
        return level

    workers: int = Field(alias="PARAMOD_WORKERS", default=1, ge=1)

    precision_bits: int = Field(default=53, ge=53)

    output_format: ReportFormat = ReportFormat.JSON

    suite: SuiteName = SuiteName.ALL

    group: GroupDefaults = GroupDefaults()

    characters: CharacterDefaults = CharacterDefaults()

    epstein: EpsteinDefaults = EpsteinDefaults()

    eisenstein: EisensteinDefaults = EisensteinDefaults()

    tolerances: Tolerances = Tolerances()
