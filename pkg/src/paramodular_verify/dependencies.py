import logging
from collections.abc import Mapping
from functools import lru_cache
from pathlib import Path
from typing import Any

from omegaconf import OmegaConf

from paramodular_verify.config import Config


logger = logging.getLogger(__name__)

# flat keys of config files and command line flags, and the Config fields they set
FLAT_KEYS: dict[str, tuple[tuple[str, ...], ...]] = {
    "p": (("group", "p"), ("eisenstein", "p")),
    "N": (("group", "N"), ("eisenstein", "N")),
    "kappa": (("group", "kappa"), ("eisenstein", "kappa")),
    "chi_index": (("eisenstein", "chi_index"),),
    "Z": (("epstein", "Z"), ("eisenstein", "Z")),
    "s": (("epstein", "s"), ("eisenstein", "s")),
    "q": (("eisenstein", "q"),),
    "r": (("eisenstein", "r"),),
    "height_bound": (("eisenstein", "height_bound"),),
    "representation": (("eisenstein", "representation"),),
    "radius": (("epstein", "radius"),),
    "max_modulus": (("characters", "max_modulus"),),
    "max_gauss_modulus": (("characters", "max_gauss_modulus"),),
    "format": (("output_format",),),
    "workers": (("PARAMOD_WORKERS",),),
    "precision_bits": (("precision_bits",),),
    "log_level": (("log_level",),),
    "suite": (("suite",),),
}


@lru_cache
def get_config() -> Config:
    return Config()


def _nest(flat: Mapping[str, Any]) -> dict[str, Any]:
    nested: dict[str, Any] = {}
    for key, value in flat.items():
        if key not in FLAT_KEYS:
            # sections such as `tolerances: {fe: 1e-4}` and unknown keys go to validation as they are
            nested[key] = value
            continue
        for path in FLAT_KEYS[key]:
            target = nested
            for part in path[:-1]:
                target = target.setdefault(part, {})
            target[path[-1]] = value
    return nested


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> Config:
    """Read a flat key/value YAML file, merge command line values over it and validate into Config.

    Keys mirror flag names (`p`, `N`, `chi_index`, `Z`, `s`, `radius`, `format`, ...). Values given in
    `overrides` win over the file, the file wins over environment variables.
    """
    layers = []
    if path is not None:
        logger.debug(f"Reading config file {path}")
        layers.append(OmegaConf.load(Path(path)))
    if overrides:
        layers.append(OmegaConf.create({k: v for k, v in overrides.items() if v is not None}))
    if not layers:
        return Config()
    merged = OmegaConf.to_container(OmegaConf.merge(*layers), resolve=True)
    if not isinstance(merged, dict):
        raise ValueError(f"config file {path} must hold a mapping")
    return Config(**_nest(merged))
