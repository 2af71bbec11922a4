"""Run configuration: defaults, JSON loading, field validation.

A config file is a flat JSON object; keys match the CLI flag names documented
in the README.  Unknown keys are rejected.  Flag values override file values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from typing import Any, Mapping

DEFAULT_SEED = 0x5EEDC0DE
DEFAULT_CELLS = (2, 3, 4, 6, 8, 12, 16, 24, 32, 64, 125, 250)
DEFAULT_SIGMAS = (0.5, 0.1, 0.02, 0.01, 0.001)

_MAP_KINDS = ("logistic", "doubling", "tent")
_NOISE_MODES = ("none", "output", "dynamical")
_BOUNDARIES = ("clamp", "reflect")
_ALGORITHMS = ("lz78", "castore")


class ConfigError(ValueError):
    """Invalid configuration; message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    map: str = "logistic"
    lam: float = 4.0
    noise_mode: str = "dynamical"
    boundary: str = "reflect"
    sigma: tuple[float, ...] = DEFAULT_SIGMAS
    n_list: tuple[int, ...] = DEFAULT_CELLS
    length: int = 1_000_000
    burn_in: int = 1000
    seed: int = DEFAULT_SEED
    workers: int = 1
    algorithm: str = "lz78"
    p_samples: int = 20_000
    delta: float = 0.05
    flat_slope: float = 0.15
    noise_slope: float = 0.85
    max_block: int | None = None
    miller_madow: bool = False
    out_csv: str | None = None
    out_plot: str | None = None

    def validate(self) -> "RunConfig":
        if self.map not in _MAP_KINDS:
            raise ConfigError(f"map: must be one of {_MAP_KINDS}, got {self.map!r}")
        if self.map == "logistic" and not 0.0 < self.lam <= 4.0:
            raise ConfigError(f"lambda: must be in (0, 4], got {self.lam}")
        if self.noise_mode not in _NOISE_MODES:
            raise ConfigError(
                f"noise_mode: must be one of {_NOISE_MODES}, got {self.noise_mode!r}"
            )
        if self.boundary not in _BOUNDARIES:
            raise ConfigError(
                f"boundary: must be one of {_BOUNDARIES}, got {self.boundary!r}"
            )
        if self.algorithm not in _ALGORITHMS:
            raise ConfigError(
                f"algorithm: must be one of {_ALGORITHMS}, got {self.algorithm!r}"
            )
        if not self.sigma:
            raise ConfigError("sigma: need at least one value")
        for s in self.sigma:
            if s < 0.0:
                raise ConfigError(f"sigma: must be >= 0, got {s}")
        if not self.n_list:
            raise ConfigError("n_list: need at least one cell count")
        for n in self.n_list:
            if n < 2:
                raise ConfigError(f"n_list: cell counts must be >= 2, got {n}")
        if self.length < 1000:
            raise ConfigError(f"length: must be >= 1000, got {self.length}")
        if self.burn_in < 0:
            raise ConfigError(f"burn_in: must be >= 0, got {self.burn_in}")
        if self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers}")
        if self.p_samples < 1:
            raise ConfigError(f"p_samples: must be >= 1, got {self.p_samples}")
        if self.delta <= 0.0:
            raise ConfigError(f"delta: must be > 0, got {self.delta}")
        if self.flat_slope < 0.0 or self.noise_slope < 0.0:
            raise ConfigError("flat_slope/noise_slope: must be >= 0")
        if self.max_block is not None and self.max_block < 2:
            raise ConfigError(f"max_block: must be >= 2, got {self.max_block}")
        return self


# JSON/flag key -> dataclass field (identity unless renamed).
_KEY_TO_FIELD = {f.name: f.name for f in fields(RunConfig)} | {"lambda": "lam"}


def _coerce(name: str, value: Any) -> Any:
    if name == "sigma":
        return tuple(float(v) for v in value)
    if name == "n_list":
        return tuple(int(v) for v in value)
    return value


def from_mapping(mapping: Mapping[str, Any], base: RunConfig | None = None) -> RunConfig:
    """Build a config from a flat mapping, rejecting unknown keys."""
    cfg = base or RunConfig()
    updates: dict[str, Any] = {}
    for key, value in mapping.items():
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"{key}: unknown configuration key")
        if value is None:
            continue
        name = _KEY_TO_FIELD[key]
        updates[name] = _coerce(name, value)
    try:
        cfg = replace(cfg, **updates)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path: str | None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """Load a JSON config file (optional) and apply flag overrides on top."""
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
        cfg = from_mapping(data, cfg)
    if overrides:
        cfg = from_mapping(overrides, cfg)
    return cfg.validate()
