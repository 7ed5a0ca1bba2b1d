"""Run configuration: INI-style files with one section per subcommand.

Keys in ``[DEFAULT]`` apply to every subcommand; keys in ``[sweep]`` etc.
apply to that subcommand only. Command-line flags of the same name
(``z-range`` or ``z_range``) override both.

Example::

    [DEFAULT]
    preset = table1
    rate-scope = eq1

    [sweep]
    L = 8,12,16,20
    delta = 0,0.05
    z-range = 0:160:5
    out = fig1.csv
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import PRESETS
from .errors import ConfigError, DomainError
from .keyrate import RATE_SCOPES
from .optimizer import SearchConfig

SUBCOMMANDS = ("keyrate", "optimize", "sweep", "verify")


@dataclass
class RunConfig:
    preset: str = "table1"
    L: list[int] = field(default_factory=lambda: [16])
    delta: list[float] = field(default_factory=lambda: [0.05])
    z: list[float] = field(default_factory=lambda: [30.0])
    fixed_intensities: tuple[float, float, float, float] | None = None
    search: SearchConfig = field(default_factory=SearchConfig)
    out: str | None = None
    seed: int = 0
    rate_scope: str = "eq1"
    workers: int = 1
    patterns: int = 100
    pattern_length: int = 64
    mutate: str | None = None

    @property
    def optimize(self) -> bool:
        return self.fixed_intensities is None

    def single_point(self) -> tuple[int, float, float]:
        if len(self.L) != 1 or len(self.delta) != 1 or len(self.z) != 1:
            raise ConfigError("this subcommand needs exactly one L, one delta and one z")
        return self.L[0], self.delta[0], self.z[0]


def _norm(key: str) -> str:
    key = key.strip().replace("-", "_")
    return "L" if key.lower() == "l" else key


def _floats(text: str, key: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise ConfigError(f"{key}: empty list")
    if not all(math.isfinite(v) for v in values):
        raise ConfigError(f"{key}: values must be finite")
    return values


def parse_z_range(text: str) -> list[float]:
    """``start:stop:step`` with both ends included."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"z_range: expected start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"z_range: non-numeric field in {text!r}") from None
    if not step > 0:
        raise ConfigError(f"z_range: step must be > 0, got {step}")
    if stop < start:
        raise ConfigError(f"z_range: empty range {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [float(v) for v in np.round(start + step * np.arange(n), 10)]


def _apply(cfg: RunConfig, search: dict, key: str, value: str, origin: str) -> None:
    where = f"{origin}: {key}"
    try:
        if key == "preset":
            if value not in PRESETS:
                raise ConfigError(f"{where}: unknown preset {value!r}")
            cfg.preset = value
        elif key == "L":
            cfg.L = [int(v) for v in _floats(value, where)]
            if any(v < 2 for v in cfg.L):
                raise ConfigError(f"{where}: train length must be >= 2")
        elif key == "delta":
            cfg.delta = _floats(value, where)
            if any(not 0.0 <= d < 1.0 for d in cfg.delta):
                raise ConfigError(f"{where}: delta must lie in [0, 1)")
        elif key == "z":
            cfg.z = _floats(value, where)
            if any(v < 0 for v in cfg.z):
                raise ConfigError(f"{where}: distances must be >= 0")
        elif key == "z_range":
            cfg.z = parse_z_range(value)
            if any(v < 0 for v in cfg.z):
                raise ConfigError(f"{where}: distances must be >= 0")
        elif key == "fixed_intensities":
            if value.strip().lower() in ("", "none", "optimize"):
                cfg.fixed_intensities = None
            else:
                vals = _floats(value, where)
                if len(vals) != 4:
                    raise ConfigError(f"{where}: need four intensities mu,nu1,nu2,nu3")
                cfg.fixed_intensities = tuple(vals)
        elif key == "out":
            cfg.out = value or None
        elif key == "rate_scope":
            if value not in RATE_SCOPES:
                raise ConfigError(f"{where}: must be one of {RATE_SCOPES}")
            cfg.rate_scope = value
        elif key == "mutate":
            cfg.mutate = value or None
        elif key in ("seed", "workers", "patterns", "pattern_length"):
            setattr(cfg, key, int(value))
            if key != "seed" and getattr(cfg, key) < 1:
                raise ConfigError(f"{where}: must be >= 1")
        elif key in ("resolution", "rounds", "multistart"):
            search[key] = int(value)
        else:
            raise ConfigError(f"{where}: unknown key")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: invalid value {value!r}") from None


def load_config(
    path: str | None,
    subcommand: str,
    overrides: dict[str, str] | None = None,
    defaults: dict[str, str] | None = None,
) -> RunConfig:
    """Merge built-in defaults, per-command ``defaults``, the config file and
    flag overrides, later sources winning."""
    cfg = RunConfig()
    search: dict = {}
    for key, value in (defaults or {}).items():
        _apply(cfg, search, _norm(key), value, "defaults")
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
        for section in parser.sections():
            if section not in SUBCOMMANDS:
                raise ConfigError(f"{path}: unknown section [{section}]")
        items = dict(parser.defaults())
        if parser.has_section(subcommand):
            items.update({k: v for k, v in parser.items(subcommand)})
        for raw_key, value in items.items():
            _apply(cfg, search, _norm(raw_key), value.strip(), f"{path} [{subcommand}]")
    for key, value in (overrides or {}).items():
        if value is not None:
            _apply(cfg, search, _norm(key), str(value), "command line")
    if search or cfg.seed:
        try:
            cfg.search = SearchConfig(seed=cfg.seed, **search)
        except DomainError as exc:
            raise ConfigError(f"search: {exc}") from None
    return cfg
