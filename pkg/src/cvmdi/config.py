"""Run configuration for the command-line front end.

Values are resolved in three layers: built-in defaults, then an optional JSON
file, then command-line flags.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, fields

from .channel import (
    DEFAULT_BETA,
    DEFAULT_EPS_A0,
    DEFAULT_EPS_A1,
    DEFAULT_EPS_B,
    DEFAULT_W,
    GAIN_MODES,
    LinkBudget,
    transmissivity_from_distance,
)
from .errors import CvmdiError
from .keyrate import ENGINES
from .states import DISPLACEMENT_CONVENTIONS, Family

CONFIG_ENV = "CVMDI_CONFIG"
SCENARIOS = ("keyrate", "fig2", "fig3", "fig4", "fig5")
FORMATS = ("csv", "json")
FIG5_MODES = ("fixed", "optimized")


class ConfigError(CvmdiError):
    """Invalid or unknown configuration; the CLI exits with status 2."""


@dataclass
class RunConfig:
    scenario: str = "keyrate"
    family: str = "tmsv"
    families: list | None = None
    V: float = 6.0
    d: float | None = None
    Ts: float | None = None
    L: float = 50.0
    Lbc: float = 0.0
    beta: float = DEFAULT_BETA
    w: float = DEFAULT_W
    eps_a0: float = DEFAULT_EPS_A0
    eps_a1: float = DEFAULT_EPS_A1
    eps_B: float = DEFAULT_EPS_B
    gain_mode: str = "li-optimal"
    gain: float | None = None
    K_target: float | None = None
    V_grid: list | None = None
    L_grid: list | None = None
    fig5_mode: str = "fixed"
    engine: str = "analytic"
    d_convention: str = "quadrature"
    cutoff_tol: float = 1e-8
    out: str | None = None
    format: str | None = None
    skip_bad_points: bool = False
    threads: int = 1

    def link(self) -> LinkBudget:
        T_B = transmissivity_from_distance(self.Lbc, self.w) if self.Lbc > 0 else 1.0
        return LinkBudget(
            L_AC=self.L,
            L_BC=self.Lbc,
            w=self.w,
            eps_fit_a0=self.eps_a0,
            eps_fit_a1=self.eps_a1,
            T_B=T_B,
            eps_B=self.eps_B,
            beta=self.beta,
        )

    def validate(self) -> "RunConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.scenario in SCENARIOS, f"scenario must be one of {SCENARIOS}")
        try:
            Family.parse(self.family)
            for fam in self.families or []:
                Family.parse(fam)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        need(self.families is None or len(self.families) > 0, "families must not be empty")
        need(_finite(self.V) and self.V >= 1.0, f"V must be >= 1, got {self.V}")
        need(self.d is None or (_finite(self.d) and self.d >= 0.0), f"d must be >= 0, got {self.d}")
        need(self.Ts is None or 0.0 <= self.Ts <= 1.0, f"Ts must lie in [0, 1], got {self.Ts}")
        need(_finite(self.L) and self.L >= 0.0, f"L must be >= 0, got {self.L}")
        need(_finite(self.Lbc) and self.Lbc >= 0.0, f"Lbc must be >= 0, got {self.Lbc}")
        need(0.0 < self.beta <= 1.0, f"beta must lie in (0, 1], got {self.beta}")
        need(self.w > 0.0, f"w must be > 0, got {self.w}")
        need(self.gain_mode in GAIN_MODES, f"gain_mode must be one of {GAIN_MODES}")
        need(self.gain_mode != "fixed" or (self.gain is not None and self.gain > 0),
             "gain_mode 'fixed' needs a positive gain")
        need(self.K_target is None or self.K_target >= 0.0, "K_target must be >= 0")
        for name in ("V_grid", "L_grid"):
            grid = getattr(self, name)
            need(grid is None or len(grid) > 0, f"{name} must not be empty")
        need(all(v >= 1.0 for v in self.V_grid or []), "V_grid values must be >= 1")
        need(all(v >= 0.0 for v in self.L_grid or []), "L_grid values must be >= 0")
        need(self.fig5_mode in FIG5_MODES, f"fig5_mode must be one of {FIG5_MODES}")
        need(self.engine in ENGINES, f"engine must be one of {ENGINES}")
        need(self.d_convention in DISPLACEMENT_CONVENTIONS,
             f"d_convention must be one of {DISPLACEMENT_CONVENTIONS}")
        need(self.cutoff_tol > 0.0, "cutoff_tol must be > 0")
        need(self.format is None or self.format in FORMATS, f"format must be one of {FORMATS}")
        need(isinstance(self.threads, int) and self.threads >= 1, "threads must be a positive integer")
        return self

    @property
    def output_format(self) -> str:
        """JSON for single key-rate evaluations, CSV for figure tables, unless set."""
        if self.format:
            return self.format
        return "json" if self.scenario == "keyrate" else "csv"

    def provenance(self) -> dict:
        """Resolved settings that determine the output (no paths or worker counts)."""
        skip = {"out", "threads"}
        return {k: v for k, v in dataclasses.asdict(self).items() if k not in skip}


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))

_FLOAT_FIELDS = {"V", "d", "Ts", "L", "Lbc", "beta", "w", "eps_a0", "eps_a1", "eps_B", "gain",
                 "K_target", "cutoff_tol"}
_LIST_FIELDS = {"families", "V_grid", "L_grid"}


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in _FLOAT_FIELDS:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if key in _LIST_FIELDS:
            if not isinstance(value, list):
                raise TypeError
            return [str(v) for v in value] if key == "families" else [float(v) for v in value]
        if key == "threads":
            if isinstance(value, bool) or int(value) != value:
                raise TypeError
            return int(value)
        if key == "skip_bad_points":
            if not isinstance(value, bool):
                raise TypeError
            return value
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {key}: {value!r}") from None


def load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    unknown = sorted(set(raw) - set(FIELD_NAMES))
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
    return {k: _coerce(k, v) for k, v in raw.items()}


def resolve_config(overrides: dict, config_path=None) -> RunConfig:
    """Merge defaults < JSON file < ``overrides`` (flags; None means unset)."""
    values = {}
    path = config_path or os.environ.get(CONFIG_ENV) or None
    if path:
        values.update(load_config_file(path))
    for key, value in overrides.items():
        if key not in FIELD_NAMES:
            raise ConfigError(f"unknown setting {key}")
        if value is not None:
            values[key] = _coerce(key, value)
    return RunConfig(**values).validate()


def parse_grid(text: str) -> list:
    """Parse ``"a,b,c"`` or ``"start:stop:num"`` (inclusive linspace) into floats."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must look like start:stop:num")
        try:
            start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"cannot parse grid {text!r}") from None
        if num < 1:
            return []
        if num == 1:
            return [start]
        step = (stop - start) / (num - 1)
        return [start + i * step for i in range(num)]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse grid {text!r}") from None


__all__ = [
    "RunConfig",
    "ConfigError",
    "resolve_config",
    "load_config_file",
    "parse_grid",
    "CONFIG_ENV",
]
