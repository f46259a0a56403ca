"""Scenario configuration: an INI file with a single ``[params]`` section.

Keys (all optional; each scenario supplies defaults)::

    eps       = 1/10, 1/4          rationals > 0, comma separated
    g         = const:0 linear:2   counterexample descriptors, whitespace separated
    horizon   = 2000               integer in [1, 10**7]
    backend   = exact | float      must be one the scenario supports
    tol       = 1e-9               rational or decimal >= 0
    seed      = 0                  integer >= 0
    count     = 100                integer in [1, 10**6]
    scan_cap  = 100000             integer in [1, 10**8]

Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any

from ..seqcore import Counterexample, parse_g

KEYS = ("eps", "g", "horizon", "backend", "tol", "seed", "count", "scan_cap")
LIMITS = {"horizon": (1, 10**7), "seed": (0, 2**63), "count": (1, 10**6), "scan_cap": (1, 10**8)}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    eps: tuple[Fraction, ...] = ()
    g: tuple[str, ...] = ()
    horizon: int | None = None
    backend: str | None = None
    tol: Fraction | None = None
    seed: int | None = None
    count: int | None = None
    scan_cap: int | None = None

    def gs(self) -> list[Counterexample]:
        return [parse_g(s) for s in self.g]

    def with_defaults(self, **defaults: Any) -> "ScenarioConfig":
        """Fill unset fields from ``defaults``."""
        filled = {k: v for k, v in defaults.items() if getattr(self, k) in (None, ())}
        return replace(self, **filled)

    def to_dict(self) -> dict[str, Any]:
        return {
            "eps": [str(e) for e in self.eps],
            "g": list(self.g),
            "horizon": self.horizon,
            "backend": self.backend,
            "tol": None if self.tol is None else str(self.tol),
            "seed": self.seed,
            "count": self.count,
            "scan_cap": self.scan_cap,
        }


def _int(key: str, text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None
    lo, hi = LIMITS[key]
    if not lo <= v <= hi:
        raise ConfigError(f"{key}: {v} outside [{lo}, {hi}]")
    return v


def _rational(key: str, text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: expected a rational, got {text!r}") from None


def parse_params(scenario: str, params: dict[str, str]) -> ScenarioConfig:
    values: dict[str, Any] = {}
    for key, text in params.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}; allowed: {', '.join(KEYS)}")
        if key == "eps":
            eps = tuple(_rational(key, t) for t in text.split(",") if t.strip())
            if not eps or any(e <= 0 for e in eps):
                raise ConfigError("eps: need one or more positive rationals")
            values[key] = eps
        elif key == "g":
            gs = tuple(text.replace(";", " ").split())
            for s in gs:
                try:
                    parse_g(s)
                except ValueError as err:
                    raise ConfigError(f"g: {err}") from None
            if not gs:
                raise ConfigError("g: need at least one descriptor")
            values[key] = gs
        elif key == "backend":
            if text.strip() not in ("exact", "float"):
                raise ConfigError(f"backend: expected exact or float, got {text!r}")
            values[key] = text.strip()
        elif key == "tol":
            tol = _rational(key, text)
            if tol < 0:
                raise ConfigError("tol must be nonnegative")
            values[key] = tol
        else:
            values[key] = _int(key, text)
    return ScenarioConfig(scenario, **values)


def load_config(scenario: str, path: str | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig(scenario)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case sensitive
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    extra = [s for s in parser.sections() if s != "params"]
    if parser.defaults():
        extra.append(parser.default_section)
    if extra:
        raise ConfigError(f"unknown section(s) {extra}; only [params] is allowed")
    params = dict(parser["params"]) if parser.has_section("params") else {}
    return parse_params(scenario, params)
