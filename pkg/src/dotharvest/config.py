"""Run configuration: key = value sections, strict validation, line-accurate
error reporting."""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

from .model import EngineParams, ParameterError

COMMANDS = ("steady", "sweep", "correlations", "oscillation-search",
            "trajectories", "cycles", "ldf", "semistoch")

#: engine-section keys and their casting
_ENGINE_KEYS = {
    "eps_w": float, "eps_h": float, "coulomb_u": float, "delta_mu": float,
    "temp_w": float, "temp_h": float, "gamma_base": float, "gamma_h": float,
    "x": float,
}
_RUN_KEYS = {"command": str, "output_dir": str, "base_seed": int, "threads": int}
_ENSEMBLE_KEYS = {"n_traj": int, "duration": float}
_SWEEP_KEYS = {"delta_mu_min": float, "delta_mu_max": float, "n_points": int}
_LDF_KEYS = {"n_lambda": int, "n_xi": int}
_CORR_KEYS = {"n_tau": int, "tau_max": float}
_OSC_KEYS = {"seed": int}
_SEMI_KEYS = {"n_traj": int, "duration": float}

_SECTION_KEYS = {
    "engine": _ENGINE_KEYS, "run": _RUN_KEYS, "ensemble": _ENSEMBLE_KEYS,
    "sweep": _SWEEP_KEYS, "ldf": _LDF_KEYS, "correlations": _CORR_KEYS,
    "oscillation": _OSC_KEYS, "semistoch": _SEMI_KEYS,
}

DEFAULT_CONFIG = """\
# Reference operating point of the engine (all energies in units of the bare
# tunnel rate, times in its inverse).
[engine]
eps_w = 0.0
eps_h = 0.0
coulomb_u = 5.0
delta_mu = 0.25
temp_w = 5.0
temp_h = 15.0
gamma_base = 1.0
gamma_h = 1.0
x = 0.9

[run]
command = steady
output_dir = out
base_seed = 15
threads = 1

[ensemble]
n_traj = 200
duration = 2000.0
"""


class ConfigError(ValueError):
    """Malformed, unknown or out-of-domain configuration entry."""


@dataclass(frozen=True)
class RunConfig:
    params: EngineParams
    command: str
    output_dir: str = "out"
    base_seed: int = 15
    threads: int = 1
    n_traj: int = 200
    duration: float = 2000.0
    options: dict = field(default_factory=dict)   # per-command extras


def _line_of(text: str, key: str) -> int:
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].split(";", 1)[0]
        if "=" in stripped and stripped.split("=", 1)[0].strip() == key:
            return i
    return 0


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document.

    Unknown sections or keys, type mismatches and domain violations raise
    :class:`ConfigError` naming the offending key and its line.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ConfigError(f"unparseable configuration: {exc}") from exc

    for section in cp.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        allowed = _SECTION_KEYS[section]
        for key, raw in cp.items(section):
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in [{section}] "
                                  f"(line {_line_of(text, key)})")

    def fetch(section: str, key: str, default=None):
        if not cp.has_option(section, key):
            if default is None:
                raise ConfigError(f"missing required key {key!r} in [{section}]")
            return default
        raw = cp.get(section, key)
        cast = _SECTION_KEYS[section][key]
        try:
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"key {key!r} (line {_line_of(text, key)}): "
                              f"cannot read {raw!r} as {cast.__name__}") from exc

    engine_kwargs = {}
    if cp.has_section("engine"):
        for key in _ENGINE_KEYS:
            if cp.has_option("engine", key):
                engine_kwargs[key] = fetch("engine", key)
    try:
        params = EngineParams(**engine_kwargs)
    except ParameterError as exc:
        bad = _blame_key(text, engine_kwargs, exc)
        raise ConfigError(f"domain violation for key {bad!r} "
                          f"(line {_line_of(text, bad)}): {exc}") from exc

    command = fetch("run", "command") if cp.has_section("run") else None
    if command is None:
        raise ConfigError("missing required key 'command' in [run]")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r} "
                          f"(line {_line_of(text, 'command')}); "
                          f"choose from {', '.join(COMMANDS)}")

    n_traj = fetch("ensemble", "n_traj", 200) if cp.has_section("ensemble") else 200
    duration = fetch("ensemble", "duration", 2000.0) if cp.has_section("ensemble") else 2000.0
    if n_traj < 1:
        raise ConfigError(f"domain violation for key 'n_traj' "
                          f"(line {_line_of(text, 'n_traj')}): need n_traj >= 1")
    if duration <= 0:
        raise ConfigError(f"domain violation for key 'duration' "
                          f"(line {_line_of(text, 'duration')}): need duration > 0")

    options = {}
    for section in ("sweep", "ldf", "correlations", "oscillation", "semistoch"):
        if cp.has_section(section):
            for key in _SECTION_KEYS[section]:
                if cp.has_option(section, key):
                    options[f"{section}.{key}"] = fetch(section, key)

    return RunConfig(
        params=params,
        command=command,
        output_dir=fetch("run", "output_dir", "out"),
        base_seed=fetch("run", "base_seed", 15),
        threads=fetch("run", "threads", 1),
        n_traj=n_traj,
        duration=duration,
        options=options,
    )


def _blame_key(text: str, kwargs: dict, exc: Exception) -> str:
    msg = str(exc)
    hints = {
        "temperatures": ("temp_w", "temp_h"),
        "tunnel rates": ("gamma_base", "gamma_h"),
        "suppression": ("x",),
        "coulomb_u": ("coulomb_u",),
    }
    for nugget, keys in hints.items():
        if nugget in msg:
            for k in keys:
                if k in kwargs:
                    return k
    return next(iter(kwargs), "engine")
