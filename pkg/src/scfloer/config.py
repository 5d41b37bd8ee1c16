"""Experiment configuration: flat dotted-key text (TOML), strict schema.

Every key has a default (the acceptance-suite values below); unknown
sections or keys are rejected with field-level diagnostics, and a config
round-trips losslessly through :func:`dump_config` / :func:`load_config`.
"""

from __future__ import annotations

import copy
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

__all__ = ["ConfigError", "DEFAULTS", "load_config", "loads_config", "dump_config",
           "validate_config"]


class ConfigError(ValueError):
    pass


DEFAULTS: dict = {
    "run": {"seed": 0},
    "scales": {
        "s_max": 12.0, "n_s": 481, "n_t": 8,
        "deltas": [0.5, 1.5, 2.5], "R_values": [2.0, 4.0, 6.0],
    },
    "linop": {
        "n_t_loop": 17, "levels": [0, 1, 2], "n_translation": 256,
        "h_list": [0.1, 0.05, 0.02, 0.01],
    },
    "floer": {
        "s_max": 6.0, "n_s": 241, "n_t": 8, "a": 1.0, "eps": 0.05,
        "amplitude": 0.001, "tol": 1e-12,
    },
    "glue": {
        "s_max": 80.0, "n_s": 3201, "n_t": 32, "R_values": [45.0, 55.0, 70.0],
    },
    "dphi": {
        "s_max": 97.5, "n_s": 391, "n_t": 4, "a": 0.3, "eps": 0.05,
        "amp1": 0.3, "amp2": 0.25, "decay": 0.25, "R": 45.0,
    },
    "iia": {
        "s_max": 101.0, "n_s": 809, "n_t": 4, "a": 1.0, "eps": 0.05,
        "deltas": [0.1, 0.2, 0.3], "delta_cap": 0.5, "m": 1,
        "sizes": [0.02, 0.01, 0.005, 0.002], "R_values": [45.0, 50.0],
        "n_probes": 4,
    },
    "iib": {
        "s_max": 176.0, "n_s": 705, "n_t": 4, "a": 0.3, "eps": 0.05,
        "deltas": [0.05, 0.1, 0.15], "delta_cap": 0.25,
        "amp1": 0.4, "amp2": 0.35, "decay": 0.25, "m": 1,
        "R_values": [45.0, 50.0, 55.0, 60.0, 65.0, 70.0, 75.0], "n_probes": 4,
    },
    "index": {
        "s_max": 152.0, "n_s": 305, "n_t": 4, "a": 1.0,
        "deltas": [0.1, 0.2], "delta_cap": 0.5,
        "R_values": [45.0, 60.0, 100.0], "level": 0,
    },
    "germ": {
        "s_max": 97.0, "n_s": 389, "n_t": 4, "a": 1.0, "eps": 0.05,
        "deltas": [0.1, 0.2, 0.3], "delta_cap": 0.5, "R0": 46.0,
        "levels": [1, 2], "r_range_rel": 0.02,
        "syn_amp": 0.0005, "syn_decay": 0.25,
    },
    "contraction": {
        "radii": [0.001, 0.0005, 0.00025, 0.000125], "n_samples": 8,
    },
    "picard": {"v_abs": 0.001, "tol": 1e-13, "trace_samples": 6},
}


def _check_value(section: str, key: str, default, value):
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"[{section}] {key}: expected a list, got {type(value).__name__}")
        return [float(v) if isinstance(default[0], float) else int(v) for v in value]
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"[{section}] {key}: expected a boolean")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"[{section}] {key}: expected an integer")
        if isinstance(value, float) and value != int(value):
            raise ConfigError(f"[{section}] {key}: expected an integer, got {value}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"[{section}] {key}: expected a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"[{section}] {key}: expected a string")
        return value
    raise ConfigError(f"[{section}] {key}: unsupported schema type")


def validate_config(data: dict) -> dict:
    """Merge onto the defaults, rejecting unknown sections/keys (fail fast)."""
    cfg = copy.deepcopy(DEFAULTS)
    problems = []
    for section, content in data.items():
        if section not in DEFAULTS:
            problems.append(f"unknown section [{section}]")
            continue
        if not isinstance(content, dict):
            problems.append(f"[{section}] must be a table")
            continue
        for key, value in content.items():
            if key not in DEFAULTS[section]:
                problems.append(f"unknown key [{section}] {key}")
                continue
            try:
                cfg[section][key] = _check_value(section, key, DEFAULTS[section][key], value)
            except ConfigError as exc:
                problems.append(str(exc))
    if problems:
        raise ConfigError("; ".join(problems))
    return cfg


def loads_config(text: str) -> dict:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    return validate_config(data)


def load_config(path) -> dict:
    return loads_config(Path(path).read_text())


def _fmt_toml(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, list):
        return "[" + ", ".join(_fmt_toml(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize {value!r}")


def dump_config(cfg: dict) -> str:
    lines = []
    for section in DEFAULTS:
        lines.append(f"[{section}]")
        for key in DEFAULTS[section]:
            lines.append(f"{key} = {_fmt_toml(cfg[section][key])}")
        lines.append("")
    return "\n".join(lines)
