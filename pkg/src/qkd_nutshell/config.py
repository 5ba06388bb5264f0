"""Experiment configuration: JSON documents validated against a per-experiment schema."""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path
from typing import Any

from .attacks import ClonerSpec
from .noise import channel_from_config


class ConfigError(ValueError):
    """A configuration value or key is invalid; the message names the key."""


def _num(lo=None, hi=None, integer=False):
    def check(key, v):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"{key}: expected a number, got {v!r}")
        if integer and int(v) != v:
            raise ConfigError(f"{key}: expected an integer, got {v!r}")
        if lo is not None and v < lo:
            raise ConfigError(f"{key}: must be >= {lo}")
        if hi is not None and v > hi:
            raise ConfigError(f"{key}: must be <= {hi}")
        return int(v) if integer else float(v)
    return check


def _opt(check):
    def inner(key, v):
        return None if v is None else check(key, v)
    return inner


def _bool(key, v):
    if not isinstance(v, bool):
        raise ConfigError(f"{key}: expected true or false")
    return v


def _str(*choices):
    def check(key, v):
        if not isinstance(v, str) or (choices and v not in choices):
            raise ConfigError(f"{key}: expected one of {list(choices)}, got {v!r}")
        return v
    return check


def _list(item):
    def check(key, v):
        if not isinstance(v, list) or not v:
            raise ConfigError(f"{key}: expected a non-empty list")
        return [item(f"{key}[{i}]", x) for i, x in enumerate(v)]
    return check


def _channel(key, v):
    if v is None:
        return None
    try:
        if isinstance(v, list):
            return [channel_from_config(c) for c in v]
        return channel_from_config(v)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _attack(key, v):
    if v is None:
        return None
    if not isinstance(v, dict):
        raise ConfigError(f"{key}: expected an object")
    try:
        return ClonerSpec.from_config(v)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _model(key, v):
    if not isinstance(v, dict) or v.get("type") not in ("detector", "quench", "pump"):
        raise ConfigError(f"{key}: expected an object with type detector, quench or pump")
    allowed = {"detector": {"bright_rate", "dark_rate", "threshold", "spam_floor"},
               "quench": {"tau", "p_dark0"}, "pump": {"tau", "p_dark0"}}[v["type"]]
    unknown = set(v) - allowed - {"type"}
    if unknown:
        raise ConfigError(f"{key}.{sorted(unknown)[0]}: unknown key")
    return v


_COMMON = {
    "experiment": (_str(), None),
    "seed": (_num(0, integer=True), 0),
    "label": (_opt(_str()), None),
}

SCHEMAS: dict[str, dict[str, tuple]] = {
    "bb84": {
        "rounds": (_num(1, integer=True), 4000),
        "attack": (_attack, None),
        "channel": (_channel, None),
        "p_d": (_opt(_num(0, 1)), None),
    },
    "qcl": {
        "alpha": (_num(1e-12), 10.0),
        "f": (_num(0.5, 1), 0.85),
        "shots_per_eval": (_num(1, integer=True), 500),
        "max_iterations": (_num(1, integer=True), 30),
        "theta0": (_num(0, math.pi), math.pi / 2),
    },
    "qec422": {
        "channel": (_channel, None),
        "p_d": (_opt(_num(0, 1)), None),
        "m_values": (_list(_num(0, integer=True)), [0, 1, 2, 3, 4, 5, 6]),
        "shots": (_num(1, integer=True), 10 ** 6),
        "lambda": (_num(1e-12), 1.0),
        "exact": (_bool, False),
    },
    "qec422-scaling": {
        "lambdas": (_list(_num(1e-12)), [0.01, 0.0215, 0.0464, 0.1, 0.215, 0.464, 1.0]),
        "p": (_num(0, 1), 0.1),
        "p_d": (_num(0, 1), 0.01),
        "circuit_noise": (_bool, False),
        "channel_kind": (_str("bitflip", "depolarizing"), "bitflip"),
        "shots": (_num(1, integer=True), 10 ** 6),
        "exact": (_opt(_bool), None),
    },
    "steane-monitor": {
        "channel": (_channel, None),
        "p_d": (_opt(_num(0, 1)), None),
        "rounds_max": (_num(1, 6, integer=True), 3),
        "shots": (_num(1, integer=True), 10 ** 6),
        "flip_rates": (_bool, True),
    },
    "sidechannel": {
        "model": (_model, None),
        "durations_us": (_list(_num(0)), [0.0, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0]),
        "inject": (_opt(_num(0)), None),
        "rounds": (_num(1, integer=True), 10000),
    },
}
SCHEMAS["bbm92"] = dict(SCHEMAS["bb84"])

COUNT_KEY = {"bb84": "rounds", "bbm92": "rounds", "sidechannel": "rounds", "qcl": "shots_per_eval",
             "qec422": "shots", "qec422-scaling": "shots", "steane-monitor": "shots"}

# sweep name -> dotted config path
SWEEP_ALIASES = {"theta": "attack.theta", "psi": "attack.psi", "phi": "attack.phi", "p": "channel.p"}


def load(path: str | Path) -> dict[str, Any]:
    """Read a config or a run manifest (whose ``config`` entry is used)."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if "tool_version" in raw and isinstance(raw.get("config"), dict):
        raw = raw["config"]
    return raw


def validate(raw: dict[str, Any]) -> dict[str, Any]:
    """Return a copy with defaults filled in; parsed objects live under ``_parsed``."""
    exp = raw.get("experiment")
    if exp not in SCHEMAS:
        raise ConfigError(f"experiment: expected one of {sorted(SCHEMAS)}, got {exp!r}")
    schema = {**_COMMON, **SCHEMAS[exp]}
    for key in raw:
        if key not in schema:
            raise ConfigError(f"{key}: unknown key for experiment {exp!r}")
    cfg: dict[str, Any] = {}
    parsed: dict[str, Any] = {}
    for key, (check, default) in schema.items():
        value = copy.deepcopy(raw.get(key, default))
        cfg[key] = value
        parsed[key] = None if value is None else check(key, value)
    if exp == "sidechannel" and parsed["model"] is None:
        raise ConfigError("model: required for the sidechannel experiment")
    cfg["_parsed"] = parsed
    return cfg


def public(cfg: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in cfg.items() if not k.startswith("_")}


def set_path(raw: dict[str, Any], path: str, value: Any) -> dict[str, Any]:
    """Copy of ``raw`` with the dotted ``path`` set to ``value``."""
    out = copy.deepcopy(raw)
    node = out
    parts = path.split(".")
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            raise ConfigError(f"{path}: no such parameter in this config")
        node = node[p]
    node[parts[-1]] = value
    return out


def sweep_path(raw: dict[str, Any], name: str) -> str:
    """Resolve a sweep parameter to a dotted path that holds a number in ``raw``."""
    path = SWEEP_ALIASES.get(name, name)
    exp = raw.get("experiment")
    schema = {**_COMMON, **SCHEMAS.get(exp, {})}
    head = path.split(".")[0]
    if head not in schema or head in ("experiment", "label"):
        raise ConfigError(f"{name}: parameter is not sweepable for {exp!r}")
    if "." in path:
        node: Any = raw
        for p in path.split("."):
            if not isinstance(node, dict) or p not in node:
                raise ConfigError(f"{name}: parameter is not sweepable (missing {path})")
            node = node[p]
        if isinstance(node, bool) or not isinstance(node, (int, float)):
            raise ConfigError(f"{name}: parameter is not numeric")
    else:
        default = schema[head][1]
        current = raw.get(head, default)
        if isinstance(current, (list, dict, bool, str)):
            raise ConfigError(f"{name}: parameter is not sweepable")
    return path
