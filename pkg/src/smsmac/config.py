"""INI-style experiment configuration with ``[channel]`` and ``[protocol]`` sections."""

from __future__ import annotations

import configparser
import hashlib
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .channel import (
    HEXAGON_ORDER,
    AdditiveSymmetricMac,
    ComplexGaussianMac,
    DiscreteMac,
    MacModel,
    RealGaussianMac,
)
from .simproto import DEFAULT_CAP, ProtocolConfig

__all__ = ["ConfigError", "load_config", "bundled_configs", "channel_from_section",
           "protocol_from_sections", "config_hash"]

CHANNEL_KINDS = ("real-gaussian", "complex-gaussian", "additive", "discrete")


class ConfigError(ValueError):
    pass


def bundled_configs() -> list[str]:
    root = resources.files("smsmac") / "configs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def _resolve(path: str | Path) -> str:
    p = Path(path)
    if p.exists():
        return p.read_text()
    name = str(path)
    name = name[:-4] if name.endswith(".ini") else name
    if name in bundled_configs():
        return (resources.files("smsmac") / "configs" / f"{name}.ini").read_text()
    raise ConfigError(f"config {path!s} not found (bundled: {', '.join(bundled_configs())})")


def load_config(path: str | Path) -> dict:
    """Parse a config file (or bundled config name) into plain section dicts."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(_resolve(path))
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return {name: dict(parser[name]) for name in parser.sections()}


def _num(section: dict, key: str, cast=float, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return default
    try:
        return cast(section[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {section[key]!r}") from exc


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def channel_from_section(section: dict) -> MacModel:
    # configparser lower-cases keys, so the amplitude E arrives as "e"
    kind = section.get("kind", "").strip()
    try:
        if kind == "real-gaussian":
            return RealGaussianMac(_num(section, "e"), _num(section, "v", default=1.0),
                                   _num(section, "p", int), _num(section, "c", int))
        if kind == "complex-gaussian":
            order = tuple(int(x) for x in _floats(section["order"])) if "order" in section else HEXAGON_ORDER
            return ComplexGaussianMac(_num(section, "e"), _num(section, "v", default=1.0),
                                      _num(section, "c", int), order)
        if kind == "additive":
            q, l, c = _num(section, "q", int), _num(section, "l", int, 1), _num(section, "c", int)
            noise = _floats(section["noise"]) if "noise" in section else [1.0] + [0.0] * (q**l - 1)
            return AdditiveSymmetricMac(noise, q, l, c)
        if kind == "discrete":
            q, c, ny = _num(section, "q", int), _num(section, "c", int), _num(section, "ny", int)
            table = np.array(_floats(section["table"])).reshape((q,) * c + (ny,))
            return DiscreteMac(table, q)
    except ConfigError:
        raise
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid channel block: {exc}") from exc
    raise ConfigError(f"channel kind must be one of {', '.join(CHANNEL_KINDS)}, got {kind!r}")


def protocol_from_sections(cfg: dict, seed: int | None = None) -> ProtocolConfig:
    if "protocol" not in cfg or "channel" not in cfg:
        raise ConfigError("simulation needs [protocol] and [channel] sections")
    p = cfg["protocol"]
    mac = channel_from_section(cfg["channel"])
    try:
        return ProtocolConfig(
            q=_num(p, "q", int), l=_num(p, "l", int, 1), n=_num(p, "n", int),
            k=_num(p, "k", int), kprime=_num(p, "kprime", int), c=_num(p, "c", int),
            channel=mac,
            trials=_num(p, "trials", int, 10_000),
            seed=_num(p, "seed", int, 0) if seed is None else seed,
            leak_samples=_num(p, "leak_samples", int, 10_000),
            cap=_num(p, "cap", int, DEFAULT_CAP),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]
