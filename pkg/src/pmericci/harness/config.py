"""Run configuration: sectioned INI text plus ``section.key=value`` overrides."""
from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from ..errors import UsageError

# section -> key -> (type, default); None default means "unset"
SCHEMA: dict[str, dict[str, tuple[type, Any]]] = {
    "model": {"kind": (str, "circle"), "N": (int, 128), "L": (float, 2.0 * math.pi),
              "r0": (float, 2.0)},
    "pme": {"m": (float, 2.0)},
    "family": {"name": (str, "liyau"), "alpha": (float, 2.0), "theta": (float, 1.0),
               "c": (float, 1.0), "phi_scale": (float, 2.0), "table": (str, None),
               "K": (float, None)},
    "initial": {"profile": (str, "sine"), "c": (float, None), "a": (float, None),
                "k": (float, None), "base": (float, None), "amplitude": (float, None),
                "width": (float, None), "center": (float, None), "t0": (float, None),
                "mass": (float, None), "modes": (int, None), "seed": (int, 0),
                "file": (str, None), "column": (str, "v")},
    "time": {"start": (float, 0.0), "end": (float, 1.0), "snapshots": (str, "0.05:1:0.05"),
             "safety": (float, 0.2)},
    "estimate": {"R": (str, "global"), "C": (str, "calibrate"), "mode": (str, "auto"),
                 "center": (float, 0.0)},
    "lemma": {"enabled": (bool, False), "form": (str, "stated"), "tol": (float, 0.0)},
    "cutoff": {"enabled": (bool, False), "R": (float, 1.0), "t": (float, 0.0),
               "center": (float, 0.0), "C_chi": (float, 32.0)},
    "convergence": {"target": (str, "auto"), "resolutions": (str, "64,128,256"),
                    "end": (float, 0.5), "min_order": (float, 1.9)},
    "output": {"dir": (str, None), "prefix": (str, "run"), "format": (str, "csv")},
    "sweep": {"axes": (str, ""), "cap": (int, 10_000)},
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(section: str, key: str, raw: Any):
    typ, _ = SCHEMA[section][key]
    if raw is None:
        return None
    if isinstance(raw, str):
        raw = raw.strip()
        if raw.lower() in ("", "none") and typ is not str:
            return None
    try:
        if typ is bool:
            if isinstance(raw, bool):
                return raw
            low = str(raw).lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if typ is int:
            f = float(raw)
            if f != int(f):
                raise ValueError(raw)
            return int(f)
        if typ is float:
            return float(raw)
        return str(raw)
    except (TypeError, ValueError):
        raise UsageError(f"[{section}] {key} = {raw!r} is not a valid {typ.__name__}") from None


def parse_override(text: str) -> tuple[str, str, str]:
    """``section.key=value`` -> (section, key, value)."""
    if "=" not in text:
        raise UsageError(f"override {text!r} must look like section.key=value")
    lhs, value = text.split("=", 1)
    if "." not in lhs:
        raise UsageError(f"override {text!r} must name a section: section.key=value")
    section, key = lhs.strip().split(".", 1)
    return section.strip(), key.strip(), value.strip()


def _check_key(section: str, key: str) -> None:
    if section not in SCHEMA:
        raise UsageError(f"unknown config section [{section}]")
    if key not in SCHEMA[section]:
        raise UsageError(f"unknown key {key!r} in [{section}]; known: {sorted(SCHEMA[section])}")


def parse_time_list(spec: str) -> list[float]:
    """``a:b:step`` (inclusive) or a comma-separated list."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError(f"range {spec!r} must be start:stop:step")
        a, b, d = (float(p) for p in parts)
        if not d > 0 or b < a:
            raise UsageError(f"range {spec!r} is empty")
        n = int(math.floor((b - a) / d + 1e-9)) + 1
        return [float(x) for x in np.round(a + d * np.arange(n), 12)]
    try:
        return [float(p) for p in spec.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse time list {spec!r}") from None


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully typed configuration.  ``values[section][key]``."""

    values: Mapping[str, Mapping[str, Any]]

    def __getitem__(self, section: str) -> Mapping[str, Any]:
        return self.values[section]

    def get(self, dotted: str):
        section, key = dotted.split(".", 1)
        return self.values[section][key]

    def with_overrides(self, overrides: Iterable[str] | Mapping[str, Any]) -> "RunConfig":
        raw = {s: dict(kv) for s, kv in self.values.items()}
        items = overrides.items() if isinstance(overrides, Mapping) else (
            ((s + "." + k), v) for s, k, v in map(parse_override, overrides))
        for dotted, value in items:
            section, key = dotted.split(".", 1)
            _check_key(section, key)
            raw[section][key] = value
        return RunConfig.from_mapping(raw)

    @classmethod
    def from_mapping(cls, raw: Mapping[str, Mapping[str, Any]]) -> "RunConfig":
        out: dict[str, dict[str, Any]] = {}
        for section, keys in SCHEMA.items():
            given = dict(raw.get(section, {}))
            for key in given:
                _check_key(section, key)
            out[section] = {k: _convert(section, k, given[k]) if k in given else default
                            for k, (_, default) in keys.items()}
        for section in raw:
            if section not in SCHEMA:
                raise UsageError(f"unknown config section [{section}]")
        cfg = cls(out)
        cfg.validate()
        return cfg

    @classmethod
    def default(cls) -> "RunConfig":
        return cls.from_mapping({})

    # -- derived values ----------------------------------------------------
    @property
    def snapshot_times(self) -> list[float]:
        return parse_time_list(self["time"]["snapshots"])

    @property
    def radius(self) -> float | None:
        r = self["estimate"]["R"].strip().lower()
        if r in ("global", "none", ""):
            return None
        try:
            return float(r)
        except ValueError:
            raise UsageError(f"[estimate] R must be a number or 'global', got {r!r}") from None

    @property
    def constant(self) -> float | None:
        c = self["estimate"]["C"].strip().lower()
        if c in ("calibrate", "none", ""):
            return None
        try:
            return float(c)
        except ValueError:
            raise UsageError(f"[estimate] C must be a number or 'calibrate', got {c!r}") from None

    @property
    def resolutions(self) -> list[int]:
        try:
            return [int(x) for x in self["convergence"]["resolutions"].split(",") if x.strip()]
        except ValueError:
            raise UsageError("[convergence] resolutions must be integers") from None

    def validate(self) -> None:
        model, time, est = self["model"], self["time"], self["estimate"]
        if model["kind"] not in ("circle", "torus", "sphere"):
            raise UsageError(f"[model] kind must be circle, torus or sphere, got {model['kind']!r}")
        if model["N"] < 16:
            raise UsageError("[model] N must be at least 16")
        if not model["L"] > 0 or not model["r0"] > 0:
            raise UsageError("[model] L and r0 must be positive")
        if not self["pme"]["m"] > 1:
            raise UsageError("[pme] m must exceed 1")
        if self["family"]["name"] not in ("liyau", "hamilton", "lixu", "linear_lixu", "sampled"):
            raise UsageError(f"[family] unknown name {self['family']['name']!r}")
        if self["family"]["name"] == "sampled" and not self["family"]["table"]:
            raise UsageError("[family] sampled family needs table = path")
        if not time["end"] > time["start"] >= 0:
            raise UsageError("[time] need 0 <= start < end")
        snaps = self.snapshot_times
        if not snaps or min(snaps) < time["start"] or max(snaps) > time["end"] + 1e-12:
            raise UsageError(f"[time] snapshots must lie in [{time['start']}, {time['end']}]")
        if not 0 < time["safety"] <= 1:
            raise UsageError("[time] safety must lie in (0, 1]")
        r, c = self.radius, self.constant
        if r is not None and not r > 0:
            raise UsageError("[estimate] R must be positive")
        if c is not None and not c > 0:
            raise UsageError("[estimate] C must be positive")
        if est["mode"] not in ("auto", "thm21a", "thm21b", "corollary"):
            raise UsageError(f"[estimate] unknown mode {est['mode']!r}")
        if self["lemma"]["form"] not in ("stated", "sign_free"):
            raise UsageError("[lemma] form must be stated or sign_free")
        if self["output"]["format"] not in ("csv", "json"):
            raise UsageError("[output] format must be csv or json")
        if self["sweep"]["cap"] < 1:
            raise UsageError("[sweep] cap must be positive")
        if len(self.resolutions) < 3:
            raise UsageError("[convergence] needs at least three resolutions")

    def canonical(self) -> dict:
        """Plain nested dict (run-relevant sections only) for hashing and reports."""
        skip = {"output", "sweep"}
        return {s: dict(sorted(kv.items())) for s, kv in sorted(self.values.items())
                if s not in skip}

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def load_config(path: str | Path | None = None, overrides: Iterable[str] = ()) -> RunConfig:
    """Read an INI file (optional) and apply ``section.key=value`` overrides."""
    raw: dict[str, dict[str, str]] = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str  # keep key case (N, L, R, C)
        try:
            with Path(path).open() as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise UsageError(f"{path}: {exc}") from exc
        except configparser.Error as exc:
            raise UsageError(f"{path}: malformed config: {exc}") from exc
        raw = {s: dict(parser[s]) for s in parser.sections()}
    for section, key, value in map(parse_override, overrides):
        _check_key(section, key)
        raw.setdefault(section, {})[key] = value
    return RunConfig.from_mapping(raw)
