"""Flat ``key = value`` experiment configs with dotted keys.

Example::

    # direction recovery sweep
    dictionary.construction = random
    dictionary.n = 32
    dictionary.N = 48
    signal.class = synthesis
    signal.s = 2
    measure.m = 250, 500, 1000
    algorithms = lp_direction, ht_direction
    trials = 50
    seed = 2024

Blank lines and ``#`` comments are ignored.  Lists are comma separated.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..recover import ALGORITHMS, FULL_ALGORITHMS

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "PropsConfig",
    "parse_pairs",
    "parse_config",
    "parse_props_config",
    "load_config",
    "load_props_config",
]

CONSTRUCTIONS = ("identity", "harmonic", "random", "identity+random")
SIGNAL_CLASSES = ("synthesis", "analysis-effective", "zero")
PROPERTIES = ("spep", "rip1", "tes", "width")


class ConfigError(ValueError):
    pass


def parse_pairs(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _get(pairs, key, conv, default=None, required=False):
    if key not in pairs:
        if required:
            raise ConfigError(f"missing key {key!r}")
        return default
    raw = pairs.pop(key)
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None


def _int_list(raw):
    vals = [int(v) for v in raw.split(",") if v.strip()]
    if not vals:
        raise ValueError("empty list")
    return vals


def _str_list(raw):
    vals = [v.strip() for v in raw.split(",") if v.strip()]
    if not vals:
        raise ValueError("empty list")
    return vals


def _bool(raw):
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


def _t(raw):
    return "auto" if raw.strip().lower() == "auto" else int(raw)


@dataclass
class DictionarySpec:
    construction: str = "random"
    n: int = 32
    N: int = 48
    seed: int = 0
    identity_block: int = 0

    def validate(self):
        if self.construction not in CONSTRUCTIONS:
            raise ConfigError(f"dictionary.construction must be one of {CONSTRUCTIONS}")
        if not 1 <= self.n <= self.N:
            raise ConfigError("need 1 <= dictionary.n <= dictionary.N")
        if self.construction == "identity" and self.n != self.N:
            raise ConfigError("identity dictionary needs n == N")
        if self.construction == "identity+random":
            k = self.identity_block
            if not 1 <= k < self.n or self.N - k < self.n - k:
                raise ConfigError("identity+random needs 1 <= identity_block < n and N - block >= n - block")


@dataclass
class ExperimentConfig:
    dictionary: DictionarySpec = field(default_factory=DictionarySpec)
    signal_class: str = "synthesis"
    s: int = 2
    r: float = 1.0
    m_grid: list = field(default_factory=lambda: [250])
    sigma: float = 0.0
    dithered: bool = False
    algorithms: list = field(default_factory=lambda: ["lp_direction"])
    trials: int = 1
    seed: int = 0
    output: Optional[str] = None
    timing: bool = True
    epsilon: float = 0.5
    t: object = "auto"
    radius: Optional[float] = None

    def validate(self):
        self.dictionary.validate()
        if self.signal_class not in SIGNAL_CLASSES:
            raise ConfigError(f"signal.class must be one of {SIGNAL_CLASSES}")
        if self.s < 1 or self.r <= 0:
            raise ConfigError("need signal.s >= 1 and signal.r > 0")
        if not self.m_grid or min(self.m_grid) < 1:
            raise ConfigError("measure.m must be a non-empty list of positive integers")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown algorithms {unknown}; choose from {ALGORITHMS}")
        full = [a for a in self.algorithms if a in FULL_ALGORITHMS]
        if full and not self.dithered:
            raise ConfigError(f"{full} need measure.dithered = true")
        if self.dithered and self.sigma <= 0:
            raise ConfigError("measure.sigma must be positive for dithered measurements")
        if self.dithered and len(full) != len(self.algorithms):
            raise ConfigError("direction-only algorithms need undithered measurements")
        if not 0 < self.epsilon <= 1:
            raise ConfigError("recover.epsilon must lie in (0, 1]")
        if self.t != "auto" and self.t < 1:
            raise ConfigError("recover.t must be 'auto' or a positive integer")
        if self.radius is not None and self.radius <= 0:
            raise ConfigError("recover.r must be positive")
        return self

    @property
    def socp_radius(self) -> float:
        return self.r if self.radius is None else self.radius


@dataclass
class PropsConfig:
    dictionary: DictionarySpec = field(default_factory=DictionarySpec)
    prop: str = "spep"
    s: int = 2
    m_grid: list = field(default_factory=lambda: [250])
    samples: int = 200
    eps: float = 0.5
    sphere: str = "synthesis"
    seed: int = 0
    sample_size: int = 2000
    output: Optional[str] = None

    def validate(self):
        self.dictionary.validate()
        if self.prop not in PROPERTIES:
            raise ConfigError(f"props.property must be one of {PROPERTIES}")
        if self.s < 1 or self.samples < 1 or self.sample_size < 1:
            raise ConfigError("props.s, props.samples and props.sample_size must be positive")
        if not self.m_grid or min(self.m_grid) < 1:
            raise ConfigError("measure.m must be a non-empty list of positive integers")
        if self.sphere not in ("analysis", "synthesis"):
            raise ConfigError("props.sphere must be analysis or synthesis")
        if self.eps <= 0:
            raise ConfigError("props.eps must be positive")
        return self


def _dictionary(pairs):
    return DictionarySpec(
        construction=_get(pairs, "dictionary.construction", str, "random"),
        n=_get(pairs, "dictionary.n", int, 32),
        N=_get(pairs, "dictionary.N", int, 48),
        seed=_get(pairs, "dictionary.seed", int, 0),
        identity_block=_get(pairs, "dictionary.identity_block", int, 0),
    )


def _leftovers(pairs):
    if pairs:
        raise ConfigError(f"unknown keys: {', '.join(sorted(pairs))}")


def parse_config(text: str) -> ExperimentConfig:
    pairs = parse_pairs(text)
    cfg = ExperimentConfig(
        dictionary=_dictionary(pairs),
        signal_class=_get(pairs, "signal.class", str, "synthesis"),
        s=_get(pairs, "signal.s", int, 2),
        r=_get(pairs, "signal.r", float, 1.0),
        m_grid=_get(pairs, "measure.m", _int_list, required=True),
        sigma=_get(pairs, "measure.sigma", float, 0.0),
        dithered=_get(pairs, "measure.dithered", _bool, False),
        algorithms=_get(pairs, "algorithms", _str_list, required=True),
        trials=_get(pairs, "trials", int, 1),
        seed=_get(pairs, "seed", int, 0),
        output=_get(pairs, "output.path", str, None),
        timing=_get(pairs, "output.timing", _bool, True),
        epsilon=_get(pairs, "recover.epsilon", float, 0.5),
        t=_get(pairs, "recover.t", _t, "auto"),
        radius=_get(pairs, "recover.r", float, None),
    )
    _leftovers(pairs)
    return cfg.validate()


def parse_props_config(text: str) -> PropsConfig:
    pairs = parse_pairs(text)
    cfg = PropsConfig(
        dictionary=_dictionary(pairs),
        prop=_get(pairs, "props.property", str, required=True),
        s=_get(pairs, "props.s", int, 2),
        m_grid=_get(pairs, "measure.m", _int_list, [250]),
        samples=_get(pairs, "props.samples", int, 200),
        eps=_get(pairs, "props.eps", float, 0.5),
        sphere=_get(pairs, "props.sphere", str, "synthesis"),
        seed=_get(pairs, "seed", int, 0),
        sample_size=_get(pairs, "props.sample_size", int, 2000),
        output=_get(pairs, "output.path", str, None),
    )
    _leftovers(pairs)
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def load_props_config(path) -> PropsConfig:
    return parse_props_config(Path(path).read_text())
