"""Experiment configuration read from INI-style text files.

Sections and keys (all optional; defaults reproduce the 1D bump study)::

    [domain]    bounds = 0 1 | 0 1, 0 1 ; resolution ; steps ; tau ; theta
    [truth]     profile = bump ; base ; height ; lo ; hi ; offdiag ...
    [guess]     profile = constant ; value
    [source]    profile ; parameters
    [initial]   profile ; parameters
    [noise]     deltas = 1e-2 1e-3 ; seed ; repeats ; model = raw|smooth ; smoothing = no
    [galerkin]  level ; gap_samples
    [adaptive]  mu ; N ; C ; check_gamma
    [uniqueness] times = ...
    [output]    dir ; timing = yes
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .profiles import PROFILES


class ConfigError(ValueError):
    pass


def _bump():
    return {"profile": "bump", "base": 1.0, "height": 0.5, "lo": 0.25, "hi": 0.75}


@dataclass
class ExperimentConfig:
    bounds: list = field(default_factory=lambda: [[0.0, 1.0]])
    resolution: int = 64
    steps: int = 64
    tau: float = 0.5
    theta: float = 1.0
    resolutions: list | None = None
    truth: dict = field(default_factory=_bump)
    guess: dict = field(default_factory=lambda: {"profile": "constant", "value": 1.0})
    source: dict = field(default_factory=lambda: {"profile": "constant", "value": 100.0})
    initial: dict = field(default_factory=lambda: {"profile": "sinusoid", "amplitude": 100.0})
    deltas: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    seed: int = 0
    repeats: int = 1
    noise_model: str = "raw"
    smoothing: bool = False
    level: int = 3
    gap_samples: int = 10
    mu: float = 1.5
    N: int = 30
    C: float = 1.0
    check_gamma: bool = True
    uniqueness_times: list | None = None
    out: str | None = None
    timing: bool = True

    def __post_init__(self):
        self.validate()

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def validate(self) -> None:
        if self.dim not in (1, 2) or any(len(b) != 2 or b[1] <= b[0] for b in self.bounds):
            raise ConfigError("bounds must describe an interval or a rectangle")
        if self.resolution < 2 or self.steps < 1 or not self.tau > 0:
            raise ConfigError("need resolution >= 2, steps >= 1 and tau > 0")
        if not 0.5 <= self.theta <= 1.0:
            raise ConfigError("theta must lie in [1/2, 1]")
        for name in ("truth", "guess", "source", "initial"):
            prof = getattr(self, name).get("profile", "constant")
            if prof not in PROFILES:
                raise ConfigError(f"[{name}] unknown profile {prof!r}")
        if not self.deltas or any(not d > 0 for d in self.deltas):
            raise ConfigError("noise levels must be a non-empty list of positive numbers")
        if self.noise_model not in ("raw", "smooth"):
            raise ConfigError("noise model must be 'raw' or 'smooth'")
        if self.repeats < 1 or self.gap_samples < 1 or self.level < 0:
            raise ConfigError("repeats and gap_samples must be >= 1, level >= 0")
        if not self.mu > 1 or self.N < 1 or not self.C > 0:
            raise ConfigError("adaptive rule needs mu > 1, N >= 1 and C > 0")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    def replace(self, **kw) -> "ExperimentConfig":
        data = asdict(self)
        data.update(kw)
        return ExperimentConfig(**data)

    def to_dict(self) -> dict:
        return asdict(self)


def _profile_section(sec) -> dict:
    out = {}
    for key, val in sec.items():
        parts = val.split()
        if key == "profile":
            out[key] = val.strip()
        elif len(parts) > 1:
            out[key] = [float(p) for p in parts]
        else:
            out[key] = float(val)
    return out


_PROFILE_KEYS = {"profile", "value", "amplitude", "freq", "offset", "base", "height", "lo", "hi", "slope", "offdiag"}
_KEYS = {
    "domain": {"bounds", "resolution", "steps", "tau", "theta", "resolutions"},
    "truth": _PROFILE_KEYS,
    "guess": _PROFILE_KEYS,
    "source": _PROFILE_KEYS,
    "initial": _PROFILE_KEYS,
    "noise": {"deltas", "seed", "repeats", "model", "smoothing"},
    "galerkin": {"level", "gap_samples"},
    "adaptive": {"mu", "n", "c", "check_gamma"},
    "uniqueness": {"times"},
    "output": {"dir", "timing"},
}


def _floats(text: str) -> list:
    return [float(p) for p in text.replace(",", " ").split()]


def load_config(path) -> ExperimentConfig:
    """Parse a configuration file; unknown sections or keys are errors."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.read(path)
    kw: dict = {}
    extra = set(cp.sections()) - set(_KEYS)
    if extra:
        raise ConfigError(f"unknown config sections: {sorted(extra)}")
    for name in cp.sections():
        bad = set(cp[name]) - _KEYS[name]
        if bad:
            raise ConfigError(f"[{name}] unknown keys: {sorted(bad)}")
    try:
        if cp.has_section("domain"):
            s = cp["domain"]
            if "bounds" in s:
                kw["bounds"] = [[float(v) for v in part.split()] for part in s["bounds"].split(",")]
            for key, conv in (("resolution", int), ("steps", int), ("tau", float), ("theta", float)):
                if key in s:
                    kw[key] = conv(s[key])
            if "resolutions" in s:
                kw["resolutions"] = [int(v) for v in _floats(s["resolutions"])]
        for name in ("truth", "guess", "source", "initial"):
            if cp.has_section(name):
                kw[name] = _profile_section(cp[name])
        if cp.has_section("noise"):
            s = cp["noise"]
            if "deltas" in s:
                kw["deltas"] = _floats(s["deltas"])
            if "seed" in s:
                kw["seed"] = s.getint("seed")
            if "repeats" in s:
                kw["repeats"] = s.getint("repeats")
            if "model" in s:
                kw["noise_model"] = s["model"].strip()
            if "smoothing" in s:
                kw["smoothing"] = s.getboolean("smoothing")
        if cp.has_section("galerkin"):
            s = cp["galerkin"]
            if "level" in s:
                kw["level"] = s.getint("level")
            if "gap_samples" in s:
                kw["gap_samples"] = s.getint("gap_samples")
        if cp.has_section("adaptive"):
            s = cp["adaptive"]
            for key, conv in (("mu", float), ("N", int), ("C", float)):
                if key.lower() in s:
                    kw[key] = conv(s[key.lower()])
            if "check_gamma" in s:
                kw["check_gamma"] = s.getboolean("check_gamma")
        if cp.has_section("uniqueness") and "times" in cp["uniqueness"]:
            kw["uniqueness_times"] = _floats(cp["uniqueness"]["times"])
        if cp.has_section("output"):
            s = cp["output"]
            if "dir" in s:
                kw["out"] = s["dir"].strip()
            if "timing" in s:
                kw["timing"] = s.getboolean("timing")
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return ExperimentConfig(**kw)
