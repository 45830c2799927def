"""Experiment configuration: INI text with one section per block.

Every key has a default, so a config only lists what differs. Serializing
writes every key; floats use ``repr`` so ``parse(serialize(c)) == c``.
Units are MHz for couplings and microseconds for times.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, fields

from .control import normalize_kind
from .spectra import OhmicSpectrum, OrnsteinUhlenbeckSpectrum

__all__ = [
    "ConfigError",
    "SpectrumConfig",
    "ControlConfig",
    "EstimationConfig",
    "ScanConfig",
    "SweepConfig",
    "ExperimentConfig",
    "parse_config",
    "serialize_config",
    "load_config",
]

EXPERIMENTS = ("constants", "qfi-scan", "bound-sweep", "adaptive")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumConfig:
    family: str = "ou"
    g: float = 1.0
    tau_c: float = 10.0
    beta: int = 2
    s: float = 1.0

    def build(self):
        if self.family == "ou":
            return OrnsteinUhlenbeckSpectrum(self.g, self.tau_c, self.beta)
        if self.family == "ohmic":
            return OhmicSpectrum(self.g, self.tau_c, self.s)
        raise ConfigError(f"spectrum.family must be 'ou' or 'ohmic', got {self.family!r}")


@dataclass(frozen=True)
class ControlConfig:
    kind: str = "CPMG"
    n: int = 8


@dataclass(frozen=True)
class EstimationConfig:
    target: str = "tau_c"
    backend: str = "auto"
    truth_backend: str = "auto"
    n_measurements: int = 300
    realizations: int = 100
    seed: int = 0
    prior_min: float = 0.2
    prior_max: float = 5.0
    grid_size: int = 512
    spacing: str = "linear"
    n_candidates: int = 200
    candidate_span: float = 20.0
    refine: bool = False
    baseline: str = ""
    baseline_n: int = 1


@dataclass(frozen=True)
class ScanConfig:
    t_min: float = 1.0
    t_max: float = 100.0
    n_points: int = 200


@dataclass(frozen=True)
class SweepConfig:
    g_tau: tuple = (0.3, 1.0, 3.0, 10.0, 30.0)
    tau_c: float = 10.0
    beta: int = 2
    s: float = 2.0
    margin: float = 10.0


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "constants"
    output: str = "out.csv"
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    estimation: EstimationConfig = field(default_factory=EstimationConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def validate(self):
        if self.kind not in EXPERIMENTS:
            raise ConfigError(f"experiment.kind must be one of {EXPERIMENTS}, got {self.kind!r}")
        try:
            self.spectrum.build()
            normalize_kind(self.control.kind)
            if self.estimation.baseline:
                normalize_kind(self.estimation.baseline)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        est = self.estimation
        if est.target not in ("tau_c", "g"):
            raise ConfigError(f"estimation.target must be 'tau_c' or 'g', got {est.target!r}")
        if not 0 < est.prior_min < 1 <= est.prior_max:
            raise ConfigError("estimation.prior_min must be in (0, 1) and prior_max >= 1")
        if est.seed < 0 or est.seed >= 2 ** 64:
            raise ConfigError("estimation.seed must be an unsigned 64-bit integer")
        if not 0 < self.scan.t_min < self.scan.t_max:
            raise ConfigError("scan.t_min must be positive and below scan.t_max")
        if any(v <= 0 for v in self.sweep.g_tau) or not self.sweep.g_tau:
            raise ConfigError("sweep.g_tau must be a non-empty list of positive values")
        return self


_SECTIONS = ("spectrum", "control", "estimation", "scan", "sweep")


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _convert(text, default, where):
    try:
        if isinstance(default, bool):
            low = text.strip().lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(text)
            return low in ("true", "yes", "1")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(float(v) for v in text.split(",") if v.strip())
        return text.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {text!r}") from None


def _block(cls, section, name):
    kw = {}
    known = {f.name: f for f in fields(cls)}
    for key, text in section.items():
        if key not in known:
            raise ConfigError(f"unknown key {name}.{key}")
        f = known[key]
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        kw[key] = _convert(text, default, f"{name}.{key}")
    return cls(**kw)


def parse_config(text):
    """Parse INI text into a validated ExperimentConfig."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for name in cp.sections():
        if name not in ("experiment",) + _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
    kw = {}
    if cp.has_section("experiment"):
        for key, text_ in cp.items("experiment"):
            if key not in ("kind", "output"):
                raise ConfigError(f"unknown key experiment.{key}")
            kw[key] = text_.strip()
    for name in _SECTIONS:
        if cp.has_section(name):
            cls = {f.name: f.default_factory for f in fields(ExperimentConfig) if f.name == name}[name]
            kw[name] = _block(cls, cp[name], name)
    return ExperimentConfig(**kw).validate()


def serialize_config(cfg):
    lines = ["[experiment]", f"kind = {cfg.kind}", f"output = {cfg.output}"]
    for name in _SECTIONS:
        block = getattr(cfg, name)
        lines.append("")
        lines.append(f"[{name}]")
        for f in fields(block):
            lines.append(f"{f.name} = {_fmt(getattr(block, f.name))}")
    return "\n".join(lines) + "\n"


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
