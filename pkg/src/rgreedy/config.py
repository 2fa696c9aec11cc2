"""Experiment configuration: one JSON file drives every command.

All randomness flows from the seeds declared here, so any command is
deterministic given its config file. Defaults mirror the operating point of
the hardware experiments (beta=0.8, gamma=0.25, theta0=0.44*pi, N=961, 200
training samples, 9000 test samples, 20-run ensembles).
"""

import dataclasses
import json
import math
from dataclasses import dataclass, field

from .errors import ConfigurationError
from .reservoir import grid_side
from .timeseries import MackeyGlassParams


@dataclass(frozen=True)
class SeriesSettings:
    seed: int = 1000
    jitter: float = 1e-6
    train_len: int = 200
    test_len: int = 9000
    warmup: int = 200

    @property
    def n_points(self):
        return self.train_len + self.test_len + max(self.warmup, 2)

    def validate(self):
        if self.train_len < 1 or self.test_len < 1:
            raise ConfigurationError("train_len and test_len must be >= 1")
        if not (0 <= self.warmup <= self.train_len):
            raise ConfigurationError(
                f"warmup must lie in [0, train_len={self.train_len}], got {self.warmup}"
            )


@dataclass(frozen=True)
class ReservoirSettings:
    n: int = 961
    beta: float = 0.8
    gamma: float = 0.25
    alpha: float = 0.9
    e0_sq: float = 1.0
    theta0_pi: float = 0.44
    delta_theta_pi: float = 0.51
    theta_mode: str = "uniform"  # "uniform" or "checkerboard"
    kernel_radius: int = 2
    noise_state_sigma: float = 1e-2
    coupling_seed: int = 2000
    injection_seed: int = 3000
    noise_seed: int = 4000

    def validate(self):
        grid_side(self.n)
        if self.theta_mode not in ("uniform", "checkerboard"):
            raise ConfigurationError(f"unknown theta_mode {self.theta_mode!r}")
        if self.kernel_radius < 0:
            raise ConfigurationError("kernel_radius must be >= 0")
        for name in ("beta", "gamma", "alpha", "e0_sq", "noise_state_sigma"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")

    def theta0(self):
        return self.theta0_pi * math.pi

    def delta_theta(self):
        return self.delta_theta_pi * math.pi


@dataclass(frozen=True)
class ReadoutSettings:
    detector_sigma_rel: float = 1e-3

    def validate(self):
        if self.detector_sigma_rel < 0:
            raise ConfigurationError("detector_sigma_rel must be >= 0")


@dataclass(frozen=True)
class LearnerSettings:
    epochs: int | None = None  # None: round(epochs_per_neuron * n)
    epochs_per_neuron: float = 2.5
    ensemble: int = 20
    seed: int = 5000
    frozen_states: bool = False

    def validate(self):
        if self.epochs is not None and self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.epochs_per_neuron <= 0:
            raise ConfigurationError("epochs_per_neuron must be positive")
        if self.ensemble < 1:
            raise ConfigurationError("ensemble size must be >= 1")

    def epochs_for(self, n):
        return self.epochs if self.epochs is not None else max(1, round(self.epochs_per_neuron * n))


@dataclass(frozen=True)
class SweepSettings:
    sizes: tuple = (16, 64, 144, 256)
    ensemble: int = 10

    def validate(self):
        if not self.sizes:
            raise ConfigurationError("sweep sizes must be nonempty")
        for n in self.sizes:
            grid_side(n)
        if self.ensemble < 1:
            raise ConfigurationError("sweep ensemble size must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    mackey_glass: MackeyGlassParams = field(default_factory=MackeyGlassParams)
    series: SeriesSettings = field(default_factory=SeriesSettings)
    reservoir: ReservoirSettings = field(default_factory=ReservoirSettings)
    readout: ReadoutSettings = field(default_factory=ReadoutSettings)
    learner: LearnerSettings = field(default_factory=LearnerSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    output_dir: str = "out"

    def validate(self):
        self.mackey_glass.validate()
        for section in (self.series, self.reservoir, self.readout,
                        self.learner, self.sweep):
            section.validate()

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["sweep"]["sizes"] = list(d["sweep"]["sizes"])
        return d


_SECTIONS = {
    "mackey_glass": MackeyGlassParams,
    "series": SeriesSettings,
    "reservoir": ReservoirSettings,
    "readout": ReadoutSettings,
    "learner": LearnerSettings,
    "sweep": SweepSettings,
}


def config_from_dict(data):
    """Build a validated config from nested plain dicts (strict on keys)."""
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a key/value mapping")
    kwargs = {}
    for key, value in data.items():
        if key == "output_dir":
            kwargs[key] = str(value)
            continue
        cls = _SECTIONS.get(key)
        if cls is None:
            raise ConfigurationError(f"unknown config section {key!r}")
        if not isinstance(value, dict):
            raise ConfigurationError(f"config section {key!r} must be a mapping")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(value) - names
        if unknown:
            raise ConfigurationError(
                f"unknown keys in section {key!r}: {sorted(unknown)}"
            )
        if key == "sweep" and "sizes" in value:
            value = dict(value, sizes=tuple(value["sizes"]))
        try:
            kwargs[key] = cls(**value)
        except TypeError as exc:
            raise ConfigurationError(f"bad section {key!r}: {exc}") from exc
    cfg = ExperimentConfig(**kwargs)
    cfg.validate()
    return cfg


def load_config(path):
    """Read and validate a JSON config file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def save_config(cfg, path):
    """Serialize a config; load_config(save_config(c)) round-trips exactly."""
    with open(path, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
