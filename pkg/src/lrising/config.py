"""Experiment configuration: YAML in, validated dataclasses out.

The schema is normative (names, types, defaults below); every default is
materialized into the run manifest so a run can be reproduced from its
manifest alone.
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field

import yaml

KINDS = (
    "phase-diagram",
    "exponents",
    "collapse",
    "quench-sweep",
    "ai-scaling",
    "domain-dist",
    "compress",
    "circuit-verify",
)


class ConfigError(ValueError):
    pass


@dataclass
class ModelConfig:
    mode: str = "algebraic"  # algebraic | nearest-neighbor
    alpha: float | None = 2.0
    J0: float = 1.0
    sizes: list[int] = field(default_factory=lambda: [8, 10, 12, 14, 16, 18])

    def validate(self):
        if self.mode not in ("algebraic", "nearest-neighbor"):
            raise ConfigError(f"model.mode must be algebraic or nearest-neighbor, got {self.mode!r}")
        if self.mode == "algebraic" and (self.alpha is None or self.alpha < 0):
            raise ConfigError("model.alpha must be >= 0 for algebraic couplings")
        if not self.sizes:
            raise ConfigError("model.sizes must not be empty")
        for n in self.sizes:
            if n < 2 or n % 2:
                raise ConfigError(f"model.sizes entries must be even and >= 2, got {n}")
        if self.J0 == 0:
            raise ConfigError("model.J0 must be nonzero")

    @property
    def zeta(self) -> str:
        return "F" if self.J0 < 0 else "AF"


@dataclass
class EquilibriumSection:
    scan_window: list[float] = field(default_factory=lambda: [0.2, 2.4])
    scan_step: float = 0.05
    grid_halfwidth: float = 0.18
    grid_step: float = 0.01
    refine_step: float = 0.001
    delta_g: float = 1e-3
    collapse_window: list[float] = field(default_factory=lambda: [-10.0, 10.0])
    collapse_perturb: float = 0.2

    def validate(self):
        if len(self.scan_window) != 2 or self.scan_window[0] >= self.scan_window[1]:
            raise ConfigError("equilibrium.scan_window must be [lo, hi] with lo < hi")
        for name in ("scan_step", "grid_halfwidth", "grid_step", "refine_step", "delta_g"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"equilibrium.{name} must be positive")


@dataclass
class QuenchSection:
    g0: float = 5.0
    g_c: float | None = None  # None: use the NN value 1.0 or a fitted value passed downstream
    tau_min: float = 1e-2
    tau_max: float = 1e2
    tau_points: int = 15
    tolerance: float = 1e-6
    theta: float = 0.995
    fit_window: list[float] = field(default_factory=lambda: [5.0, 50.0])
    ai_window: list[float] = field(default_factory=lambda: [1.0, 10.0])
    initial_state: str = "ground-state"
    tau_list: list[float] | None = None  # overrides the log grid when given

    def validate(self):
        if self.tau_min <= 0 or self.tau_max <= self.tau_min:
            raise ConfigError("quench tau grid needs 0 < tau_min < tau_max")
        if self.tau_points < 2:
            raise ConfigError("quench.tau_points must be >= 2")
        if not 0 < self.theta < 1:
            raise ConfigError("quench.theta must lie in (0, 1)")
        if self.initial_state not in ("ground-state", "fully-polarized"):
            raise ConfigError(f"unknown quench.initial_state {self.initial_state!r}")

    def tau_grid(self):
        import numpy as np

        if self.tau_list:
            return sorted(float(t) for t in self.tau_list)
        return list(np.geomspace(self.tau_min, self.tau_max, self.tau_points))


@dataclass
class CompressSection:
    alphas: list[float] = field(default_factory=lambda: [1.0, 2.0, 3.0])
    N: int = 362
    n_terms: int = 10

    def validate(self):
        if self.n_terms >= self.N / 2:
            raise ConfigError("compress.n_terms must satisfy n < N/2")


@dataclass
class CircuitSection:
    N: int = 8
    tau_q: float = 5.0
    dt_list: list[float] = field(default_factory=lambda: [5.0 / 2**k for k in range(6, 11)])
    g0: float = 5.0
    g_c: float = 1.0

    def validate(self):
        if any(dt <= 0 for dt in self.dt_list):
            raise ConfigError("circuit.dt_list must be positive")


@dataclass
class ExperimentConfig:
    kind: str = "exponents"
    model: ModelConfig = field(default_factory=ModelConfig)
    equilibrium: EquilibriumSection = field(default_factory=EquilibriumSection)
    quench: QuenchSection = field(default_factory=QuenchSection)
    compress: CompressSection = field(default_factory=CompressSection)
    circuit: CircuitSection = field(default_factory=CircuitSection)
    workers: int = 1
    out: str = "runs/run"
    name: str = ""

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; choose from {KINDS}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        self.model.validate()
        self.equilibrium.validate()
        self.quench.validate()
        self.compress.validate()
        self.circuit.validate()

    def to_dict(self) -> dict:
        return asdict(self)


_SECTION_TYPES = {
    "model": ModelConfig,
    "equilibrium": EquilibriumSection,
    "quench": QuenchSection,
    "compress": CompressSection,
    "circuit": CircuitSection,
}


def _build_section(cls, data, path):
    obj = cls()
    for key, val in (data or {}).items():
        if not hasattr(obj, key):
            raise ConfigError(f"unknown config key {path}.{key}")
        setattr(obj, key, val)
    return obj


def config_from_dict(data: dict) -> ExperimentConfig:
    data = copy.deepcopy(data or {})
    cfg = ExperimentConfig()
    for key, val in data.items():
        if key in _SECTION_TYPES:
            setattr(cfg, key, _build_section(_SECTION_TYPES[key], val, key))
        elif hasattr(cfg, key):
            setattr(cfg, key, val)
        else:
            raise ConfigError(f"unknown config key {key}")
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping")
    return config_from_dict(data)


def apply_overrides(cfg: ExperimentConfig, overrides: list[str]) -> ExperimentConfig:
    """Apply key=value strings like 'quench.theta=0.999' or 'model.sizes=[8,10]'."""
    data = cfg.to_dict()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        value = yaml.safe_load(raw)
        node = data
        parts = key.strip().split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ConfigError(f"unknown override path {key!r}")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(f"unknown override key {key!r}")
        node[parts[-1]] = value
    return config_from_dict(data)
