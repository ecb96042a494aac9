"""Run configuration: defaults, key=value file parsing, validation.

The config file is line-oriented ``key = value`` text with ``#``
comments.  Unknown keys are errors.  Keys mirror the parameter names of
the owning modules; values left at ``auto`` are derived (subtraction
factor from the conductance ratio, baseline threshold from the network
size).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .crossbar import SubtractionConfig
from .device import DeviceParams, SwitchingMode, SwitchingModel
from .errors import ConfigError
from .learning import StdpConfig
from .network import auto_theta0
from .neuron import NeuronParams

_NONE_WORDS = {"auto", "none", ""}
_TRUE_WORDS = {"1", "true", "yes", "on"}
_FALSE_WORDS = {"0", "false", "no", "off"}


@dataclass
class RunConfig:
    # network shape
    n_out: int = 100
    n_in: int = 784
    r: int = 1
    # device
    g_ap: float = 1.0
    ratio_rho: float = 1.9
    read_noise_sigma: float = 0.0
    # crossbar
    subtraction_s: float | None = None  # auto = (1 + ratio_rho) / 2 * g_ap
    # switching
    switching_mode: str = "fixed"
    p_pot: float = 0.35
    p_dep: float = 0.30
    v50_pot: float | None = None
    v50_dep: float | None = None
    slope_pot: float | None = None
    slope_dep: float | None = None
    v_pot: float | None = None  # learning pulse voltages (voltage mode)
    v_dep: float | None = None
    # neurons
    leak_alpha: float = 0.05
    theta0: float | None = None  # auto = n_in * r * g_ap * (rho - 1) / 8
    homeo_bump: float | None = None  # auto = 0.15 * theta0
    homeo_decay: float = 0.02
    threshold_floor: float | None = None  # auto = 0.1 * theta0
    # learning
    window_cycles: int = 1
    # simulation
    max_cycles: int = 50
    epochs: int = 1
    seed: int = 1
    shuffle: bool = False
    threads: int = 1
    # clustering demo
    max_presentations: int = 200
    order_seed: int | None = None  # auto = seed
    cluster_init: str = "1100"
    # datasets
    train_images: str | None = None
    train_labels: str | None = None
    test_images: str | None = None
    test_labels: str | None = None
    binarize_threshold: int = 128
    n_classes: int = 10
    # outputs
    out_dir: str | None = None
    metrics_interval: int = 5000
    checkpoint_label_images: int = 2000
    checkpoint_eval_images: int = 1000
    label_images: int = 0  # 0 = full training set
    weight_maps: int = 0  # how many per-neuron maps to write; 0 = all

    # -- resolved module objects -------------------------------------------

    def device(self) -> DeviceParams:
        return DeviceParams(self.g_ap, self.ratio_rho, self.read_noise_sigma)

    def switching(self) -> SwitchingModel:
        try:
            mode = SwitchingMode(self.switching_mode)
        except ValueError:
            raise ConfigError(
                f"switching_mode must be 'fixed' or 'voltage',"
                f" got {self.switching_mode!r} (device.SwitchingModel)"
            ) from None
        return SwitchingModel(mode, self.p_pot, self.p_dep, self.v50_pot,
                              self.v50_dep, self.slope_pot, self.slope_dep)

    def subtraction(self) -> SubtractionConfig:
        if self.subtraction_s is None:
            return SubtractionConfig.ideal(self.device())
        return SubtractionConfig(self.subtraction_s)

    def resolved_theta0(self) -> float:
        if self.theta0 is not None:
            return self.theta0
        return auto_theta0(self.n_in, self.r, self.device())

    def neuron_params(self) -> NeuronParams:
        theta0 = self.resolved_theta0()
        return NeuronParams(self.leak_alpha, theta0, self.homeo_bump,
                            self.homeo_decay, self.threshold_floor)

    def stdp(self) -> StdpConfig:
        return StdpConfig(self.window_cycles, self.switching(),
                          self.v_pot, self.v_dep)

    def validate(self) -> "RunConfig":
        """Build every module object once so range violations surface early."""
        if min(self.n_out, self.n_in, self.r) < 1:
            raise ConfigError(
                f"n_out, n_in, r must each be >= 1, got"
                f" ({self.n_out}, {self.n_in}, {self.r}) (crossbar.SynapseArray)"
            )
        if self.max_cycles < 1:
            raise ConfigError(f"max_cycles must be >= 1, got {self.max_cycles}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if not 0 <= self.binarize_threshold <= 255:
            raise ConfigError(
                f"binarize_threshold must be within [0, 255],"
                f" got {self.binarize_threshold} (data.binarize)"
            )
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        self.device()
        self.subtraction()
        self.neuron_params()
        self.stdp()
        return self


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _parse_value(key: str, text: str):
    field = _FIELDS[key]
    ftype = field.type
    text = text.strip()
    optional = "None" in ftype
    if optional and text.lower() in _NONE_WORDS:
        return None
    base = ftype.split(" | ")[0]
    try:
        if base == "bool":
            low = text.lower()
            if low in _TRUE_WORDS:
                return True
            if low in _FALSE_WORDS:
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if base == "int":
            return int(text)
        if base == "float":
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"config key '{key}': {exc}") from None


def apply_assignments(cfg: RunConfig, pairs: dict[str, str]) -> RunConfig:
    """Apply string key=value assignments onto a config (unknown keys error)."""
    updates = {}
    for key, text in pairs.items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key '{key}'")
        updates[key] = _parse_value(key, text)
    return dataclasses.replace(cfg, **updates)


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base if base is not None else RunConfig()
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate config key '{key}'")
        pairs[key] = value
    return apply_assignments(cfg, pairs)


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    return parse_config_text(Path(path).read_text(), base)
