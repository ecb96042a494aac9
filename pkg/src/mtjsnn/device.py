"""Single MTJ synapse: binary state, conductance, stochastic switching.

A device is always in one of two states, parallel (P, high conductance)
or anti-parallel (AP, low conductance).  Learning pulses drive the state
toward one side and succeed with a per-pulse probability; a pulse aimed
at the state the device is already in attempts nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError

# lower clamp for noisy conductance reads; conductance stays positive
_MIN_CONDUCTANCE = 1e-12


class MtjState(Enum):
    AP = 0  # anti-parallel, low conductance
    P = 1  # parallel, high conductance


class PulseKind(Enum):
    POTENTIATION = "potentiation"  # drives toward P
    DEPRESSION = "depression"  # drives toward AP


class SwitchOutcome(Enum):
    """Result of one learning pulse on one device."""

    NO_ATTEMPT = "no-attempt"
    SWITCHED = "switched"
    ATTEMPTED_NO_SWITCH = "attempted-no-switch"


class SwitchingMode(Enum):
    FIXED_PROBABILITY = "fixed"
    VOLTAGE_DEPENDENT = "voltage"


@dataclass(frozen=True)
class DeviceParams:
    """Normalized conductance parameters of one MTJ.

    g_ap is the AP-state conductance (the normalization unit),
    ratio_rho the on/off conductance ratio G_P / G_AP, and
    read_noise_sigma the relative standard deviation applied
    multiplicatively on each read.
    """

    g_ap: float = 1.0
    ratio_rho: float = 1.9
    read_noise_sigma: float = 0.0

    def __post_init__(self):
        if not self.g_ap > 0:
            raise ConfigError(f"g_ap must be > 0, got {self.g_ap} (device.DeviceParams)")
        if not self.ratio_rho > 1:
            raise ConfigError(
                f"ratio_rho must be > 1, got {self.ratio_rho} (device.DeviceParams)"
            )
        if self.read_noise_sigma < 0:
            raise ConfigError(
                f"read_noise_sigma must be >= 0, got {self.read_noise_sigma}"
                " (device.DeviceParams)"
            )

    @property
    def g_p(self) -> float:
        return self.g_ap * self.ratio_rho

    @property
    def weight_magnitude(self) -> float:
        """Effective signed-weight magnitude per device under ideal subtraction."""
        return self.g_ap * (self.ratio_rho - 1.0) / 2.0

    @property
    def ideal_subtraction(self) -> float:
        """Midpoint conductance, the ideal per-active-input subtraction factor."""
        return self.g_ap * (1.0 + self.ratio_rho) / 2.0


@dataclass(frozen=True)
class SwitchingModel:
    """Per-pulse switching probabilities.

    In FIXED_PROBABILITY mode each pulse kind has a constant success
    probability.  In VOLTAGE_DEPENDENT mode the probability follows a
    logistic curve of the pulse magnitude, 1 / (1 + exp(-(|V| - v50) / slope)),
    with one (v50, slope) pair per polarity.
    """

    mode: SwitchingMode = SwitchingMode.FIXED_PROBABILITY
    p_pot: float = 0.35
    p_dep: float = 0.30
    v50_pot: float | None = None
    v50_dep: float | None = None
    slope_pot: float | None = None
    slope_dep: float | None = None

    def __post_init__(self):
        for name, p in (("p_pot", self.p_pot), ("p_dep", self.p_dep)):
            if not 0.0 <= p <= 1.0:
                raise ConfigError(
                    f"{name} must be within [0, 1], got {p} (device.SwitchingModel)"
                )
        if self.mode is SwitchingMode.VOLTAGE_DEPENDENT:
            for name, v in (
                ("v50_pot", self.v50_pot),
                ("v50_dep", self.v50_dep),
                ("slope_pot", self.slope_pot),
                ("slope_dep", self.slope_dep),
            ):
                if v is None:
                    raise ConfigError(
                        f"{name} is required in voltage-dependent mode"
                        " (device.SwitchingModel)"
                    )
            if not (self.slope_pot > 0 and self.slope_dep > 0):
                raise ConfigError(
                    "slope_pot and slope_dep must be > 0 (device.SwitchingModel)"
                )


def conductance(
    state: MtjState, params: DeviceParams, noise_draw: float | None = None
) -> float:
    """Normalized conductance of a device, optionally with one read-noise draw."""
    g = params.g_p if state is MtjState.P else params.g_ap
    if noise_draw is not None and params.read_noise_sigma > 0:
        g *= 1.0 + params.read_noise_sigma * noise_draw
        g = max(g, _MIN_CONDUCTANCE)
    return g


def _target_state(kind: PulseKind) -> MtjState:
    return MtjState.P if kind is PulseKind.POTENTIATION else MtjState.AP


def switching_probability(
    kind: PulseKind,
    state: MtjState,
    model: SwitchingModel,
    pulse_voltage: float | None = None,
) -> float:
    """Probability that one pulse of `kind` flips a device in `state`.

    Zero when the pulse is directed toward the state the device already
    occupies (no switching is attempted).
    """
    if _target_state(kind) is state:
        return 0.0
    if model.mode is SwitchingMode.FIXED_PROBABILITY:
        return model.p_pot if kind is PulseKind.POTENTIATION else model.p_dep
    if pulse_voltage is None:
        raise ConfigError(
            "pulse_voltage is required in voltage-dependent mode (device.SwitchingModel)"
        )
    if kind is PulseKind.POTENTIATION:
        v50, slope = model.v50_pot, model.slope_pot
    else:
        v50, slope = model.v50_dep, model.slope_dep
    return 1.0 / (1.0 + math.exp(-(abs(pulse_voltage) - v50) / slope))


def apply_pulse(
    state: MtjState,
    kind: PulseKind,
    model: SwitchingModel,
    uniform_draw: float,
    pulse_voltage: float | None = None,
) -> tuple[MtjState, SwitchOutcome]:
    """Apply one learning pulse given one uniform draw in [0, 1)."""
    if not 0.0 <= uniform_draw < 1.0:
        raise ValueError(f"uniform_draw must be in [0, 1), got {uniform_draw}")
    target = _target_state(kind)
    if target is state:
        return state, SwitchOutcome.NO_ATTEMPT
    p = switching_probability(kind, state, model, pulse_voltage)
    if uniform_draw < p:
        return target, SwitchOutcome.SWITCHED
    return state, SwitchOutcome.ATTEMPTED_NO_SWITCH
