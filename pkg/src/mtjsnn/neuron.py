"""Leaky integrate-and-fire output neurons with adaptive thresholds.

Neurons accumulate signed dendrite outputs with a geometric leak per
clock cycle, floor at zero, and fire under a winner-take-all rule when
integration exceeds the threshold.  Homeostasis bumps the winner's
threshold on each fire and relaxes every threshold toward the baseline.

The list-of-neuron functions define the semantics one neuron at a time;
the ``*_array`` forms apply the identical arithmetic to whole state
vectors and are what the network simulation loop uses.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class NeuronParams:
    """LIF and homeostasis constants.

    homeo_bump and threshold_floor default to 0.15 * theta0 and
    0.1 * theta0 when left as None.
    """

    leak_alpha: float = 0.05
    theta0: float = 1.0
    homeo_bump: float | None = None
    homeo_decay: float = 0.02
    threshold_floor: float | None = None

    def __post_init__(self):
        if self.homeo_bump is None:
            object.__setattr__(self, "homeo_bump", 0.15 * self.theta0)
        if self.threshold_floor is None:
            object.__setattr__(self, "threshold_floor", 0.1 * self.theta0)
        if not 0.0 <= self.leak_alpha <= 1.0:
            raise ConfigError(
                f"leak_alpha must be within [0, 1], got {self.leak_alpha}"
                " (neuron.NeuronParams)"
            )
        if not 0.0 <= self.homeo_decay <= 1.0:
            raise ConfigError(
                f"homeo_decay must be within [0, 1], got {self.homeo_decay}"
                " (neuron.NeuronParams)"
            )
        if not self.theta0 > self.threshold_floor > 0:
            raise ConfigError(
                f"need theta0 > threshold_floor > 0, got theta0={self.theta0},"
                f" threshold_floor={self.threshold_floor} (neuron.NeuronParams)"
            )


@dataclass(frozen=True)
class LifNeuron:
    integration: float = 0.0
    threshold: float = 1.0
    fired_count: int = 0


def integrate_step(neuron: LifNeuron, dendrite_output: float,
                   params: NeuronParams) -> LifNeuron:
    """One clock cycle: leak, add the dendrite output, floor at zero."""
    u = integrate_array(np.float64(neuron.integration), dendrite_output, params)
    return replace(neuron, integration=float(u))


def select_winner(neurons: Sequence[LifNeuron]) -> int | None:
    """Index of the supra-threshold neuron with the largest margin, or None.

    Ties resolve to the lowest index.
    """
    if len(neurons) == 0:
        raise ValueError("select_winner requires a non-empty neuron list")
    u = np.array([n.integration for n in neurons])
    thr = np.array([n.threshold for n in neurons])
    return winner_from_arrays(u, thr)


def post_fire_reset(neurons: Sequence[LifNeuron]) -> list[LifNeuron]:
    """Zero every neuron's integration (all neurons, not only the winner)."""
    return [replace(n, integration=0.0) for n in neurons]


def homeostasis_update(neurons: Sequence[LifNeuron], winner: int | None,
                       params: NeuronParams) -> list[LifNeuron]:
    """Bump the winner's threshold, then relax all thresholds toward theta0."""
    if winner is not None and not 0 <= winner < len(neurons):
        raise IndexError(f"winner {winner} out of range for {len(neurons)} neurons")
    thr = np.array([n.threshold for n in neurons], dtype=np.float64)
    thr = homeostasis_array(thr, winner, params)
    return [replace(n, threshold=float(t)) for n, t in zip(neurons, thr)]


# -- vectorized forms (identical arithmetic, used by the simulation loop) --


def integrate_array(u: np.ndarray, outputs, params: NeuronParams) -> np.ndarray:
    return np.maximum(u * (1.0 - params.leak_alpha) + outputs, 0.0)


def winner_from_arrays(u: np.ndarray, thr: np.ndarray) -> int | None:
    margins = u - thr
    j = int(np.argmax(margins))  # argmax takes the first maximum: lowest index
    return j if margins[j] > 0 else None


def homeostasis_array(thr: np.ndarray, winner: int | None,
                      params: NeuronParams) -> np.ndarray:
    thr = thr.astype(np.float64, copy=True)
    if winner is not None:
        thr[winner] += params.homeo_bump
    thr = params.theta0 + (thr - params.theta0) * (1.0 - params.homeo_decay)
    return np.maximum(thr, params.threshold_floor)
