"""Binarized stochastic STDP: pulse selection and row updates.

When an output neuron fires, every synapse in its row receives one
learning pulse: potentiation for columns with recent pre-synaptic
activity (within the configured window of clock cycles), depression for
the rest.  All r replicas of a column share the pulse kind; each replica
consumes its own uniform draw and switches with the model probability.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .crossbar import SynapseArray
from .device import PulseKind, SwitchingModel, SwitchOutcome, switching_probability, MtjState
from .errors import ConfigError

NEVER_ACTIVE = np.iinfo(np.int64).min

# outcome codes used inside packed event arrays
_NO_ATTEMPT, _SWITCHED, _ATTEMPTED = 0, 1, 2
_OUTCOME_BY_CODE = {
    _NO_ATTEMPT: SwitchOutcome.NO_ATTEMPT,
    _SWITCHED: SwitchOutcome.SWITCHED,
    _ATTEMPTED: SwitchOutcome.ATTEMPTED_NO_SWITCH,
}


@dataclass(frozen=True)
class StdpConfig:
    """STDP window and switching model.

    pulse_v_pot / pulse_v_dep are the learning pulse voltages, consulted
    only when the switching model is voltage-dependent.
    """

    window_cycles: int = 1
    model: SwitchingModel = field(default_factory=SwitchingModel)
    pulse_v_pot: float | None = None
    pulse_v_dep: float | None = None

    def __post_init__(self):
        if self.window_cycles < 1:
            raise ConfigError(
                f"window_cycles must be >= 1, got {self.window_cycles}"
                " (learning.StdpConfig)"
            )

    def probabilities(self) -> tuple[float, float]:
        """(p_pot, p_dep) for an attempting device under this config."""
        p_pot = switching_probability(
            PulseKind.POTENTIATION, MtjState.AP, self.model, self.pulse_v_pot
        )
        p_dep = switching_probability(
            PulseKind.DEPRESSION, MtjState.P, self.model, self.pulse_v_dep
        )
        return p_pot, p_dep


@dataclass
class ActivityTrace:
    """Most recent clock cycle at which each input column presented a 1."""

    last_active_cycle: np.ndarray  # int64, NEVER_ACTIVE = no activity yet

    @classmethod
    def empty(cls, n_in: int) -> "ActivityTrace":
        return cls(np.full(n_in, NEVER_ACTIVE, dtype=np.int64))

    def observe(self, input_bits: np.ndarray, cycle: int) -> None:
        self.last_active_cycle[np.asarray(input_bits, dtype=bool)] = cycle

    def copy(self) -> "ActivityTrace":
        return ActivityTrace(self.last_active_cycle.copy())


def select_pulses(trace: ActivityTrace, current_cycle: int,
                  cfg: StdpConfig) -> np.ndarray:
    """Per-column pulse choice as a bool mask: True = potentiation.

    A column is potentiated iff it was active within the last
    window_cycles clock cycles (inclusive of the current one).
    """
    cutoff = current_cycle - (cfg.window_cycles - 1)
    return trace.last_active_cycle >= cutoff


def pulse_kinds(potentiation_mask: np.ndarray) -> list[PulseKind]:
    """Expand a pulse mask into PulseKind values (display / test helper)."""
    return [PulseKind.POTENTIATION if p else PulseKind.DEPRESSION
            for p in np.asarray(potentiation_mask, dtype=bool)]


@dataclass
class SwitchEvents:
    """Per-synapse outcomes of one STDP application on one row.

    Covers every (col, replica) cell of the row in column-major,
    replica-innermost order.  Iterating yields
    (col, replica, SwitchOutcome) tuples.
    """

    cols: np.ndarray
    replicas: np.ndarray
    codes: np.ndarray  # uint8 outcome codes

    @classmethod
    def empty(cls) -> "SwitchEvents":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z.copy(), np.zeros(0, dtype=np.uint8))

    def __len__(self) -> int:
        return len(self.codes)

    def __iter__(self) -> Iterator[tuple[int, int, SwitchOutcome]]:
        for c, k, o in zip(self.cols, self.replicas, self.codes):
            yield int(c), int(k), _OUTCOME_BY_CODE[int(o)]

    @property
    def n_switched(self) -> int:
        return int((self.codes == _SWITCHED).sum())

    @property
    def n_attempted_no_switch(self) -> int:
        return int((self.codes == _ATTEMPTED).sum())

    @property
    def n_no_attempt(self) -> int:
        return int((self.codes == _NO_ATTEMPT).sum())

    def outcome_grid(self, n_in: int, r: int) -> np.ndarray:
        """Outcome codes as an (n_in, r) grid."""
        grid = np.full((n_in, r), _NO_ATTEMPT, dtype=np.uint8)
        grid[self.cols, self.replicas] = self.codes
        return grid


def apply_stdp(array: SynapseArray, row: int, potentiation_mask: np.ndarray,
               cfg: StdpConfig, draws: np.ndarray) -> SwitchEvents:
    """Apply one pulse per synapse of `row`, mutating the array in place.

    potentiation_mask is the per-column pulse choice (True = potentiation);
    all r replicas of a column receive the same kind.  draws is an
    (n_in, r) grid of uniforms in [0, 1), one fresh draw per synapse,
    consumed in column-major, replica-innermost order.
    """
    pot = np.asarray(potentiation_mask, dtype=bool)
    if pot.shape != (array.n_in,):
        raise ValueError(
            f"pulse mask must have length {array.n_in}, got {pot.shape}"
        )
    draws = np.asarray(draws, dtype=np.float64)
    if draws.shape != (array.n_in, array.r):
        raise ValueError(
            f"draws must have shape {(array.n_in, array.r)}, got {draws.shape}"
        )
    bits = array.row_states(row)  # (n_in, r), True = P
    target = np.broadcast_to(pot[:, None], bits.shape)
    attempt = bits != target
    p_pot, p_dep = cfg.probabilities()
    p = np.where(pot, p_pot, p_dep)[:, None]
    switched = attempt & (draws < p)
    array.set_row_states(row, bits ^ switched)

    codes = np.full(bits.shape, _NO_ATTEMPT, dtype=np.uint8)
    codes[attempt] = _ATTEMPTED
    codes[switched] = _SWITCHED
    cols, replicas = np.indices(bits.shape)
    return SwitchEvents(cols.reshape(-1), replicas.reshape(-1), codes.reshape(-1))
