"""Bit-packed synapse grid and crossbar arithmetic.

The grid holds n_out x n_in x r binary MTJ states, one bit per synapse
(1 = P).  Bits are laid out row-major with the replica index innermost,
each output row padded to a whole byte, LSB-first within each byte
(numpy ``bitorder="little"``) - the same layout the snapshot format
stores.  The dendrite current of a row is a population count over the
row bytes masked by the packed input, so a vector-matrix multiply costs
one AND plus one popcount per row.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .device import DeviceParams, MtjState
from .errors import ConfigError


@dataclass(frozen=True)
class SubtractionConfig:
    """Per-active-input, per-replica factor subtracted from raw currents."""

    s: float = 1.45

    def __post_init__(self):
        if not self.s > 0:
            raise ConfigError(f"s must be > 0, got {self.s} (crossbar.SubtractionConfig)")

    @classmethod
    def ideal(cls, device: DeviceParams) -> "SubtractionConfig":
        """Midpoint factor (1 + rho) / 2 that makes weights exactly +/- (rho-1)/2."""
        return cls(s=device.ideal_subtraction)


def as_bits(vector) -> np.ndarray:
    """Coerce a 0/1 sequence (or '1001'-style string) to a bool vector."""
    if isinstance(vector, str):
        if not set(vector) <= {"0", "1"}:
            raise ValueError(f"pattern string must contain only 0/1, got {vector!r}")
        return np.frombuffer(vector.encode(), dtype=np.uint8) == ord("1")
    return np.asarray(vector).astype(bool)


def bits_to_string(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits).astype(bool))


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a flat bool vector LSB-first into uint8 bytes."""
    return np.packbits(np.asarray(bits, dtype=bool), bitorder="little")


def unpack_bits(packed: np.ndarray, n_bits: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns a bool vector of length n_bits."""
    return np.unpackbits(packed, count=n_bits, bitorder="little").astype(bool)


class SynapseArray:
    """n_out x n_in x r grid of binary MTJ states, stored bit-packed."""

    def __init__(self, n_out: int, n_in: int, r: int = 1,
                 device: DeviceParams | None = None,
                 packed: np.ndarray | None = None):
        if min(n_out, n_in, r) < 1:
            raise ConfigError(
                f"n_out, n_in, r must each be >= 1, got ({n_out}, {n_in}, {r})"
                " (crossbar.SynapseArray)"
            )
        self.n_out = int(n_out)
        self.n_in = int(n_in)
        self.r = int(r)
        self.device = device if device is not None else DeviceParams()
        self.row_bits = self.n_in * self.r
        self.row_bytes = (self.row_bits + 7) // 8
        if packed is None:
            packed = np.zeros((self.n_out, self.row_bytes), dtype=np.uint8)
        else:
            packed = np.asarray(packed, dtype=np.uint8)
            if packed.shape != (self.n_out, self.row_bytes):
                raise ValueError(
                    f"packed grid must have shape {(self.n_out, self.row_bytes)},"
                    f" got {packed.shape}"
                )
            packed = self._zero_padding(packed.copy())
        self.packed = packed

    def _zero_padding(self, packed: np.ndarray) -> np.ndarray:
        # padding bits beyond row_bits must stay zero so popcounts are exact
        tail = self.row_bits % 8
        if tail:
            packed[:, -1] &= np.uint8((1 << tail) - 1)
        return packed

    @classmethod
    def from_states(cls, states: np.ndarray, device: DeviceParams | None = None,
                    ) -> "SynapseArray":
        """Build from a bool grid of shape (n_out, n_in, r); True = P."""
        states = np.asarray(states, dtype=bool)
        if states.ndim != 3:
            raise ValueError(f"states must be 3-D (n_out, n_in, r), got {states.shape}")
        n_out, n_in, r = states.shape
        arr = cls(n_out, n_in, r, device)
        arr.packed = np.packbits(states.reshape(n_out, -1), axis=1, bitorder="little")
        return arr

    @classmethod
    def filled(cls, n_out: int, n_in: int, r: int, state: MtjState,
               device: DeviceParams | None = None) -> "SynapseArray":
        grid = np.full((n_out, n_in, r), state is MtjState.P, dtype=bool)
        return cls.from_states(grid, device)

    def states(self) -> np.ndarray:
        """Unpacked bool grid (n_out, n_in, r); True = P."""
        flat = np.unpackbits(self.packed, axis=1, count=self.row_bits,
                             bitorder="little")
        return flat.reshape(self.n_out, self.n_in, self.r).astype(bool)

    def row_states(self, row: int) -> np.ndarray:
        """Unpacked bool grid (n_in, r) of one output row."""
        self._check_row(row)
        return unpack_bits(self.packed[row], self.row_bits).reshape(self.n_in, self.r)

    def set_row_states(self, row: int, bits: np.ndarray) -> None:
        self._check_row(row)
        bits = np.asarray(bits, dtype=bool)
        if bits.shape != (self.n_in, self.r):
            raise ValueError(
                f"row states must have shape {(self.n_in, self.r)}, got {bits.shape}"
            )
        self.packed[row] = np.packbits(bits.reshape(-1), bitorder="little")

    def _check_row(self, row: int) -> None:
        if not 0 <= row < self.n_out:
            raise IndexError(f"row {row} out of range for {self.n_out} rows")

    def _check_input(self, bits: np.ndarray) -> np.ndarray:
        bits = as_bits(bits)
        if bits.shape != (self.n_in,):
            raise ValueError(
                f"input vector must have length {self.n_in}, got {bits.shape}"
            )
        return bits

    def pack_input(self, bits) -> np.ndarray:
        """Pack an input vector, replicated r times per column, to row-byte layout."""
        bits = self._check_input(bits)
        return pack_bits(np.repeat(bits, self.r))

    def program(self, row: int, pattern) -> None:
        """Deterministically write one row: P where the pattern bit is 1 (all replicas)."""
        self._check_row(row)
        bits = self._check_input(pattern)
        self.set_row_states(row, np.repeat(bits[:, None], self.r, axis=1))

    def vmm_raw(self, input_bits, noise_draws: np.ndarray | None = None,
                pool: ThreadPoolExecutor | None = None) -> np.ndarray:
        """Dendrite currents: summed conductance of active synapses per row.

        noise_draws, when given, is a unit-normal grid of shape
        (n_out, n_in, r) applied multiplicatively per read; it forces the
        slower unpacked path.  pool, when given, splits the popcount over
        contiguous row blocks (results are concatenated in row order, so
        the output is identical to the serial path).
        """
        bits = self._check_input(input_bits)
        dev = self.device
        if noise_draws is not None and dev.read_noise_sigma > 0:
            g = np.where(self.states(), dev.g_p, dev.g_ap)
            g = g * (1.0 + dev.read_noise_sigma * np.asarray(noise_draws))
            np.maximum(g, 1e-12, out=g)
            return g[:, bits, :].sum(axis=(1, 2))
        mask = pack_bits(np.repeat(bits, self.r))
        active = int(bits.sum()) * self.r
        return self.vmm_packed(mask, active, pool)

    def vmm_packed(self, mask: np.ndarray, active: int,
                   pool: ThreadPoolExecutor | None = None) -> np.ndarray:
        """:meth:`vmm_raw` for a pre-packed replicated input mask (hot path)."""
        dev = self.device
        counts = self._masked_popcount(mask, pool)
        return dev.g_ap * (active + (dev.ratio_rho - 1.0) * counts)

    def _masked_popcount(self, mask: np.ndarray,
                         pool: ThreadPoolExecutor | None) -> np.ndarray:
        if pool is None or self.n_out < 64:
            return np.bitwise_count(self.packed & mask).sum(axis=1, dtype=np.int64)
        n_blocks = pool._max_workers
        blocks = np.array_split(self.packed, n_blocks, axis=0)
        parts = pool.map(
            lambda b: np.bitwise_count(b & mask).sum(axis=1, dtype=np.int64), blocks
        )
        return np.concatenate(list(parts))

    def p_counts(self) -> np.ndarray:
        """Count of P replicas per (row, col); the pseudo-analog weight level."""
        return self.states().sum(axis=2, dtype=np.int64)

    def effective_weight(self, row: int, col: int,
                         cfg: SubtractionConfig) -> float:
        """Signed weight of one cell: sum over replicas of (conductance - s)."""
        self._check_row(row)
        if not 0 <= col < self.n_in:
            raise IndexError(f"col {col} out of range for {self.n_in} columns")
        cell = self.row_states(row)[col]
        n_p = int(cell.sum())
        dev = self.device
        return n_p * (dev.g_p - cfg.s) + (self.r - n_p) * (dev.g_ap - cfg.s)

    def weight_matrix(self, cfg: SubtractionConfig) -> np.ndarray:
        """Effective weights for all cells, shape (n_out, n_in)."""
        n_p = self.p_counts()
        dev = self.device
        return n_p * (dev.g_p - cfg.s) + (self.r - n_p) * (dev.g_ap - cfg.s)

    def copy(self) -> "SynapseArray":
        return SynapseArray(self.n_out, self.n_in, self.r, self.device,
                            packed=self.packed)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SynapseArray):
            return NotImplemented
        return (
            (self.n_out, self.n_in, self.r) == (other.n_out, other.n_in, other.r)
            and self.device == other.device
            and np.array_equal(self.packed, other.packed)
        )


def subtract(raw: np.ndarray, input_bits, cfg: SubtractionConfig,
             r: int) -> np.ndarray:
    """Signed VMM outputs: raw currents minus s * r * (count of active inputs)."""
    raw = np.asarray(raw, dtype=np.float64)
    ones = int(as_bits(input_bits).sum())
    return raw - cfg.s * r * ones


def hamming_from_output(output: float, target_ones: int, weight_magnitude: float,
                        n_pixels: int) -> int:
    """Recover the Hamming distance bin from a signed VMM output.

    With binary inputs and +/- w weights the output equals
    w * (target_ones - H), H the Hamming distance between input and the
    row's target pattern, so the nearest-level bin is the rounded
    inversion, clamped to [0, n_pixels].
    """
    if not weight_magnitude > 0:
        raise ValueError(f"weight_magnitude must be > 0, got {weight_magnitude}")
    h = int(round(target_ones - output / weight_magnitude))
    return max(0, min(n_pixels, h))
