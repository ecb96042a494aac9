"""Binary network snapshot format.

Layout (all integers little-endian):

    magic   8 bytes  b"MTJSNN01"
    version u32      currently 1
    n_out, n_in, r, seed, cycle   u64 each
    states  n_out rows of ceil(n_in*r/8) bytes: bit 1 = P, row-major,
            replica innermost, LSB-first within each byte, rows padded
            to a byte boundary
    per neuron, in row order: threshold f64, integration f64

Dynamics parameters are not stored; restoring a network needs the same
configuration it was built with.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .crossbar import SubtractionConfig, SynapseArray
from .device import DeviceParams
from .errors import SnapshotFormatError
from .learning import StdpConfig
from .network import Network
from .neuron import NeuronParams

MAGIC = b"MTJSNN01"
VERSION = 1
_HEADER = struct.Struct("<8sI5Q")


def to_bytes(net: Network) -> bytes:
    header = _HEADER.pack(MAGIC, VERSION, net.n_out, net.n_in, net.array.r,
                          net.seed, net.cycle)
    neurons = np.empty((net.n_out, 2), dtype="<f8")
    neurons[:, 0] = net.thresholds
    neurons[:, 1] = net.integration
    return header + net.array.packed.tobytes() + neurons.tobytes()


def write(net: Network, path) -> None:
    Path(path).write_bytes(to_bytes(net))


@dataclass
class SnapshotState:
    n_out: int
    n_in: int
    r: int
    seed: int
    cycle: int
    packed: np.ndarray
    thresholds: np.ndarray
    integration: np.ndarray


def parse(data: bytes) -> SnapshotState:
    if len(data) < _HEADER.size:
        raise SnapshotFormatError(f"snapshot truncated at {len(data)} bytes")
    magic, version, n_out, n_in, r, seed, cycle = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad snapshot magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    row_bytes = (n_in * r + 7) // 8
    states_len = n_out * row_bytes
    neurons_len = n_out * 16
    expected = _HEADER.size + states_len + neurons_len
    if len(data) != expected:
        raise SnapshotFormatError(
            f"snapshot length {len(data)} != expected {expected}"
        )
    packed = np.frombuffer(
        data, dtype=np.uint8, count=states_len, offset=_HEADER.size
    ).reshape(n_out, row_bytes).copy()
    neurons = np.frombuffer(
        data, dtype="<f8", count=2 * n_out, offset=_HEADER.size + states_len
    ).reshape(n_out, 2)
    return SnapshotState(n_out, n_in, r, seed, cycle, packed,
                         neurons[:, 0].copy(), neurons[:, 1].copy())


def restore(source, neuron_params: NeuronParams,
            stdp: StdpConfig | None = None,
            device: DeviceParams | None = None,
            subtraction: SubtractionConfig | None = None,
            threads: int = 1) -> Network:
    """Rebuild a Network from snapshot bytes or a file path."""
    data = source if isinstance(source, (bytes, bytearray)) \
        else Path(source).read_bytes()
    state = parse(bytes(data))
    array = SynapseArray(state.n_out, state.n_in, state.r,
                         device if device is not None else DeviceParams(),
                         packed=state.packed)
    net = Network(array, neuron_params,
                  stdp if stdp is not None else StdpConfig(),
                  subtraction, seed=state.seed, threads=threads)
    net.cycle = state.cycle
    net.thresholds = state.thresholds.astype(np.float64)
    net.integration = state.integration.astype(np.float64)
    return net
