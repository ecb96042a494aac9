"""Simulator of spiking networks with binary stochastic MTJ synapses."""

from .config import RunConfig, load_config, parse_config_text
from .crossbar import (
    SubtractionConfig,
    SynapseArray,
    as_bits,
    bits_to_string,
    hamming_from_output,
    subtract,
)
from .data import (
    Corpus,
    GrayImage,
    LabeledDataset,
    binarize,
    binarize_matrix,
    builtin_corpus,
    load_idx,
    save_idx,
)
from .device import (
    DeviceParams,
    MtjState,
    PulseKind,
    SwitchingMode,
    SwitchingModel,
    SwitchOutcome,
    apply_pulse,
    conductance,
    switching_probability,
)
from .errors import ConfigError, IdxFormatError, SnapshotFormatError
from .learning import ActivityTrace, StdpConfig, SwitchEvents, apply_stdp, select_pulses
from .network import (
    ClusteringResult,
    EvalResult,
    Network,
    NeuronLabels,
    PresentationResult,
    TrainReport,
    auto_theta0,
)
from .neuron import (
    LifNeuron,
    NeuronParams,
    homeostasis_update,
    integrate_step,
    post_fire_reset,
    select_winner,
)

__version__ = "0.1.0"

__all__ = [
    "ActivityTrace", "ClusteringResult", "ConfigError", "Corpus",
    "DeviceParams", "EvalResult", "GrayImage", "IdxFormatError",
    "LabeledDataset", "LifNeuron", "MtjState", "Network", "NeuronLabels",
    "NeuronParams", "PresentationResult", "PulseKind", "RunConfig",
    "SnapshotFormatError", "StdpConfig", "SubtractionConfig", "SwitchEvents",
    "SwitchOutcome", "SwitchingMode", "SwitchingModel", "SynapseArray",
    "TrainReport", "apply_pulse", "apply_stdp", "as_bits", "auto_theta0",
    "binarize", "binarize_matrix", "bits_to_string", "builtin_corpus",
    "conductance", "hamming_from_output", "homeostasis_update",
    "integrate_step", "load_config", "load_idx", "parse_config_text",
    "post_fire_reset", "save_idx", "select_pulses", "select_winner",
    "subtract", "switching_probability",
]
