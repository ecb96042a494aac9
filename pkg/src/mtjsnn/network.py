"""Synchronous simulation state machine: presentations, training, labeling.

One presentation holds a binary image as DC input for up to max_cycles
clock cycles.  Each cycle computes the crossbar VMM, subtracts the
active-input correction, integrates every output neuron, and checks the
winner-take-all rule.  The first fire ends the presentation: the winner
row optionally learns via stochastic STDP, all integrations reset, and
thresholds adapt.  A timeout ends the presentation with no learning and
no reset.

All stochastic draws are counter-keyed by (seed, stream, global cycle,
row, col, replica), so a run is a pure function of (seed, config,
dataset) regardless of thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .crossbar import SubtractionConfig, SynapseArray, as_bits
from .device import DeviceParams
from .learning import ActivityTrace, StdpConfig, SwitchEvents, apply_stdp, select_pulses
from .neuron import LifNeuron, NeuronParams, homeostasis_array, winner_from_arrays
from .rng import Stream


@dataclass
class PresentationResult:
    winner: int | None
    cycles_elapsed: int
    final_outputs: np.ndarray
    switch_events: SwitchEvents


@dataclass
class PresentationRecord:
    ordinal: int
    image_index: int
    winner: int | None
    cycles: int
    events: SwitchEvents


@dataclass
class ClusteringResult:
    converged: bool
    presentations_used: int
    log: list[PresentationRecord]


@dataclass
class TrainReport:
    presentations: int = 0
    fires: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    timeouts: int = 0
    switched: int = 0
    attempted_no_switch: int = 0
    no_attempt: int = 0


@dataclass
class NeuronLabels:
    """Per-neuron class labels; UNASSIGNED for neurons that never won."""

    labels: np.ndarray  # int64, UNASSIGNED = -1
    win_counts: np.ndarray  # (n_out, n_classes)

    UNASSIGNED = -1


@dataclass
class EvalResult:
    accuracy: float
    confusion: np.ndarray  # (n_classes, n_classes + 1); last col = no prediction
    correct: int
    total: int


class Network:
    """Crossbar + LIF neurons + STDP rule + deterministic RNG streams."""

    def __init__(self, array: SynapseArray, neuron_params: NeuronParams,
                 stdp: StdpConfig, subtraction: SubtractionConfig | None = None,
                 seed: int = 0, threads: int = 1):
        self.array = array
        self.neuron_params = neuron_params
        self.stdp = stdp
        self.subtraction = (subtraction if subtraction is not None
                            else SubtractionConfig.ideal(array.device))
        self.seed = int(seed)
        self.threads = max(1, int(threads))
        self.cycle = 0
        n = array.n_out
        self.integration = np.zeros(n, dtype=np.float64)
        self.thresholds = np.full(n, neuron_params.theta0, dtype=np.float64)
        self.fired_count = np.zeros(n, dtype=np.int64)
        self.trace = ActivityTrace.empty(array.n_in)
        self._pool: ThreadPoolExecutor | None = None
        # broadcast index grids for counter-keyed per-synapse draws
        self._col_idx = np.arange(array.n_in, dtype=np.int64)[:, None]
        self._rep_idx = np.arange(array.r, dtype=np.int64)[None, :]

    # -- construction ------------------------------------------------------

    @classmethod
    def init_random(cls, n_out: int, n_in: int, r: int = 1,
                    device: DeviceParams | None = None,
                    neuron_params: NeuronParams | None = None,
                    stdp: StdpConfig | None = None,
                    subtraction: SubtractionConfig | None = None,
                    seed: int = 0, threads: int = 1) -> "Network":
        """Each synapse independently P with probability 1/2 from the seed."""
        device = device if device is not None else DeviceParams()
        rows = np.arange(n_out, dtype=np.int64)[:, None, None]
        cols = np.arange(n_in, dtype=np.int64)[None, :, None]
        reps = np.arange(r, dtype=np.int64)[None, None, :]
        states = rng.uniforms(seed, Stream.INIT, rows, cols, reps) < 0.5
        array = SynapseArray.from_states(states, device)
        return cls(
            array,
            neuron_params if neuron_params is not None else NeuronParams(),
            stdp if stdp is not None else StdpConfig(),
            subtraction, seed=seed, threads=threads,
        )

    # -- helpers -----------------------------------------------------------

    @property
    def n_out(self) -> int:
        return self.array.n_out

    @property
    def n_in(self) -> int:
        return self.array.n_in

    @property
    def neurons(self) -> list[LifNeuron]:
        """Snapshot of the neuron states as value objects."""
        return [
            LifNeuron(float(u), float(t), int(f))
            for u, t, f in zip(self.integration, self.thresholds, self.fired_count)
        ]

    def copy(self) -> "Network":
        dup = Network(self.array.copy(), self.neuron_params, self.stdp,
                      self.subtraction, self.seed, self.threads)
        dup.cycle = self.cycle
        dup.integration = self.integration.copy()
        dup.thresholds = self.thresholds.copy()
        dup.fired_count = self.fired_count.copy()
        dup.trace = self.trace.copy()
        return dup

    def _get_pool(self) -> ThreadPoolExecutor | None:
        if self.threads <= 1:
            return None
        if self._pool is None:
            self._pool = ThreadPoolExecutor(max_workers=self.threads)
        return self._pool

    def _noise_draws(self) -> np.ndarray | None:
        if self.array.device.read_noise_sigma <= 0:
            return None
        rows = np.arange(self.n_out, dtype=np.int64)[:, None, None]
        return rng.normals(self.seed, Stream.READ_NOISE, self.cycle, rows,
                           self._col_idx[None, :, :], self._rep_idx[None, :, :])

    def _outputs(self, bits: np.ndarray, mask: np.ndarray, active: int) -> np.ndarray:
        noise = self._noise_draws()
        if noise is not None:
            raw = self.array.vmm_raw(bits, noise_draws=noise, pool=self._get_pool())
        else:
            raw = self.array.vmm_packed(mask, active, pool=self._get_pool())
        return raw - self.subtraction.s * active

    # -- presentation ------------------------------------------------------

    def present(self, image, learn: bool = False,
                max_cycles: int = 50) -> PresentationResult:
        """Hold one binary image as input until a fire or max_cycles."""
        bits = as_bits(image)
        if bits.shape != (self.n_in,):
            raise ValueError(
                f"image must have length {self.n_in}, got {bits.shape}"
            )
        mask = self.array.pack_input(bits)
        active = int(bits.sum()) * self.array.r
        return self._present_packed(bits, mask, active, learn, max_cycles)

    def _present_packed(self, bits: np.ndarray, mask: np.ndarray, active: int,
                        learn: bool, max_cycles: int) -> PresentationResult:
        if max_cycles < 1:
            raise ValueError(f"max_cycles must be >= 1, got {max_cycles}")
        noisy = self.array.device.read_noise_sigma > 0
        alpha = self.neuron_params.leak_alpha
        u = self.integration
        out = None
        winner = None
        step = 0
        while step < max_cycles:
            step += 1
            self.cycle += 1
            if out is None or noisy:
                out = self._outputs(bits, mask, active)
            u *= 1.0 - alpha
            u += out
            np.maximum(u, 0.0, out=u)
            winner = winner_from_arrays(u, self.thresholds)
            if winner is not None:
                break
        # static DC input: columns active this presentation were active at
        # every one of its cycles, so observing once at the end is exact
        self.trace.observe(bits, self.cycle)
        events = SwitchEvents.empty()
        if winner is None:
            return PresentationResult(None, step, out.copy(), events)
        if learn:
            pot = select_pulses(self.trace, self.cycle, self.stdp)
            draws = rng.uniforms(self.seed, Stream.LEARN, self.cycle, winner,
                                 self._col_idx, self._rep_idx)
            events = apply_stdp(self.array, winner, pot, self.stdp, draws)
        u[:] = 0.0
        self.thresholds = homeostasis_array(self.thresholds, winner,
                                            self.neuron_params)
        self.fired_count[winner] += 1
        return PresentationResult(winner, step, out.copy(), events)

    # -- clustering --------------------------------------------------------

    def matches_image(self, image) -> np.ndarray:
        """Per-row flag: the row's effective-weight sign pattern equals the image."""
        bits = as_bits(image)
        w = self.array.weight_matrix(self.subtraction)
        decisive = (w != 0.0).all(axis=1)
        return decisive & ((w > 0.0) == bits).all(axis=1)

    def clustering_converged(self, images) -> bool:
        """Every image is recognized by a distinct row (exact pattern match).

        Distinct images have disjoint matching-row sets, so one matching
        row per image already yields a one-to-one assignment.
        """
        return all(self.matches_image(img).any() for img in images)

    def run_clustering(self, images, order_seed: int | None = None,
                       max_presentations: int = 200, max_cycles: int = 200,
                       collect_log: bool = True) -> ClusteringResult:
        """Present images in seeded random order until the rows encode them.

        The order is a fresh random permutation of the image set per
        round, so every image appears once before any repeats.
        """
        images = [as_bits(img) for img in images]
        patterns = {img.tobytes() for img in images}
        if len(patterns) != len(images):
            raise ValueError("clustering images must be distinct")
        if len(images) > self.n_out:
            raise ValueError(
                f"need at least as many output rows as images"
                f" ({self.n_out} < {len(images)})"
            )
        order_seed = self.seed if order_seed is None else int(order_seed)
        gen = rng.spawn_generator(order_seed, Stream.PRESENTATION_ORDER)
        log: list[PresentationRecord] = []
        used = 0
        queue: list[int] = []
        converged = self.clustering_converged(images)
        while not converged and used < max_presentations:
            if not queue:
                queue = [int(i) for i in gen.permutation(len(images))]
            idx = queue.pop(0)
            res = self.present(images[idx], learn=True, max_cycles=max_cycles)
            used += 1
            if collect_log:
                log.append(PresentationRecord(used, idx, res.winner,
                                              res.cycles_elapsed,
                                              res.switch_events))
            if res.switch_events.n_switched:
                converged = self.clustering_converged(images)
        return ClusteringResult(converged, used, log)

    # -- training / labeling / evaluation ----------------------------------

    def _prepare(self, bits_matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        bits = np.asarray(bits_matrix, dtype=bool)
        if bits.ndim != 2 or bits.shape[1] != self.n_in:
            raise ValueError(
                f"dataset must be 2-D with {self.n_in} columns, got {bits.shape}"
            )
        if len(bits) == 0:
            raise ValueError("dataset must not be empty")
        r = self.array.r
        masks = np.packbits(np.repeat(bits, r, axis=1), axis=1, bitorder="little")
        active = bits.sum(axis=1, dtype=np.int64) * r
        return bits, masks, active

    def train(self, bits_matrix, epochs: int = 1, max_cycles: int = 50,
              shuffle: bool = False, progress=None,
              progress_interval: int = 0) -> TrainReport:
        """Present every dataset image with learning on, for `epochs` passes.

        progress, when given, is called as progress(images_done, report)
        every progress_interval presentations.
        """
        bits, masks, active = self._prepare(bits_matrix)
        if epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {epochs}")
        report = TrainReport(fires=np.zeros(self.n_out, dtype=np.int64))
        done = 0
        for epoch in range(epochs):
            if shuffle:
                order = rng.spawn_generator(self.seed, Stream.SHUFFLE,
                                            epoch).permutation(len(bits))
            else:
                order = np.arange(len(bits))
            for i in order:
                res = self._present_packed(bits[i], masks[i], int(active[i]),
                                           True, max_cycles)
                report.presentations += 1
                done += 1
                if res.winner is None:
                    report.timeouts += 1
                else:
                    report.fires[res.winner] += 1
                    ev = res.switch_events
                    report.switched += ev.n_switched
                    report.attempted_no_switch += ev.n_attempted_no_switch
                    report.no_attempt += ev.n_no_attempt
                if progress is not None and progress_interval > 0 \
                        and done % progress_interval == 0:
                    progress(done, report)
        return report

    def label_neurons(self, bits_matrix, class_labels, n_classes: int = 10,
                      max_cycles: int = 50) -> NeuronLabels:
        """Label each neuron by the class it wins most often (learning off).

        Runs on an internal copy, so the trained network is not altered;
        thresholds still adapt within the labeling pass itself.
        """
        sim = self.copy()
        bits, masks, active = sim._prepare(bits_matrix)
        class_labels = np.asarray(class_labels, dtype=np.int64)
        wins = np.zeros((self.n_out, n_classes), dtype=np.int64)
        for i in range(len(bits)):
            res = sim._present_packed(bits[i], masks[i], int(active[i]),
                                      False, max_cycles)
            if res.winner is not None:
                wins[res.winner, class_labels[i]] += 1
        labels = np.argmax(wins, axis=1).astype(np.int64)  # ties: lower class
        labels[wins.sum(axis=1) == 0] = NeuronLabels.UNASSIGNED
        return NeuronLabels(labels, wins)

    def evaluate(self, labels: NeuronLabels, bits_matrix, class_labels,
                 n_classes: int = 10, max_cycles: int = 50) -> EvalResult:
        """Accuracy of winner-label prediction over a test set (learning off).

        Timeouts and wins by unassigned neurons count as incorrect; they
        fill the extra final confusion column so each row still sums to
        the per-class test count.  Runs on an internal copy.
        """
        sim = self.copy()
        bits, masks, active = sim._prepare(bits_matrix)
        class_labels = np.asarray(class_labels, dtype=np.int64)
        confusion = np.zeros((n_classes, n_classes + 1), dtype=np.int64)
        for i in range(len(bits)):
            res = sim._present_packed(bits[i], masks[i], int(active[i]),
                                      False, max_cycles)
            pred = n_classes  # no prediction
            if res.winner is not None:
                lab = int(labels.labels[res.winner])
                if lab != NeuronLabels.UNASSIGNED:
                    pred = lab
            confusion[class_labels[i], pred] += 1
        correct = int(np.trace(confusion[:, :n_classes]))
        total = len(bits)
        return EvalResult(correct / total, confusion, correct, total)


def auto_theta0(n_in: int, r: int, device: DeviceParams) -> float:
    """Baseline threshold scaled so time-to-fire is roughly size-independent.

    Half the dendrite output of an input with half the pixels active that
    fully matches the row, i.e. n_in * r * g_ap * (rho - 1) / 8.
    """
    return n_in * r * device.weight_magnitude / 4.0
