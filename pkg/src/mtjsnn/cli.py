"""Command-line entry point for the crossbar and learning experiments.

Subcommands:

* ``vmm-demo``     - program the two 2x2 target patterns, present all 16
  inputs, and check every Hamming-distance bin.
* ``cluster-demo`` - run the two-image unsupervised clustering task and
  log every presentation and switching outcome.
* ``train-eval``   - train on an IDX dataset, label the neurons, report
  recognition accuracy; writes a snapshot, metrics, and weight maps.

Exit status: 0 success / criteria met, 1 criteria unmet, 2 usage or
configuration error, 3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import rng, snapshot
from .config import RunConfig, apply_assignments, load_config
from .crossbar import SynapseArray, bits_to_string, hamming_from_output, subtract
from .data import Corpus, binarize_matrix, builtin_corpus, load_idx
from .errors import ConfigError, IdxFormatError, SnapshotFormatError
from .network import Network, NeuronLabels
from .rng import Stream

EXIT_OK = 0
EXIT_CRITERIA = 1
EXIT_CONFIG = 2
EXIT_IO = 3

_OUTCOME_SYMBOL = {0: ".", 1: "S", 2: "x"}  # no-attempt / switched / attempted


def _load_cfg(args, preset: dict) -> RunConfig:
    cfg = RunConfig(**preset)
    if getattr(args, "config", None):
        cfg = load_config(args.config, base=cfg)
    assignments = {}
    for item in getattr(args, "set", []) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        assignments[key.strip()] = value
    cfg = apply_assignments(cfg, assignments)
    overrides = {}
    for flag, key in (
        ("seed", "seed"), ("out_dir", "out_dir"), ("epochs", "epochs"),
        ("threads", "threads"), ("train_images", "train_images"),
        ("train_labels", "train_labels"), ("test_images", "test_images"),
        ("test_labels", "test_labels"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg.validate()


def _open_records(cfg: RunConfig, args, default_name: str):
    path = getattr(args, "records", None)
    if path is None and cfg.out_dir is not None:
        path = Path(cfg.out_dir) / default_name
    if path is None:
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w")


def _emit(stream, record: dict) -> None:
    if stream is not None:
        stream.write(json.dumps(record) + "\n")


# -- vmm-demo ---------------------------------------------------------------

def cmd_vmm_demo(args) -> int:
    cfg = _load_cfg(args, preset={"n_out": 2, "n_in": 4, "theta0": 1.0})
    device = cfg.device()
    sub_cfg = cfg.subtraction()
    targets = builtin_corpus(Corpus.TARGETS)
    inputs = builtin_corpus(Corpus.ALL_INPUTS)
    array = SynapseArray(len(targets), 4, cfg.r, device)
    for row, pattern in enumerate(targets):
        array.program(row, pattern)
    w_eff = cfg.r * device.weight_magnitude
    target_ones = [int(t.sum()) for t in targets]

    records = _open_records(cfg, args, "vmm_records.jsonl")
    wrong = 0
    header = "input  " + "  ".join(
        f"| target {bits_to_string(t)}: raw     out     bin true"
        for t in targets
    )
    print(header)
    for i, inp in enumerate(inputs):
        if device.read_noise_sigma > 0:
            rows = np.arange(array.n_out)[:, None, None]
            cols = np.arange(array.n_in)[None, :, None]
            reps = np.arange(array.r)[None, None, :]
            noise = rng.normals(cfg.seed, Stream.READ_NOISE, i, rows, cols, reps)
            raw = array.vmm_raw(inp, noise_draws=noise)
        else:
            raw = array.vmm_raw(inp)
        out = subtract(raw, inp, sub_cfg, cfg.r)
        cells = []
        for j, target in enumerate(targets):
            true_h = int((inp != target).sum())
            bin_h = hamming_from_output(float(out[j]), target_ones[j], w_eff,
                                        array.n_in)
            if bin_h != true_h:
                wrong += 1
            cells.append(f"| {raw[j]:7.3f} {out[j]:7.3f}  {bin_h}   {true_h} ")
            _emit(records, {
                "record": "vmm", "input": bits_to_string(inp),
                "target": bits_to_string(target), "raw": float(raw[j]),
                "output": float(out[j]), "bin": bin_h, "true_hamming": true_h,
            })
        print(f"{bits_to_string(inp)}   " + "  ".join(cells))
    total = len(inputs) * len(targets)
    print(f"bins correct: {total - wrong}/{total}")
    _emit(records, {"record": "summary", "bins_total": total,
                    "bins_wrong": wrong})
    if records:
        records.close()
    return EXIT_OK if wrong == 0 else EXIT_CRITERIA


# -- cluster-demo -----------------------------------------------------------

_CLUSTER_PRESET = {
    "n_out": 2, "n_in": 4, "r": 1,
    "theta0": 1.0, "leak_alpha": 0.0,
    # the measured normalization keeps the shared cold-start pattern weakly
    # excitable (ideal midpoint subtraction zeroes its output exactly)
    "subtraction_s": 1.44,
    "max_cycles": 200,
}


def cluster_network(cfg: RunConfig) -> Network:
    """The two-neuron network with both rows programmed to the start pattern."""
    array = SynapseArray(cfg.n_out, cfg.n_in, cfg.r, cfg.device())
    for row in range(cfg.n_out):
        array.program(row, cfg.cluster_init)
    return Network(array, cfg.neuron_params(), cfg.stdp(), cfg.subtraction(),
                   seed=cfg.seed, threads=cfg.threads)


def cmd_cluster_demo(args) -> int:
    cfg = _load_cfg(args, preset=dict(_CLUSTER_PRESET))
    images = builtin_corpus(Corpus.CLUSTER_PAIR)
    net = cluster_network(cfg)
    result = net.run_clustering(images, order_seed=cfg.order_seed,
                                max_presentations=cfg.max_presentations,
                                max_cycles=cfg.max_cycles)
    records = _open_records(cfg, args, "cluster_events.jsonl")
    switched = attempted = 0
    print("#    image  winner cycles  synapse outcomes (S=switched,"
          " x=attempted-no-switch, .=no-attempt)")
    for rec in result.log:
        grid = rec.events.outcome_grid(net.n_in, net.array.r)
        symbols = "" if rec.winner is None else " ".join(
            "".join(_OUTCOME_SYMBOL[int(c)] for c in grid[col])
            for col in range(net.n_in)
        )
        winner = "-" if rec.winner is None else str(rec.winner)
        print(f"{rec.ordinal:<4d} {bits_to_string(images[rec.image_index])}"
              f"   {winner:<6s} {rec.cycles:<6d}  {symbols}")
        switched += rec.events.n_switched
        attempted += rec.events.n_attempted_no_switch
        _emit(records, {
            "record": "presentation", "ordinal": rec.ordinal,
            "image": bits_to_string(images[rec.image_index]),
            "winner": rec.winner, "cycles": rec.cycles,
            "outcomes": [
                [col, rep, outcome.value] for col, rep, outcome in rec.events
            ],
        })
    rows = [bits_to_string(net.array.weight_matrix(net.subtraction)[j] > 0)
            for j in range(net.n_out)]
    print(f"converged: {result.converged}  presentations:"
          f" {result.presentations_used}  switched: {switched}"
          f"  attempted-no-switch: {attempted}")
    print("final row patterns: " + " ".join(rows))
    _emit(records, {
        "record": "summary", "converged": result.converged,
        "presentations": result.presentations_used, "switched": switched,
        "attempted_no_switch": attempted, "row_patterns": rows,
    })
    if records:
        records.close()
    return EXIT_OK if result.converged else EXIT_CRITERIA


# -- train-eval -------------------------------------------------------------

def fire_entropy_bits(fire_counts: np.ndarray) -> float:
    """Shannon entropy (bits) of the normalized per-neuron fire counts."""
    total = fire_counts.sum()
    if total == 0:
        return 0.0
    p = fire_counts[fire_counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def write_pgm(path, width: int, height: int, maxval: int,
              pixels: np.ndarray) -> None:
    header = f"P5\n{width} {height}\n{maxval}\n".encode()
    Path(path).write_bytes(header + pixels.astype(np.uint8).tobytes())


def _require_datasets(cfg: RunConfig):
    missing = [name for name in ("train_images", "train_labels",
                                 "test_images", "test_labels")
               if getattr(cfg, name) is None]
    if missing:
        raise ConfigError("train-eval requires dataset paths; missing: "
                          + ", ".join(missing))


def cmd_train_eval(args) -> int:
    cfg = _load_cfg(args, preset={})
    _require_datasets(cfg)
    train = load_idx(cfg.train_images, cfg.train_labels, name="train")
    test = load_idx(cfg.test_images, cfg.test_labels, name="test")
    if len(train) == 0 or len(test) == 0:
        raise ConfigError("datasets must be non-empty")
    n_in = train.width * train.height
    cfg = dataclasses.replace(cfg, n_in=n_in).validate()
    train_bits = binarize_matrix(train.pixel_matrix(), cfg.binarize_threshold)
    test_bits = binarize_matrix(test.pixel_matrix(), cfg.binarize_threshold)

    out_dir = Path(cfg.out_dir) if cfg.out_dir else Path("train_eval_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = open(out_dir / "metrics.jsonl", "w")

    net = Network.init_random(cfg.n_out, n_in, cfg.r, cfg.device(),
                              cfg.neuron_params(), cfg.stdp(),
                              cfg.subtraction(), seed=cfg.seed,
                              threads=cfg.threads)
    print(f"network: {cfg.n_out} neurons x {n_in} inputs x r={cfg.r},"
          f" theta0={cfg.resolved_theta0():g}, seed={cfg.seed}")
    _emit(metrics, {"record": "start", "n_out": cfg.n_out, "n_in": n_in,
                    "r": cfg.r, "theta0": cfg.resolved_theta0(),
                    "seed": cfg.seed, "epochs": cfg.epochs,
                    "train_images": len(train), "test_images": len(test)})

    n_label = cfg.checkpoint_label_images
    n_eval = cfg.checkpoint_eval_images
    prev = {"switched": 0, "attempted": 0}

    def progress(done, report):
        attempts = report.switched + report.attempted_no_switch
        d_switch = report.switched - prev["switched"]
        d_attempt = attempts - prev["attempted"]
        prev["switched"], prev["attempted"] = report.switched, attempts
        record = {
            "record": "progress", "images": done,
            "timeouts": report.timeouts,
            "switched": report.switched,
            "switch_rate": d_switch / d_attempt if d_attempt else 0.0,
            "fire_entropy_bits": fire_entropy_bits(report.fires),
        }
        if n_label > 0 and n_eval > 0:
            labels = net.label_neurons(train_bits[:n_label],
                                       train.labels[:n_label],
                                       cfg.n_classes, cfg.max_cycles)
            checkpoint = net.evaluate(labels, test_bits[:n_eval],
                                      test.labels[:n_eval], cfg.n_classes,
                                      cfg.max_cycles)
            record["accuracy"] = checkpoint.accuracy
        _emit(metrics, record)
        print(f"  progress: {done} images, entropy"
              f" {record['fire_entropy_bits']:.2f} bits"
              + (f", checkpoint accuracy {record['accuracy']:.3f}"
                 if "accuracy" in record else ""))

    report = net.train(train_bits, epochs=cfg.epochs, max_cycles=cfg.max_cycles,
                       shuffle=cfg.shuffle, progress=progress,
                       progress_interval=cfg.metrics_interval)

    n_label_final = cfg.label_images if cfg.label_images > 0 else len(train_bits)
    labels = net.label_neurons(train_bits[:n_label_final],
                               train.labels[:n_label_final],
                               cfg.n_classes, cfg.max_cycles)
    result = net.evaluate(labels, test_bits, test.labels, cfg.n_classes,
                          cfg.max_cycles)

    snapshot.write(net, out_dir / "snapshot.bin")
    maps_dir = out_dir / "maps"
    maps_dir.mkdir(exist_ok=True)
    p_counts = net.array.p_counts()
    n_maps = cfg.weight_maps if cfg.weight_maps > 0 else cfg.n_out
    for j in range(min(n_maps, cfg.n_out)):
        write_pgm(maps_dir / f"neuron_{j:04d}.pgm", train.width, train.height,
                  cfg.r, p_counts[j])

    unassigned = int((labels.labels == NeuronLabels.UNASSIGNED).sum())
    _emit(metrics, {
        "record": "evaluation", "accuracy": result.accuracy,
        "correct": result.correct, "total": result.total,
        "presentations": report.presentations, "timeouts": report.timeouts,
        "switched": report.switched, "unassigned_neurons": unassigned,
        "confusion": result.confusion.tolist(),
    })
    metrics.close()
    print(f"trained {report.presentations} presentations"
          f" ({report.timeouts} timeouts, {report.switched} switches)")
    print(f"test accuracy: {result.accuracy:.4f}"
          f" ({result.correct}/{result.total},"
          f" {unassigned} unassigned neurons)")
    print(f"outputs in {out_dir}")
    return EXIT_OK


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtjsnn",
        description="Spiking-network simulator with binary stochastic"
                    " MTJ synapses",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out-dir", dest="out_dir")
        sp.add_argument("--threads", type=int)

    sp = sub.add_parser("vmm-demo",
                        help="Hamming-distance inference over all 2x2 inputs")
    common(sp)
    sp.add_argument("--records", help="write JSONL records here")
    sp.set_defaults(func=cmd_vmm_demo)

    sp = sub.add_parser("cluster-demo",
                        help="two-image unsupervised clustering task")
    common(sp)
    sp.add_argument("--records", help="write JSONL event log here")
    sp.set_defaults(func=cmd_cluster_demo)

    sp = sub.add_parser("train-eval",
                        help="train on an IDX dataset and report accuracy")
    common(sp)
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--train-images", dest="train_images")
    sp.add_argument("--train-labels", dest="train_labels")
    sp.add_argument("--test-images", dest="test_images")
    sp.add_argument("--test-labels", dest="test_labels")
    sp.set_defaults(func=cmd_train_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IdxFormatError, SnapshotFormatError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
