"""Shared fixtures: synthetic datasets, MNIST discovery, array builders."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from mtjsnn.data import GrayImage, LabeledDataset, load_idx

MNIST_ENV = "MTJSNN_MNIST_DIR"
_MNIST_FILES = {
    "train_images": ("train-images-idx3-ubyte", "train-images.idx3-ubyte"),
    "train_labels": ("train-labels-idx1-ubyte", "train-labels.idx1-ubyte"),
    "test_images": ("t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"),
    "test_labels": ("t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"),
}


def mnist_paths() -> dict[str, Path] | None:
    """Locate MNIST IDX files (plain or .gz) under $MTJSNN_MNIST_DIR or ./data/mnist."""
    root = Path(os.environ.get(MNIST_ENV, "data/mnist"))
    found = {}
    for key, names in _MNIST_FILES.items():
        for name in names:
            for suffix in ("", ".gz"):
                candidate = root / (name + suffix)
                if candidate.exists():
                    found[key] = candidate
                    break
            if key in found:
                break
        if key not in found:
            return None
    return found


def require_mnist() -> dict[str, Path]:
    paths = mnist_paths()
    if paths is None:
        pytest.skip(
            f"MNIST IDX files not found; place them under $​{MNIST_ENV}"
            " or ./data/mnist (not bundled: no dataset network access)"
        )
    return paths


@pytest.fixture(scope="session")
def mnist():
    paths = require_mnist()
    train = load_idx(paths["train_images"], paths["train_labels"], "train")
    test = load_idx(paths["test_images"], paths["test_labels"], "test")
    return train, test


def prototype_dataset(n_classes: int = 10, n_pixels: int = 784,
                      per_class: int = 50, active: int = 120,
                      flip_prob: float = 0.05, seed: int = 0,
                      width: int = 28, height: int = 28) -> LabeledDataset:
    """Clustered gray-level dataset: class prototypes plus pixel-flip noise.

    Pixels are 0 or 255 so binarizing at the default threshold recovers
    the binary patterns exactly.
    """
    gen = np.random.default_rng(seed)
    protos = np.zeros((n_classes, n_pixels), dtype=bool)
    for c in range(n_classes):
        protos[c, gen.choice(n_pixels, size=active, replace=False)] = True
    images, labels = [], []
    for c in range(n_classes):
        for _ in range(per_class):
            bits = protos[c] ^ (gen.random(n_pixels) < flip_prob)
            images.append(GrayImage(width, height,
                                    np.where(bits, 255, 0).astype(np.uint8)))
            labels.append(c)
    order = gen.permutation(len(images))
    return LabeledDataset([images[i] for i in order],
                          np.asarray(labels)[order], "prototypes")


def random_states(gen: np.random.Generator, n_out: int, n_in: int,
                  r: int) -> np.ndarray:
    return gen.random((n_out, n_in, r)) < 0.5
