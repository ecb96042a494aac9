"""Dataset ingestion: IDX parsing, binarization, built-in 2x2 corpora."""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .crossbar import as_bits
from .errors import IdxFormatError

IMAGE_MAGIC = 0x00000803  # unsigned bytes, 3 dimensions (count, rows, cols)
LABEL_MAGIC = 0x00000801  # unsigned bytes, 1 dimension (count)
_GZIP_MAGIC = b"\x1f\x8b"


@dataclass
class GrayImage:
    width: int
    height: int
    pixels: np.ndarray  # uint8, row-major, length width * height

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8).reshape(-1)
        if self.pixels.size != self.width * self.height:
            raise ValueError(
                f"pixel count {self.pixels.size} != width*height"
                f" {self.width * self.height}"
            )


@dataclass
class LabeledDataset:
    images: list[GrayImage]
    labels: np.ndarray
    name: str = ""
    _matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.images) != len(self.labels):
            raise ValueError(
                f"image count {len(self.images)} != label count {len(self.labels)}"
            )

    def __len__(self) -> int:
        return len(self.images)

    @property
    def width(self) -> int:
        return self.images[0].width if self.images else 0

    @property
    def height(self) -> int:
        return self.images[0].height if self.images else 0

    def pixel_matrix(self) -> np.ndarray:
        """All images stacked as a (count, width*height) uint8 matrix."""
        if self._matrix is None:
            self._matrix = (
                np.stack([im.pixels for im in self.images])
                if self.images
                else np.zeros((0, 0), dtype=np.uint8)
            )
        return self._matrix

    def subset(self, indices) -> "LabeledDataset":
        indices = np.asarray(indices)
        return LabeledDataset(
            [self.images[i] for i in indices], self.labels[indices], self.name
        )


def _read_file(path) -> bytes:
    data = Path(path).read_bytes()
    if data[:2] == _GZIP_MAGIC:
        data = gzip.decompress(data)
    return data


def _parse_header(data: bytes, path, magic_expected: int, n_dims: int):
    header_len = 4 + 4 * n_dims
    if len(data) < 4:
        raise IdxFormatError(path, len(data), "truncated before magic number")
    (magic,) = struct.unpack_from(">I", data, 0)
    if magic != magic_expected:
        raise IdxFormatError(
            path, 0, f"bad magic 0x{magic:08x}, expected 0x{magic_expected:08x}"
        )
    if len(data) < header_len:
        raise IdxFormatError(path, len(data), "truncated inside dimension sizes")
    dims = struct.unpack_from(f">{n_dims}I", data, 4)
    expected = header_len + int(np.prod(dims, dtype=np.int64))
    if len(data) < expected:
        raise IdxFormatError(
            path, len(data), f"truncated payload: expected {expected} bytes total"
        )
    if len(data) > expected:
        raise IdxFormatError(path, expected, "trailing bytes after payload")
    return dims, data[header_len:]


def load_idx(image_path, label_path, name: str = "") -> LabeledDataset:
    """Parse an IDX image/label file pair (gzip-compressed files accepted)."""
    img_data = _read_file(image_path)
    (count, rows, cols), payload = _parse_header(img_data, image_path, IMAGE_MAGIC, 3)
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(count, rows * cols)

    lbl_data = _read_file(label_path)
    (lbl_count,), lbl_payload = _parse_header(lbl_data, label_path, LABEL_MAGIC, 1)
    if lbl_count != count:
        raise IdxFormatError(
            label_path, 4, f"label count {lbl_count} != image count {count}"
        )
    labels = np.frombuffer(lbl_payload, dtype=np.uint8).astype(np.int64)

    images = [GrayImage(cols, rows, pixels[i]) for i in range(count)]
    ds = LabeledDataset(images, labels, name or Path(image_path).name)
    ds._matrix = pixels.copy()
    return ds


def idx_bytes(dataset: LabeledDataset) -> tuple[bytes, bytes]:
    """Serialize a dataset back to raw (image, label) IDX byte strings."""
    count = len(dataset)
    rows = dataset.height
    cols = dataset.width
    img = struct.pack(">IIII", IMAGE_MAGIC, count, rows, cols)
    img += dataset.pixel_matrix().tobytes()
    lbl = struct.pack(">II", LABEL_MAGIC, count)
    lbl += dataset.labels.astype(np.uint8).tobytes()
    return img, lbl


def save_idx(dataset: LabeledDataset, image_path, label_path,
             compress: bool = False) -> None:
    img, lbl = idx_bytes(dataset)
    if compress:
        img, lbl = gzip.compress(img), gzip.compress(lbl)
    Path(image_path).write_bytes(img)
    Path(label_path).write_bytes(lbl)


def binarize(image: GrayImage, threshold: int) -> np.ndarray:
    """Bool input vector: bit i = 1 iff pixel i >= threshold."""
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be within [0, 255], got {threshold}")
    return image.pixels >= threshold


def binarize_matrix(pixels: np.ndarray, threshold: int) -> np.ndarray:
    """Vectorized :func:`binarize` over a (count, n_pixels) matrix."""
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be within [0, 255], got {threshold}")
    return np.asarray(pixels) >= threshold


class Corpus(Enum):
    """Built-in 2x2-pixel pattern sets for the crossbar demos."""

    TARGETS = "targets"  # the two supervised target patterns
    ALL_INPUTS = "all-inputs"  # every 4-bit input pattern
    CLUSTER_PAIR = "cluster-pair"  # the two clustering-task patterns


_TARGET_PATTERNS = ("1100", "1001")
_CLUSTER_PATTERNS = ("1001", "0110")


def builtin_corpus(name: Corpus | str) -> list[np.ndarray]:
    name = Corpus(name)
    if name is Corpus.TARGETS:
        return [as_bits(p) for p in _TARGET_PATTERNS]
    if name is Corpus.CLUSTER_PAIR:
        return [as_bits(p) for p in _CLUSTER_PATTERNS]
    return [as_bits(format(v, "04b")) for v in range(16)]
