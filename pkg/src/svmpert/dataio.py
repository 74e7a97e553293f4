"""Parsers and writers for MNIST IDX, CIFAR-10 batches, LIBSVM text and
LIBLINEAR model files, plus CSV export for sweep curves.

Pixel features are scaled by 1/255 into [0, 1]; CIFAR labels are
shifted from 0..9 to 1..10 so they fit the internal 1..c convention.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from svmpert.models import BinaryLinearModel, Dataset, MulticlassLinearModel

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
CIFAR_RECORD_BYTES = 3073  # 1 label byte + 32*32*3 pixels


class DataFormatError(ValueError):
    """A file or text blob does not match its declared format."""


def load_mnist_idx(images_path, labels_path) -> Dataset:
    """Parse the big-endian IDX pair (images magic 0x00000803, labels
    magic 0x00000801) into a [0, 1]-scaled dataset with labels 0..9."""
    with open(images_path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16:
        raise DataFormatError("images file too short for an IDX header")
    magic, n, rows, cols = struct.unpack(">IIII", blob[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise DataFormatError(
            f"bad images magic 0x{magic:08X}, expected 0x{IDX_IMAGES_MAGIC:08X}"
        )
    if len(blob) != 16 + n * rows * cols:
        raise DataFormatError(
            f"images payload size mismatch: header promises {n * rows * cols} "
            f"pixel bytes, file holds {len(blob) - 16}"
        )
    pixels = np.frombuffer(blob, dtype=np.uint8, offset=16)
    X = pixels.reshape(n, rows * cols).astype(float) / 255.0

    with open(labels_path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8:
        raise DataFormatError("labels file too short for an IDX header")
    magic, n_labels = struct.unpack(">II", blob[:8])
    if magic != IDX_LABELS_MAGIC:
        raise DataFormatError(
            f"bad labels magic 0x{magic:08X}, expected 0x{IDX_LABELS_MAGIC:08X}"
        )
    if len(blob) != 8 + n_labels:
        raise DataFormatError(
            f"labels payload size mismatch: header promises {n_labels} bytes, "
            f"file holds {len(blob) - 8}"
        )
    if n_labels != n:
        raise DataFormatError(
            f"image/label count mismatch: {n} images vs {n_labels} labels"
        )
    y = np.frombuffer(blob, dtype=np.uint8, offset=8).astype(int)
    return Dataset(X, y, source="mnist")


def load_cifar10(batch_paths) -> Dataset:
    """Parse CIFAR-10 binary batches (3073-byte records); labels come out
    shifted to 1..10."""
    if isinstance(batch_paths, (str, bytes, os.PathLike)):
        batch_paths = [batch_paths]
    chunks, labels = [], []
    for path in batch_paths:
        with open(path, "rb") as fh:
            blob = fh.read()
        if len(blob) == 0 or len(blob) % CIFAR_RECORD_BYTES != 0:
            raise DataFormatError(
                f"{path}: length {len(blob)} is not a positive multiple of "
                f"{CIFAR_RECORD_BYTES}"
            )
        records = np.frombuffer(blob, dtype=np.uint8).reshape(-1, CIFAR_RECORD_BYTES)
        y = records[:, 0].astype(int)
        if (y > 9).any():
            bad = int(np.argmax(y > 9))
            raise DataFormatError(f"{path}: record {bad} has label byte {y[bad]} > 9")
        labels.append(y + 1)
        chunks.append(records[:, 1:].astype(float) / 255.0)
    return Dataset(np.vstack(chunks), np.concatenate(labels), source="cifar10")


def make_binary_subset(data: Dataset, class_a: int, class_b: int, map_a_to: int = 1) -> Dataset:
    """Rows of two classes with labels remapped to +-1 (class_a -> map_a_to)."""
    if map_a_to not in (-1, 1):
        raise ValueError("map_a_to must be -1 or +1")
    mask_a = data.labels == class_a
    mask_b = data.labels == class_b
    if not mask_a.any() or not mask_b.any():
        raise ValueError(f"both classes {class_a} and {class_b} must be present")
    mask = mask_a | mask_b
    y = np.where(data.labels[mask] == class_a, map_a_to, -map_a_to)
    return Dataset(data.samples[mask], y, data.source)


def subsample(data: Dataset, n: int, seed: int) -> Dataset:
    """Seeded without-replacement subsample of n rows."""
    if not 1 <= n <= data.n:
        raise ValueError(f"subsample size must be in 1..{data.n}")
    idx = np.sort(np.random.default_rng(seed).choice(data.n, size=n, replace=False))
    return Dataset(data.samples[idx], data.labels[idx], data.source)


def parse_libsvm(text: str, n_features: int | None = None) -> tuple[Dataset, int]:
    """Sparse ``label idx:val ...`` lines to a dense dataset.

    Indices are 1-based and must be strictly increasing within a row;
    the dimension is the largest index seen unless overridden.
    """
    rows, labels = [], []
    max_index = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = int(float(tokens[0]))
        except ValueError:
            raise DataFormatError(f"line {lineno}: non-numeric label {tokens[0]!r}")
        pairs = []
        prev = 0
        for token in tokens[1:]:
            idx_str, _, val_str = token.partition(":")
            try:
                idx, val = int(idx_str), float(val_str)
            except ValueError:
                raise DataFormatError(f"line {lineno}: bad feature token {token!r}")
            if idx <= prev:
                raise DataFormatError(
                    f"line {lineno}: indices must be strictly increasing "
                    f"(saw {idx} after {prev})"
                )
            prev = idx
            pairs.append((idx, val))
        labels.append(label)
        rows.append(pairs)
        max_index = max(max_index, prev)
    if not rows:
        raise DataFormatError("no samples found")
    p = n_features if n_features is not None else max_index
    if p < max_index:
        raise DataFormatError(f"n_features={p} smaller than max index {max_index}")
    X = np.zeros((len(rows), p))
    for i, pairs in enumerate(rows):
        for idx, val in pairs:
            X[i, idx - 1] = val
    return Dataset(X, np.array(labels), source="libsvm"), p


def serialize_libsvm(data: Dataset) -> str:
    """Inverse of parse_libsvm for rows without explicit zeros."""
    lines = []
    for row, label in zip(data.samples, data.labels):
        feats = " ".join(f"{j + 1}:{float(v)!r}" for j, v in enumerate(row) if v != 0.0)
        lines.append(f"{label} {feats}".rstrip())
    return "\n".join(lines) + "\n"


_LIBLINEAR_HEADER_KEYS = {"solver_type", "nr_class", "label", "nr_feature", "bias"}


def parse_liblinear_model(text: str):
    """LIBLINEAR text model to a linear model.

    Binary files (nr_class = 2, one weight column) honor the ``label``
    order: the first listed label is the one predicted on positive
    decision values, so w and b are negated when it is the negative
    label.  Multiclass files map the l-th listed label to internal class
    l.  When the bias header is >= 0 the final weight row is the
    intercept row and b = bias * row value.
    """
    header: dict = {}
    lines = iter(text.splitlines())
    saw_w = False
    for line in lines:
        line = line.strip()
        if not line:
            continue
        if line == "w":
            saw_w = True
            break
        key, _, value = line.partition(" ")
        if key not in _LIBLINEAR_HEADER_KEYS:
            raise DataFormatError(f"unknown model header key {key!r}")
        header[key] = value.strip()
    if not saw_w:
        raise DataFormatError("model file has no 'w' section")
    for key in ("nr_class", "nr_feature", "bias", "label"):
        if key not in header:
            raise DataFormatError(f"model file missing header {key!r}")

    nr_class = int(header["nr_class"])
    nr_feature = int(header["nr_feature"])
    bias = float(header["bias"])
    label_order = [int(float(t)) for t in header["label"].split()]
    if len(label_order) != nr_class:
        raise DataFormatError("label line length must equal nr_class")

    n_cols = 1 if nr_class == 2 else nr_class
    n_rows = nr_feature + (1 if bias >= 0 else 0)
    rows = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        values = [float(t) for t in line.split()]
        if len(values) != n_cols:
            raise DataFormatError(
                f"weight row has {len(values)} values, expected {n_cols}"
            )
        rows.append(values)
    if len(rows) != n_rows:
        raise DataFormatError(f"weight block has {len(rows)} rows, expected {n_rows}")
    W = np.array(rows)

    if nr_class == 2:
        w = W[:nr_feature, 0]
        b = bias * W[nr_feature, 0] if bias >= 0 else 0.0
        # Positive decision values predict label_order[0]; our +1 plays that
        # role, so flip signs when the file lists the -1 label first.  Label
        # pairs other than {-1, +1} map their first-listed label to +1.
        if set(label_order) == {-1, 1} and label_order[0] == -1:
            w, b = -w, -b
        return BinaryLinearModel(w, b)

    weights = W[:nr_feature, :]
    if bias >= 0:
        # Crammer-Singer imports are bias-free by construction; an intercept
        # row would silently change predictions, so refuse it.
        if np.any(W[nr_feature, :] != 0.0):
            raise DataFormatError("multiclass models with bias rows are unsupported")
    return MulticlassLinearModel(weights, class_labels=tuple(label_order))


def write_liblinear_model(model) -> str:
    """Linear model to LIBLINEAR text, float values in full precision so
    write -> parse is exact."""
    if isinstance(model, BinaryLinearModel):
        lines = [
            "solver_type L2R_L1LOSS_SVC_DUAL",
            "nr_class 2",
            "label 1 -1",
            f"nr_feature {model.p}",
            "bias 1",
            "w",
        ]
        lines += [repr(float(v)) for v in model.w]
        lines.append(repr(float(model.b)))
        return "\n".join(lines) + "\n"
    labels = model.class_labels or tuple(range(1, model.c + 1))
    lines = [
        "solver_type MCSVM_CS",
        f"nr_class {model.c}",
        "label " + " ".join(str(l) for l in labels),
        f"nr_feature {model.p}",
        "bias -1",
        "w",
    ]
    for row in model.weights:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def export_curve_csv(curve, path) -> None:
    """``xi,fooling_rate`` header plus one full-precision row per point."""
    if not curve.points:
        raise ValueError("cannot export an empty curve")
    with open(path, "w") as fh:
        fh.write("xi,fooling_rate\n")
        for xi, rate in curve.points:
            fh.write(f"{xi!r},{rate!r}\n")


def parse_curve_csv(path) -> list[tuple[float, float]]:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "xi,fooling_rate":
            raise DataFormatError(f"unexpected CSV header {header!r}")
        points = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            xi_str, _, rate_str = line.partition(",")
            points.append((float(xi_str), float(rate_str)))
    return points
