import struct

import numpy as np
import pytest

from svmpert.dataio import (
    CIFAR_RECORD_BYTES,
    DataFormatError,
    export_curve_csv,
    load_cifar10,
    load_mnist_idx,
    make_binary_subset,
    parse_curve_csv,
    parse_liblinear_model,
    parse_libsvm,
    serialize_libsvm,
    subsample,
    write_liblinear_model,
)
from svmpert.evaluate import SweepCurve
from svmpert.models import BinaryLinearModel, Dataset, MulticlassLinearModel

from conftest import random_binary_model, random_multiclass_model


def write_idx_pair(tmp_path, images, labels):
    """Serialize uint8 images (n, rows, cols) and labels (n,) as IDX files."""
    n, rows, cols = images.shape
    img_path = tmp_path / "images-idx3-ubyte"
    lbl_path = tmp_path / "labels-idx1-ubyte"
    img_path.write_bytes(struct.pack(">IIII", 0x00000803, n, rows, cols) + images.tobytes())
    lbl_path.write_bytes(struct.pack(">II", 0x00000801, n) + labels.tobytes())
    return img_path, lbl_path


class TestIdx:
    def test_full_size_shapes(self, tmp_path, rng):
        # Same dimensions as the canonical handwritten-digit sets.
        images = rng.integers(0, 256, size=(60000, 28, 28), dtype=np.uint8)
        labels = rng.integers(0, 10, size=60000, dtype=np.uint8)
        data = load_mnist_idx(*write_idx_pair(tmp_path, images, labels))
        assert data.samples.shape == (60000, 784)
        assert data.samples.min() >= 0.0 and data.samples.max() <= 1.0
        assert np.array_equal(data.labels, labels)

    def test_pixel_scaling_exact(self, tmp_path):
        images = np.array([[[0, 255], [51, 102]]], dtype=np.uint8)
        labels = np.array([7], dtype=np.uint8)
        data = load_mnist_idx(*write_idx_pair(tmp_path, images, labels))
        assert np.array_equal(data.samples[0], [0.0, 1.0, 0.2, 0.4])

    def test_bad_images_magic(self, tmp_path):
        images = np.zeros((1, 2, 2), dtype=np.uint8)
        labels = np.zeros(1, dtype=np.uint8)
        img, lbl = write_idx_pair(tmp_path, images, labels)
        img.write_bytes(struct.pack(">IIII", 0x00000804, 1, 2, 2) + images.tobytes())
        with pytest.raises(DataFormatError, match="magic"):
            load_mnist_idx(img, lbl)

    def test_truncated_payload(self, tmp_path):
        images = np.zeros((2, 2, 2), dtype=np.uint8)
        labels = np.zeros(2, dtype=np.uint8)
        img, lbl = write_idx_pair(tmp_path, images, labels)
        img.write_bytes(img.read_bytes()[:-1])
        with pytest.raises(DataFormatError, match="size mismatch"):
            load_mnist_idx(img, lbl)

    def test_count_mismatch(self, tmp_path):
        images = np.zeros((2, 2, 2), dtype=np.uint8)
        img, _ = write_idx_pair(tmp_path, images, np.zeros(2, dtype=np.uint8))
        lbl = tmp_path / "short-labels"
        lbl.write_bytes(struct.pack(">II", 0x00000801, 3) + bytes(3))
        with pytest.raises(DataFormatError, match="count mismatch"):
            load_mnist_idx(img, lbl)

    def test_header_too_short(self, tmp_path):
        img = tmp_path / "stub"
        img.write_bytes(b"\x00\x00")
        with pytest.raises(DataFormatError, match="too short"):
            load_mnist_idx(img, img)


class TestCifar:
    @staticmethod
    def write_batch(path, labels, pixel=128):
        records = b""
        for lbl in labels:
            records += bytes([lbl]) + bytes([pixel]) * (CIFAR_RECORD_BYTES - 1)
        path.write_bytes(records)

    def test_full_batch(self, tmp_path, rng):
        labels = rng.integers(0, 10, size=10000).tolist()
        path = tmp_path / "data_batch_1.bin"
        self.write_batch(path, labels)
        data = load_cifar10(path)
        assert data.samples.shape == (10000, 3072)
        assert np.array_equal(data.labels, np.asarray(labels) + 1)
        assert np.allclose(data.samples, 128.0 / 255.0)

    def test_label_shift(self, tmp_path):
        path = tmp_path / "two.bin"
        self.write_batch(path, [0, 9])
        data = load_cifar10(path)
        assert data.labels.tolist() == [1, 10]

    def test_multiple_batches_concatenate(self, tmp_path):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        self.write_batch(a, [1], pixel=10)
        self.write_batch(b, [2, 3], pixel=20)
        data = load_cifar10([a, b])
        assert data.n == 3
        assert data.labels.tolist() == [2, 3, 4]

    def test_ragged_file_rejected(self, tmp_path):
        path = tmp_path / "ragged.bin"
        path.write_bytes(bytes(CIFAR_RECORD_BYTES + 1))
        with pytest.raises(DataFormatError, match="multiple"):
            load_cifar10(path)

    def test_bad_label_byte(self, tmp_path):
        path = tmp_path / "bad.bin"
        self.write_batch(path, [3, 12])
        with pytest.raises(DataFormatError, match="record 1"):
            load_cifar10(path)


class TestSubsetting:
    def test_binary_subset_remap(self):
        data = Dataset(np.arange(10.0).reshape(5, 2), np.array([1, 4, 9, 4, 1]))
        sub = make_binary_subset(data, class_a=1, class_b=9)
        assert sub.n == 3
        assert sub.labels.tolist() == [1, -1, 1]
        sub2 = make_binary_subset(data, class_a=1, class_b=9, map_a_to=-1)
        assert sub2.labels.tolist() == [-1, 1, -1]

    def test_missing_class_rejected(self):
        data = Dataset(np.zeros((2, 1)), np.array([1, 1]))
        with pytest.raises(ValueError):
            make_binary_subset(data, 1, 2)

    def test_subsample_deterministic_without_replacement(self, rng):
        data = Dataset(rng.standard_normal((100, 3)), np.arange(100))
        a = subsample(data, 30, seed=7)
        b = subsample(data, 30, seed=7)
        assert np.array_equal(a.labels, b.labels)
        assert len(set(a.labels.tolist())) == 30
        with pytest.raises(ValueError):
            subsample(data, 101, seed=0)


class TestLibsvm:
    def test_basic_parse(self):
        data, p = parse_libsvm("1 1:0.5 3:-2\n-1 2:1\n")
        assert p == 3
        assert np.array_equal(data.samples, [[0.5, 0.0, -2.0], [0.0, 1.0, 0.0]])
        assert data.labels.tolist() == [1, -1]

    def test_explicit_dimension(self):
        data, p = parse_libsvm("1 1:1\n", n_features=5)
        assert p == 5 and data.samples.shape == (1, 5)
        with pytest.raises(DataFormatError):
            parse_libsvm("1 4:1\n", n_features=3)

    def test_round_trip(self, rng):
        X = np.round(rng.standard_normal((20, 6)), 3)
        X[rng.random((20, 6)) < 0.5] = 0.0
        X[:, 0] = 1.0  # keep the max index stable
        X[0, 5] = 2.0
        data = Dataset(X, rng.integers(1, 4, size=20))
        back, p = parse_libsvm(serialize_libsvm(data), n_features=6)
        assert p == 6
        assert np.array_equal(back.samples, data.samples)
        assert np.array_equal(back.labels, data.labels)

    def test_error_cases(self):
        with pytest.raises(DataFormatError, match="line 1"):
            parse_libsvm("abc 1:1\n")
        with pytest.raises(DataFormatError, match="line 2"):
            parse_libsvm("1 1:1\n1 1:x\n")
        with pytest.raises(DataFormatError, match="increasing"):
            parse_libsvm("1 2:1 2:3\n")
        with pytest.raises(DataFormatError, match="no samples"):
            parse_libsvm("\n\n")


class TestLiblinear:
    def test_binary_round_trip_exact(self, rng):
        model = random_binary_model(rng, 7)
        back = parse_liblinear_model(write_liblinear_model(model))
        assert np.array_equal(back.w, model.w)
        assert back.b == model.b

    def test_multiclass_round_trip_exact(self, rng):
        model = random_multiclass_model(rng, 5, 4)
        back = parse_liblinear_model(write_liblinear_model(model))
        assert np.array_equal(back.weights, model.weights)
        assert back.class_labels == (1, 2, 3, 4)

    def test_label_order_sign_fix(self):
        text = (
            "solver_type L2R_L1LOSS_SVC_DUAL\n"
            "nr_class 2\nlabel -1 1\nnr_feature 2\nbias 1\nw\n"
            "0.5\n-0.25\n0.75\n"
        )
        model = parse_liblinear_model(text)
        # -1 listed first: positive decision values mean -1, so flip.
        assert np.array_equal(model.w, [-0.5, 0.25])
        assert model.b == -0.75

    def test_no_bias_row(self):
        text = (
            "solver_type L2R_L1LOSS_SVC_DUAL\n"
            "nr_class 2\nlabel 1 -1\nnr_feature 2\nbias -1\nw\n"
            "1.5\n-2.0\n"
        )
        model = parse_liblinear_model(text)
        assert np.array_equal(model.w, [1.5, -2.0])
        assert model.b == 0.0

    def test_bias_scales_intercept_row(self):
        text = (
            "solver_type L2R_L1LOSS_SVC_DUAL\n"
            "nr_class 2\nlabel 1 -1\nnr_feature 1\nbias 2\nw\n"
            "1.0\n0.5\n"
        )
        assert parse_liblinear_model(text).b == 1.0

    def test_structural_errors(self):
        with pytest.raises(DataFormatError, match="no 'w' section"):
            parse_liblinear_model("nr_class 2\nbias -1\n")
        with pytest.raises(DataFormatError, match="unknown model header"):
            parse_liblinear_model("nonsense 3\nw\n")
        with pytest.raises(DataFormatError, match="missing header"):
            parse_liblinear_model("nr_class 2\nnr_feature 1\nbias -1\nw\n1.0\n")
        base = "solver_type X\nnr_class 2\nlabel 1 -1\nnr_feature 2\nbias -1\nw\n"
        with pytest.raises(DataFormatError, match="rows"):
            parse_liblinear_model(base + "1.0\n")
        with pytest.raises(DataFormatError, match="values"):
            parse_liblinear_model(base + "1.0 2.0\n3.0 4.0\n")

    def test_multiclass_bias_row_rejected(self):
        text = (
            "solver_type MCSVM_CS\n"
            "nr_class 3\nlabel 1 2 3\nnr_feature 1\nbias 1\nw\n"
            "1.0 0.0 -1.0\n0.1 0.0 0.0\n"
        )
        with pytest.raises(DataFormatError, match="bias rows"):
            parse_liblinear_model(text)


class TestCurveCsv:
    def test_round_trip_full_precision(self, tmp_path):
        pts = ((0.1, 1.0 / 3.0), (2.5, 0.123456789012345), (7.0, 1.0))
        curve = SweepCurve(pts, "binary-uap")
        path = tmp_path / "curve.csv"
        export_curve_csv(curve, path)
        assert parse_curve_csv(path) == list(pts)

    def test_header_check(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("budget,rate\n1.0,0.5\n")
        with pytest.raises(DataFormatError, match="header"):
            parse_curve_csv(path)
