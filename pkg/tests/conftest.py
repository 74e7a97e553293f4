import os

import numpy as np
import pytest

from svmpert.models import BinaryLinearModel, MulticlassLinearModel

MNIST_ENV = "SVMPERT_MNIST_DIR"
CIFAR_ENV = "SVMPERT_CIFAR_DIR"

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def mnist_paths():
    """Paths to the four standard IDX files, or None when unavailable."""
    root = os.environ.get(MNIST_ENV)
    if not root:
        return None
    paths = {key: os.path.join(root, name) for key, name in MNIST_FILES.items()}
    if not all(os.path.exists(p) for p in paths.values()):
        return None
    return paths


def cifar_batch_paths():
    root = os.environ.get(CIFAR_ENV)
    if not root:
        return None
    paths = [os.path.join(root, f"data_batch_{i}.bin") for i in range(1, 6)]
    paths.append(os.path.join(root, "test_batch.bin"))
    if not all(os.path.exists(p) for p in paths):
        return None
    return paths


def require_mnist():
    paths = mnist_paths()
    if paths is None:
        pytest.skip(
            f"real MNIST IDX files not available (set {MNIST_ENV} to a directory "
            "holding the four standard files)"
        )
    return paths


def require_cifar():
    paths = cifar_batch_paths()
    if paths is None:
        pytest.skip(
            f"real CIFAR-10 batches not available (set {CIFAR_ENV} to the "
            "cifar-10-batches-bin directory)"
        )
    return paths


def random_binary_model(rng, p):
    return BinaryLinearModel(rng.standard_normal(p), float(rng.standard_normal()))


def random_multiclass_model(rng, p, c):
    return MulticlassLinearModel(rng.standard_normal((p, c)))


@pytest.fixture
def toy_multi():
    """The three-class plane model used across the worked examples."""
    return MulticlassLinearModel.from_columns([[1, 0], [0, 1], [-1, -1]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
