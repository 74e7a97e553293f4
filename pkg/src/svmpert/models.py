"""Linear model types, decision functions and boundary geometry.

Conventions used throughout the package:
  * binary labels live in {-1, +1} and sign(0) = +1, so the decision
    function is total;
  * multiclass labels live in 1..c and every argmax/argmin tie breaks
    toward the lowest class index, so evaluation is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _as_vector(x, p: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {x.shape}")
    if p is not None and x.shape[0] != p:
        raise ValueError(f"dimension mismatch: expected {p}, got {x.shape[0]}")
    return x


@dataclass(frozen=True)
class BinaryLinearModel:
    """Hyperplane classifier x -> sign(w.x + b). Rejects w = 0."""

    w: np.ndarray
    b: float

    def __post_init__(self):
        w = _as_vector(self.w)
        if w.shape[0] < 1:
            raise ValueError("weight vector must have dimension >= 1")
        if np.linalg.norm(w) == 0.0:
            raise ValueError("zero weight vector admits no perturbation direction")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))

    @property
    def p(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class MulticlassLinearModel:
    """One score column per class; prediction is the argmax column.

    ``weights`` has shape (p, c); column l-1 scores class l.  Instances
    with c = 2 are accepted but flagged degenerate: they exist for tests
    only and carry no claim about the multiclass formulas at c = 2.
    ``class_labels`` optionally remembers external label names (e.g. the
    label order of an imported model file).
    """

    weights: np.ndarray
    class_labels: tuple | None = None

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=float)
        if W.ndim != 2:
            raise ValueError(f"expected a (p, c) weight matrix, got shape {W.shape}")
        p, c = W.shape
        if c < 2:
            raise ValueError("need at least two classes")
        if p < 1:
            raise ValueError("feature dimension must be >= 1")
        for q in range(c):
            for l in range(q + 1, c):
                if np.linalg.norm(W[:, q] - W[:, l]) == 0.0:
                    raise ValueError(
                        f"duplicate score columns {q + 1} and {l + 1}: "
                        "boundary distance undefined"
                    )
        if self.class_labels is not None and len(self.class_labels) != c:
            raise ValueError("class_labels length must equal class count")
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)

    @classmethod
    def from_columns(cls, columns, class_labels=None) -> "MulticlassLinearModel":
        W = np.column_stack([_as_vector(col) for col in columns])
        return cls(W, class_labels)

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    @property
    def c(self) -> int:
        return self.weights.shape[1]

    @property
    def degenerate(self) -> bool:
        return self.c == 2

    def column(self, l: int) -> np.ndarray:
        """Score vector of class l (1-based)."""
        if not 1 <= l <= self.c:
            raise ValueError(f"class {l} out of range 1..{self.c}")
        return self.weights[:, l - 1]

    def scores(self, x) -> np.ndarray:
        return self.weights.T @ _as_vector(x, self.p)


@dataclass(frozen=True)
class Dataset:
    """Dense feature matrix with integer labels and a provenance tag."""

    samples: np.ndarray
    labels: np.ndarray
    source: str = "synthetic"

    def __post_init__(self):
        X = np.asarray(self.samples, dtype=float)
        y = np.asarray(self.labels, dtype=int)
        if X.ndim != 2:
            raise ValueError(f"samples must be a 2-d matrix, got shape {X.shape}")
        if X.shape[0] < 1:
            raise ValueError("dataset must contain at least one sample")
        if y.shape != (X.shape[0],):
            raise ValueError("labels must be one integer per sample")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "samples", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def p(self) -> int:
        return self.samples.shape[1]

    def restrict(self, mask) -> "Dataset":
        """Filtered view over a boolean mask (class-restricted subsets)."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.n,):
            raise ValueError("mask must have one entry per sample")
        if not mask.any():
            raise ValueError("restriction would produce an empty dataset")
        return Dataset(self.samples[mask], self.labels[mask], self.source)


@dataclass(frozen=True)
class ClassProportions:
    """Predicted-class frequencies theta_1..theta_c, summing to 1."""

    theta: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.theta, dtype=float)
        if t.ndim != 1 or t.shape[0] < 1:
            raise ValueError("theta must be a non-empty vector")
        if (t < 0).any():
            raise ValueError("proportions must be non-negative")
        if abs(t.sum() - 1.0) > 1e-12:
            raise ValueError(f"proportions must sum to 1, got {t.sum()!r}")
        t.setflags(write=False)
        object.__setattr__(self, "theta", t)

    @property
    def c(self) -> int:
        return self.theta.shape[0]


def margin_binary(model: BinaryLinearModel, x) -> float:
    """Raw decision value w.x + b."""
    return float(model.w @ _as_vector(x, model.p) + model.b)


def predict_binary(model: BinaryLinearModel, x) -> int:
    """Label in {-1, +1}; the boundary itself maps to +1."""
    return 1 if margin_binary(model, x) >= 0.0 else -1


def predict_binary_batch(model: BinaryLinearModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.p:
        raise ValueError(f"expected shape (n, {model.p}), got {X.shape}")
    return np.where(X @ model.w + model.b >= 0.0, 1, -1)


def predict_multi(model: MulticlassLinearModel, x) -> int:
    """Class in 1..c with the highest score; ties go to the lowest index."""
    return int(np.argmax(model.scores(x))) + 1


def predict_multi_batch(model: MulticlassLinearModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.p:
        raise ValueError(f"expected shape (n, {model.p}), got {X.shape}")
    return np.argmax(X @ model.weights, axis=1) + 1


def pair_boundary_distance(model: MulticlassLinearModel, x, q: int, l: int) -> float:
    """Signed distance from x to the class-q/class-l separating hyperplane.

    Positive when x sits on the class-q side.  Antisymmetric in (q, l).
    """
    if q == l:
        raise ValueError("boundary requires two distinct classes")
    x = _as_vector(x, model.p)
    diff = model.column(q) - model.column(l)
    return float(diff @ x / np.linalg.norm(diff))
