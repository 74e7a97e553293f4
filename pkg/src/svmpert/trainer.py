"""Reference trainers for the binary L1-loss SVM and Crammer-Singer SVM.

Both trainers run stochastic subgradient descent on the primal
(Pegasos-style): the trade-off C maps to lambda = 1/(nC) and the step
size is eta_t = eta0 / (lambda * t).  Shuffling comes from numpy's
seeded PCG64 generator, so runs are bitwise reproducible.  The returned
model is the best objective value seen at any epoch boundary, which
also makes the "no worse than the zero model" contract unconditional.

The multiclass trainer is bias-free, matching the Crammer-Singer
decision rule; ``augment_bias`` appends a constant-1 feature for callers
who want an intercept anyway.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from svmpert.models import BinaryLinearModel, Dataset, MulticlassLinearModel


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    epochs: int = 100
    seed: int = 0
    eta0: float = 1.0

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.eta0 <= 0:
            raise ValueError("initial step must be positive")


def objective_binary(model: BinaryLinearModel, data: Dataset, C: float) -> float:
    """Primal value 0.5 ||w||^2 + C * sum_i max(0, 1 - y_i (w.x_i + b))."""
    margins = data.samples @ model.w + model.b
    hinge = np.maximum(0.0, 1.0 - data.labels * margins)
    return float(0.5 * model.w @ model.w + C * hinge.sum())


def _binary_objective_raw(w, b, X, y, C):
    hinge = np.maximum(0.0, 1.0 - y * (X @ w + b))
    return 0.5 * w @ w + C * hinge.sum()


def train_binary_l1(data: Dataset, cfg: TrainConfig) -> BinaryLinearModel:
    X, y = data.samples, data.labels
    if not set(np.unique(y)) <= {-1, 1}:
        raise ValueError("binary training expects labels in {-1, +1}")
    if len(np.unique(y)) < 2:
        raise ValueError("need samples of both labels to train")

    n, p = X.shape
    lam = 1.0 / (n * cfg.C)
    rng = np.random.default_rng(cfg.seed)

    w = np.zeros(p)
    b = 0.0
    best = None
    best_obj = np.inf
    t = 0
    for _ in range(cfg.epochs):
        for i in rng.permutation(n):
            t += 1
            eta = cfg.eta0 / (lam * t)
            if y[i] * (X[i] @ w + b) < 1.0:
                w = (1.0 - eta * lam) * w + eta * y[i] * X[i]
                b = b + eta * y[i]
            else:
                w = (1.0 - eta * lam) * w
        if np.linalg.norm(w) > 0:
            obj = _binary_objective_raw(w, b, X, y, cfg.C)
            if obj < best_obj:
                best_obj = obj
                best = (w.copy(), b)
    if best is None:
        raise ValueError("training never produced a usable weight vector")
    return BinaryLinearModel(best[0], best[1])


def objective_cs(model: MulticlassLinearModel, data: Dataset, C: float) -> float:
    """Crammer-Singer primal: 0.5 sum_l ||w_l||^2 + C sum_i xi_i with
    xi_i = max_l (1 - delta_{y_i,l} + w_l.x_i) - w_{y_i}.x_i (the l = y_i
    term pins the max at >= 0)."""
    scores = data.samples @ model.weights
    n = data.n
    margins = scores + 1.0
    margins[np.arange(n), data.labels - 1] -= 1.0
    slack = margins.max(axis=1) - scores[np.arange(n), data.labels - 1]
    return float(0.5 * (model.weights**2).sum() + C * slack.sum())


def _cs_objective_raw(W, X, y, C):
    scores = X @ W
    n = X.shape[0]
    margins = scores + 1.0
    margins[np.arange(n), y - 1] -= 1.0
    slack = margins.max(axis=1) - scores[np.arange(n), y - 1]
    return 0.5 * (W**2).sum() + C * slack.sum()


def train_crammer_singer(data: Dataset, cfg: TrainConfig) -> MulticlassLinearModel:
    X, y = data.samples, data.labels
    c = int(y.max())
    present = set(np.unique(y))
    if y.min() < 1:
        raise ValueError("multiclass labels must be 1..c")
    if present != set(range(1, c + 1)):
        missing = sorted(set(range(1, c + 1)) - present)
        raise ValueError(f"every class must be present; missing {missing}")

    n, p = X.shape
    lam = 1.0 / (n * cfg.C)
    rng = np.random.default_rng(cfg.seed)

    W = np.zeros((p, c))
    best = None
    best_obj = np.inf
    t = 0
    for _ in range(cfg.epochs):
        for i in rng.permutation(n):
            t += 1
            eta = cfg.eta0 / (lam * t)
            scores = X[i] @ W
            margins = scores + 1.0
            margins[y[i] - 1] -= 1.0
            worst = int(np.argmax(margins))
            W *= 1.0 - eta * lam
            if worst != y[i] - 1 and margins[worst] - scores[y[i] - 1] > 0.0:
                W[:, y[i] - 1] += eta * X[i]
                W[:, worst] -= eta * X[i]
        try:
            candidate = MulticlassLinearModel(W.copy())
        except ValueError:
            continue  # duplicate/zero columns this epoch; keep iterating
        obj = _cs_objective_raw(W, X, y, cfg.C)
        if obj < best_obj:
            best_obj = obj
            best = candidate
    if best is None:
        raise ValueError("training never produced a usable weight matrix")
    return best


def augment_bias(data: Dataset, value: float = 1.0) -> Dataset:
    """Append a constant feature so bias-free models can learn an intercept."""
    col = np.full((data.n, 1), float(value))
    return Dataset(np.hstack([data.samples, col]), data.labels, data.source)
