"""Independent, slower verifiers for the closed-form perturbations.

Nothing in this module calls the formulas in :mod:`svmpert.perturb`;
the minimum-norm answers are recomputed from first principles
(half-space projection, boundary enumeration) and the fooling-rate
optimum is approached by seeded random search.  These are the reference
paths the closed forms are tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from svmpert.models import (
    BinaryLinearModel,
    Dataset,
    MulticlassLinearModel,
    _as_vector,
    predict_binary_batch,
    predict_multi_batch,
)
from svmpert.gaussmix import GaussianMixtureParams, sample_mixture


@dataclass(frozen=True)
class OracleConfig:
    trials: int = 10_000
    seed: int = 0
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


def _project_onto_halfspace(z: np.ndarray, a: np.ndarray, beta: float) -> np.ndarray:
    """Euclidean projection of z onto {r : a.r <= beta}."""
    gap = float(a @ z) - beta
    if gap <= 0.0:
        return z.copy()
    return z - gap / float(a @ a) * a


def oracle_sap_binary(model: BinaryLinearModel, x) -> np.ndarray:
    """Minimum-norm flipping vector via direct half-space projection.

    The feasible set is {r : sign(w.x+b) w.r <= -|w.x+b|}; the answer is
    the projection of the origin onto it.
    """
    x = _as_vector(x, model.p)
    m = float(model.w @ x + model.b)
    s = 1.0 if m >= 0 else -1.0
    return _project_onto_halfspace(np.zeros(model.p), s * model.w, -abs(m))


def oracle_sap_multi(model: MulticlassLinearModel, x) -> np.ndarray:
    """Minimum-norm flipping vector by enumerating all candidate boundaries.

    For each class l other than the predicted one, project x onto the
    l-boundary hyperplane and keep the shortest displacement whose
    infinitesimal overshoot actually changes the argmax.
    """
    x = _as_vector(x, model.p)
    scores = model.weights.T @ x
    k = int(np.argmax(scores)) + 1
    wk = model.column(k)
    best, best_norm = None, np.inf
    for l in range(1, model.c + 1):
        if l == k:
            continue
        normal = wk - model.column(l)
        # Projection of x onto {z : normal.z = 0}, expressed as displacement.
        displaced = x - float(normal @ x) / float(normal @ normal) * normal
        r = displaced - x
        # Feasibility: an infinitesimal overshoot must change the argmax.
        overshoot = x + (1.0 + 1e-9) * r
        if int(np.argmax(model.weights.T @ overshoot)) + 1 == k:
            continue
        norm = float(np.linalg.norm(r))
        if norm < best_norm:
            best, best_norm = r, norm
    assert best is not None, "some boundary is always reachable"
    return best


def _fooling_fraction(model, X, before, r) -> float:
    if isinstance(model, BinaryLinearModel):
        after = predict_binary_batch(model, X + r)
    else:
        after = predict_multi_batch(model, X + r)
    return float(np.mean(after != before))


def oracle_uap_search(
    model, data: Dataset, xi: float, cfg: OracleConfig
) -> tuple[np.ndarray, float]:
    """Best fooling direction found by random search over the xi-sphere.

    Directions are unit-normalized standard normal draws from numpy's
    PCG64 generator, taken sequentially from one seeded stream so a
    longer run extends (never reshuffles) a shorter one.
    """
    if xi < 0:
        raise ValueError("budget xi must be >= 0")
    X = data.samples
    if isinstance(model, BinaryLinearModel):
        before = predict_binary_batch(model, X)
    else:
        before = predict_multi_batch(model, X)
    rng = np.random.default_rng(cfg.seed)
    best_r = np.zeros(data.p)
    best_rate = -1.0
    for _ in range(cfg.trials):
        v = rng.standard_normal(data.p)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            continue
        r = xi * v / norm
        rate = _fooling_fraction(model, X, before, r)
        if rate > best_rate:
            best_rate, best_r = rate, r
    return best_r, best_rate


def mc_fooling_gauss(
    mix: GaussianMixtureParams, model: BinaryLinearModel, r, n: int, seed: int
) -> float:
    """Monte Carlo estimate of the fooling probability under the mixture."""
    if n < 1:
        raise ValueError("sample count must be >= 1")
    r = _as_vector(r, model.p)
    data = sample_mixture(mix, n, seed)
    before = predict_binary_batch(model, data.samples)
    after = predict_binary_batch(model, data.samples + r)
    return float(np.mean(after != before))
