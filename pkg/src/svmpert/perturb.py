"""Closed-form perturbation generators.

Three attack kinds, all non-iterative:
  * sAP  — per-sample minimum-norm vector reaching the nearest boundary,
           with an optional overshoot slack eps pushing strictly across;
  * cuAP — one budget-norm vector aimed at a whole predicted class;
  * uAP  — one budget-norm vector aimed at the whole dataset, sparing
           exactly one class.

Tie-breaks in every argmin/argmax go to the lowest class index.  The
returned budget-norm vectors satisfy ||r|| = xi to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from svmpert.models import (
    BinaryLinearModel,
    ClassProportions,
    Dataset,
    MulticlassLinearModel,
    _as_vector,
    margin_binary,
    pair_boundary_distance,
    predict_multi,
    predict_multi_batch,
)

#: Overshoot slack used by callers who just want "small enough".
DEFAULT_EPS = 1e-6

# Cone-face dot products up to this relative tolerance count as non-positive.
_CONE_RTOL = 1e-10


@dataclass(frozen=True)
class Perturbation:
    """A perturbation vector with its construction metadata.

    ``attacked_class`` is the cuAP source class, or for uAP the spared
    class; ``victim_boundary`` is the boundary class the vector crosses
    (multiclass sAP/cuAP).
    """

    r: np.ndarray
    kind: str  # "sap" | "cuap" | "uap"
    budget: float | None = None
    slack: float | None = None
    attacked_class: int | None = None
    victim_boundary: int | None = None

    def __post_init__(self):
        r = _as_vector(self.r)
        r.setflags(write=False)
        object.__setattr__(self, "r", r)
        if self.kind not in ("sap", "cuap", "uap"):
            raise ValueError(f"unknown perturbation kind {self.kind!r}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.r))


def sap_binary(model: BinaryLinearModel, x, eps: float = 0.0) -> Perturbation:
    """Minimum-norm flip for one sample: move along -sign(m) * w to the
    hyperplane, overshooting by eps."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    m = margin_binary(model, x)
    s = 1.0 if m >= 0 else -1.0
    w = model.w
    r = -s * (abs(m) + eps) / float(w @ w) * w
    return Perturbation(r, "sap", slack=eps)


def cuap_binary(model: BinaryLinearModel, source_class: int, xi: float) -> Perturbation:
    """Budget-norm attack on one predicted class: xi * (-source) * w/||w||."""
    if source_class not in (-1, 1):
        raise ValueError("source class must be -1 or +1")
    if xi <= 0:
        raise ValueError("budget xi must be positive")
    w = model.w
    r = -float(source_class) * xi * w / np.linalg.norm(w)
    return Perturbation(r, "cuap", budget=xi, attacked_class=source_class)


def uap_binary(model: BinaryLinearModel, theta1: float, xi: float) -> Perturbation:
    """Budget-norm attack on the majority predicted class.

    theta1 is the predicted-positive proportion; theta1 > 1/2 targets
    the positive class (direction -w/||w||), otherwise the negative one.
    """
    if xi <= 0:
        raise ValueError("budget xi must be positive")
    if not 0.0 <= theta1 <= 1.0:
        raise ValueError("theta1 must lie in [0, 1]")
    attacked = 1 if theta1 > 0.5 else -1
    w = model.w
    r = -float(attacked) * xi * w / np.linalg.norm(w)
    return Perturbation(r, "uap", budget=xi, attacked_class=attacked)


def nearest_boundary_index(model: MulticlassLinearModel, x) -> int:
    """Class l* whose separating hyperplane is closest to x.

    Implemented as the argmin of signed pairwise boundary distances; the
    equivalent largest-angle rule breaks down at x = 0, the distance form
    does not.  Ties go to the lowest class index.
    """
    k = predict_multi(model, x)
    best_l, best_d = None, np.inf
    for l in range(1, model.c + 1):
        if l == k:
            continue
        d = pair_boundary_distance(model, x, k, l)
        if d < best_d:
            best_l, best_d = l, d
    return best_l


def sap_multi(model: MulticlassLinearModel, x, eps: float = 0.0) -> Perturbation:
    """Minimum-norm flip for one multiclass sample: project onto the
    nearest separating hyperplane, overshooting by eps."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    x = _as_vector(x, model.p)
    k = predict_multi(model, x)
    l_star = nearest_boundary_index(model, x)
    diff = model.column(k) - model.column(l_star)
    r = (float(diff @ x) + eps) / float(diff @ diff) * (-diff)
    return Perturbation(r, "sap", slack=eps, victim_boundary=l_star)


def cuap_multi(model: MulticlassLinearModel, omega: Dataset, xi: float) -> Perturbation:
    """Budget-norm attack on one predicted class.

    Every sample in omega must share the same predicted class q.  The
    boundary class l*_c maximizes gamma_l, the fraction of omega whose
    nearest boundary is l; the attack direction is the unit vector from
    w_q toward w_{l*_c}.
    """
    if xi <= 0:
        raise ValueError("budget xi must be positive")
    predicted = predict_multi_batch(model, omega.samples)
    q = int(predicted[0])
    if (predicted != q).any():
        raise ValueError("omega must contain a single predicted class")

    counts = np.zeros(model.c + 1, dtype=int)
    for row in omega.samples:
        counts[nearest_boundary_index(model, row)] += 1
    l_star = int(np.argmax(counts))  # lowest index wins ties

    diff = model.column(l_star) - model.column(q)
    r = xi * diff / np.linalg.norm(diff)
    return Perturbation(r, "cuap", budget=xi, attacked_class=q, victim_boundary=l_star)


def uap_multi(
    model: MulticlassLinearModel, theta: ClassProportions, xi: float
) -> Perturbation:
    """Budget-norm attack sparing the least-frequent predicted class.

    The direction is w_{l*_u}/||w_{l*_u}|| with l*_u = argmin theta.
    ``attacked_class`` records the *spared* class l*_u.
    """
    if xi <= 0:
        raise ValueError("budget xi must be positive")
    if theta.c != model.c:
        raise ValueError("theta length must match the class count")
    l_u = int(np.argmin(theta.theta)) + 1  # lowest index wins ties
    col = model.column(l_u)
    norm = np.linalg.norm(col)
    if norm == 0.0:
        raise ValueError(f"score column {l_u} has zero norm")
    r = xi * col / norm
    return Perturbation(r, "uap", budget=xi, attacked_class=l_u)


def polar_cone_member(model: MulticlassLinearModel, q: int, r) -> bool:
    """Whether r lies in the polar cone of cone{w_l - w_q : l != q}.

    Membership means r cannot fool any sample predicted as class q.  A
    finite generator check suffices for a finitely generated cone; dot
    products within a small relative tolerance of zero count as
    non-positive to absorb float noise at cone faces.
    """
    r = _as_vector(r, model.p)
    r_norm = np.linalg.norm(r)
    wq = model.column(q)
    for l in range(1, model.c + 1):
        if l == q:
            continue
        gen = model.column(l) - wq
        if float(gen @ r) > _CONE_RTOL * r_norm * np.linalg.norm(gen):
            return False
    return True
