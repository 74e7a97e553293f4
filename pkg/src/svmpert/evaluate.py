"""Fooling-rate metrics, budget sweeps, SNR and report assembly.

SNR definition used by this artifact (the literature reports values
without defining one): mean over samples of 20*log10(||x|| / ||r_x||),
in dB.  A sample perturbed onto a decision boundary counts as NOT
fooled; only a strict class change counts, consistent with sign(0) = +1
and lowest-index argmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from svmpert.models import (
    BinaryLinearModel,
    ClassProportions,
    Dataset,
    MulticlassLinearModel,
    _as_vector,
    predict_binary_batch,
    predict_multi_batch,
)
from svmpert.perturb import (
    Perturbation,
    cuap_binary,
    cuap_multi,
    polar_cone_member,
    uap_binary,
    uap_multi,
)


@dataclass(frozen=True)
class AttackReport:
    fooling_rate: float
    bound: float
    per_class_fooled: dict
    snr_db: float | None = None
    timing: dict = field(default_factory=dict)
    cone_membership: bool | None = None
    xi: float | None = None
    kind: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.fooling_rate <= 1.0:
            raise ValueError("fooling rate must lie in [0, 1]")
        if not 0.0 <= self.bound <= 1.0:
            raise ValueError("bound must lie in [0, 1]")


@dataclass(frozen=True)
class SweepCurve:
    points: tuple  # ordered (xi, fooling_rate) pairs
    kind: str  # "binary-uap" | "multi-uap" | "cuap"

    def __post_init__(self):
        pts = tuple((float(x), float(r)) for x, r in self.points)
        xs = [x for x, _ in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("xi values must be strictly increasing")
        object.__setattr__(self, "points", pts)


def _predict(model, X):
    if isinstance(model, BinaryLinearModel):
        return predict_binary_batch(model, X)
    return predict_multi_batch(model, X)


def fooling_rate(model, data: Dataset, r) -> float:
    """Fraction of samples whose predicted class changes under x -> x + r."""
    r = _as_vector(r, data.p)
    before = _predict(model, data.samples)
    after = _predict(model, data.samples + r)
    return float(np.mean(after != before))


def fooled_indicator(model, data: Dataset, r) -> np.ndarray:
    """Per-sample 0/1 fooled indicators (same comparison as fooling_rate)."""
    r = _as_vector(r, data.p)
    before = _predict(model, data.samples)
    after = _predict(model, data.samples + r)
    return (after != before).astype(int)


def class_proportions(model, data: Dataset) -> ClassProportions:
    """Predicted-class frequencies.  Binary models map to a length-2
    vector (theta_+1, theta_-1)."""
    predicted = _predict(model, data.samples)
    if isinstance(model, BinaryLinearModel):
        theta1 = float(np.mean(predicted == 1))
        return ClassProportions(np.array([theta1, 1.0 - theta1]))
    counts = np.bincount(predicted, minlength=model.c + 1)[1:]
    return ClassProportions(counts / data.n)


def snr_db(samples, perturbations) -> float:
    """Mean per-sample 20*log10(||x|| / ||r_x||), in dB.

    ``perturbations`` is a single shared vector or one row per sample.
    """
    X = np.asarray(samples, dtype=float)
    R = np.asarray(perturbations, dtype=float)
    if R.ndim == 1:
        R = np.broadcast_to(R, X.shape)
    if R.shape != X.shape:
        raise ValueError("perturbations must be a vector or one row per sample")
    x_norms = np.linalg.norm(X, axis=1)
    r_norms = np.linalg.norm(R, axis=1)
    if (r_norms == 0.0).any():
        raise ValueError("zero-norm perturbation row: SNR undefined")
    return float(np.mean(20.0 * np.log10(x_norms / r_norms)))


def _per_class_fooled(model, data: Dataset, r) -> dict:
    before = _predict(model, data.samples)
    after = _predict(model, data.samples + r)
    fooled = after != before
    out = {}
    for cls in np.unique(before[fooled]):
        out[int(cls)] = int(np.sum(fooled & (before == cls)))
    return out


def attack_report(model, data: Dataset, perturbation: Perturbation, timing=None) -> AttackReport:
    """Bundle fooling rate, the applicable theorem bound, per-class fooled
    counts, SNR and (for multiclass uAP) the polar-cone membership flag."""
    r = perturbation.r
    rate = fooling_rate(model, data, r)
    per_class = _per_class_fooled(model, data, r)

    bound = 1.0
    cone = None
    if perturbation.kind == "uap":
        theta = class_proportions(model, data)
        if isinstance(model, BinaryLinearModel):
            bound = float(max(theta.theta[0], 1.0 - theta.theta[0]))
        else:
            spared = perturbation.attacked_class
            cone = polar_cone_member(model, spared, r)
            bound = float(1.0 - theta.theta[spared - 1])

    snr = None
    if perturbation.norm > 0.0:
        snr = snr_db(data.samples, r)

    return AttackReport(
        fooling_rate=rate,
        bound=bound,
        per_class_fooled=per_class,
        snr_db=snr,
        timing=dict(timing or {}),
        cone_membership=cone,
        xi=perturbation.budget,
        kind=perturbation.kind,
    )


def sweep_xi(model, data: Dataset, kind: str, xi_grid, source_class=None) -> SweepCurve:
    """Fooling rate across a strictly increasing budget grid.

    The attack direction is xi-independent for all three kinds, so one
    unit direction serves the whole curve.  cuAP requires
    ``source_class`` and is evaluated on that predicted-class subset.
    """
    xi_grid = [float(x) for x in xi_grid]
    if not xi_grid:
        raise ValueError("xi grid must be non-empty")
    if any(x <= 0 for x in xi_grid):
        raise ValueError("all xi values must be positive")
    if any(b <= a for a, b in zip(xi_grid, xi_grid[1:])):
        raise ValueError("xi grid must be strictly increasing")

    xi0 = xi_grid[0]
    eval_data = data
    if kind == "binary-uap":
        theta = class_proportions(model, data)
        direction = uap_binary(model, float(theta.theta[0]), xi0).r / xi0
    elif kind == "multi-uap":
        direction = uap_multi(model, class_proportions(model, data), xi0).r / xi0
    elif kind == "cuap":
        if source_class is None:
            raise ValueError("cuAP sweep requires a source class")
        predicted = _predict(model, data.samples)
        eval_data = data.restrict(predicted == source_class)
        if isinstance(model, BinaryLinearModel):
            direction = cuap_binary(model, source_class, xi0).r / xi0
        else:
            direction = cuap_multi(model, eval_data, xi0).r / xi0
    else:
        raise ValueError(f"unknown sweep kind {kind!r}")

    points = [(xi, fooling_rate(model, eval_data, xi * direction)) for xi in xi_grid]
    return SweepCurve(tuple(points), kind)


def report_text(report: AttackReport) -> str:
    """Line-oriented key=value serialization of a report."""
    lines = []
    if report.kind is not None:
        lines.append(f"kind={report.kind}")
    if report.xi is not None:
        lines.append(f"xi={report.xi!r}")
    lines.append(f"fooling_rate={report.fooling_rate!r}")
    lines.append(f"bound={report.bound!r}")
    total = sum(report.per_class_fooled.values())
    lines.append(f"fooled_total={total}")
    for cls in sorted(report.per_class_fooled):
        lines.append(f"fooled_class_{cls}={report.per_class_fooled[cls]}")
    if report.snr_db is not None:
        lines.append(f"snr_db={report.snr_db!r}")
    if report.cone_membership is not None:
        lines.append(f"cone_membership={str(report.cone_membership).lower()}")
    for phase in sorted(report.timing):
        lines.append(f"time_{phase}_s={report.timing[phase]!r}")
    return "\n".join(lines) + "\n"
