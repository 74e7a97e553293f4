"""Two-component Gaussian mixtures and the closed-form fooling rate.

Sampling uses numpy's seeded PCG64 generator (``default_rng``) with
standard-normal draws transformed through a locally computed Cholesky
factor, so Monte Carlo values reproduce exactly for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from svmpert.models import BinaryLinearModel, Dataset


def cholesky_lower(a: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L^T = a; raises if a is not positive-definite.

    Plain Cholesky-Banachiewicz; doubles as the positive-definiteness
    check for mixture covariances (all pivots must be positive).
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    L = np.zeros_like(a)
    for i in range(n):
        for j in range(i + 1):
            s = a[i, j] - L[i, :j] @ L[j, :j]
            if i == j:
                if s <= 0.0:
                    raise ValueError("matrix is not positive-definite")
                L[i, i] = math.sqrt(s)
            else:
                L[i, j] = s / L[j, j]
    return L


@dataclass(frozen=True)
class GaussianMixtureParams:
    mu_plus: np.ndarray
    mu_minus: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    theta1: float

    def __post_init__(self):
        mu_p = np.asarray(self.mu_plus, dtype=float)
        mu_m = np.asarray(self.mu_minus, dtype=float)
        if mu_p.ndim != 1 or mu_m.shape != mu_p.shape:
            raise ValueError("means must be vectors of equal dimension")
        p = mu_p.shape[0]
        chols = []
        for name, sig in (("sigma_plus", self.sigma_plus), ("sigma_minus", self.sigma_minus)):
            sig = np.asarray(sig, dtype=float)
            if sig.shape != (p, p):
                raise ValueError(f"{name} must be a {p}x{p} matrix")
            if np.abs(sig - sig.T).max() > 1e-12:
                raise ValueError(f"{name} must be symmetric")
            chols.append(cholesky_lower(sig))  # raises when not PD
        if not 0.0 < self.theta1 < 1.0:
            raise ValueError("theta1 must lie in (0, 1)")
        for arr in (mu_p, mu_m):
            arr.setflags(write=False)
        object.__setattr__(self, "mu_plus", mu_p)
        object.__setattr__(self, "mu_minus", mu_m)
        object.__setattr__(self, "sigma_plus", np.asarray(self.sigma_plus, dtype=float))
        object.__setattr__(self, "sigma_minus", np.asarray(self.sigma_minus, dtype=float))
        object.__setattr__(self, "_chol_plus", chols[0])
        object.__setattr__(self, "_chol_minus", chols[1])

    @property
    def p(self) -> int:
        return self.mu_plus.shape[0]


def sample_mixture(params: GaussianMixtureParams, n: int, seed: int) -> Dataset:
    """n labelled draws: positive component with probability theta1."""
    if n < 1:
        raise ValueError("sample count must be >= 1")
    rng = np.random.default_rng(seed)
    positive = rng.random(n) < params.theta1
    z = rng.standard_normal((n, params.p))
    X = np.where(
        positive[:, None],
        params.mu_plus + z @ params._chol_plus.T,
        params.mu_minus + z @ params._chol_minus.T,
    )
    labels = np.where(positive, 1, -1)
    return Dataset(X, labels, source="synthetic")


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the complementary error function:
    Phi(z) = erfc(-z / sqrt(2)) / 2  (C-library erfc, < 1e-15 relative)."""
    if not math.isfinite(z):
        raise ValueError("z must be finite")
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def theoretical_uap_rate(
    model: BinaryLinearModel, params: GaussianMixtureParams, xi: float
) -> float:
    """Closed-form fooling rate of the budget-xi universal attack.

    The attacked component's signed distance to the boundary is Gaussian
    with mean (w.mu + b)/||w|| and variance w.Sigma.w/||w||^2 (sign
    flipped for the negative branch); the rate is theta * Phi of the
    standardized budget.  Only the majority-class attack direction is
    covered; the formula does not describe arbitrary directions.
    """
    if xi < 0:
        raise ValueError("budget xi must be >= 0")
    w, b = model.w, model.b
    wnorm = float(np.linalg.norm(w))
    theta1 = params.theta1
    if theta1 > 1.0 - theta1:
        theta, mu, sigma, sign = theta1, params.mu_plus, params.sigma_plus, 1.0
    else:
        theta, mu, sigma, sign = 1.0 - theta1, params.mu_minus, params.sigma_minus, -1.0
    mean = sign * (float(w @ mu) + b) / wnorm
    var = float(w @ sigma @ w) / wnorm**2
    if var <= 0.0:
        raise ValueError("degenerate variance along the attack direction")
    return theta * normal_cdf((xi - mean) / math.sqrt(var))


def _format_vector(v: np.ndarray) -> str:
    return ",".join(repr(float(x)) for x in v)


def save_mixture_params(params: GaussianMixtureParams, path) -> None:
    """Plain-text parameter file: one ``field=values`` line per field,
    matrices row-major."""
    lines = [
        f"theta1={params.theta1!r}",
        f"mu_plus={_format_vector(params.mu_plus)}",
        f"mu_minus={_format_vector(params.mu_minus)}",
        f"sigma_plus={_format_vector(params.sigma_plus.ravel())}",
        f"sigma_minus={_format_vector(params.sigma_minus.ravel())}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mixture_params(path) -> GaussianMixtureParams:
    fields = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
    missing = {"theta1", "mu_plus", "mu_minus", "sigma_plus", "sigma_minus"} - set(fields)
    if missing:
        raise ValueError(f"mixture parameter file missing fields: {sorted(missing)}")
    mu_plus = np.array([float(t) for t in fields["mu_plus"].split(",")])
    mu_minus = np.array([float(t) for t in fields["mu_minus"].split(",")])
    p = mu_plus.shape[0]
    sigma_plus = np.array([float(t) for t in fields["sigma_plus"].split(",")]).reshape(p, p)
    sigma_minus = np.array([float(t) for t in fields["sigma_minus"].split(",")]).reshape(p, p)
    return GaussianMixtureParams(mu_plus, mu_minus, sigma_plus, sigma_minus, float(fields["theta1"]))
