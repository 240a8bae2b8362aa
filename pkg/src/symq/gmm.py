"""One-dimensional variational-Bayes Gaussian mixture for correction noise.

Each cluster carries Dirichlet weight ``alpha``, Normal-Wishart parameters
``beta``, ``nu``, ``m`` and scalar Wishart scale ``W``. Updates accumulate onto
the current parameters (there is no reset to the prior between calls), and
every update ends by shifting the component means so the mixture mean is zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .numerics import digamma

# Feature dimension; the model is strictly univariate.
D = 1
LOG2 = np.log(2.0)
# Clusters whose soft count falls below this get no data terms.
EMPTY_CLUSTER = 1e-8

PRIOR_ALPHA = 1.0
PRIOR_BETA = 1.0
PRIOR_NU = D + 2.0
PRIOR_W = 1.0 / PRIOR_NU


@dataclass
class GmmModel:
    alpha: np.ndarray
    beta: np.ndarray
    nu: np.ndarray
    m: np.ndarray
    W: np.ndarray

    @property
    def K(self) -> int:
        return self.alpha.size

    @property
    def weights(self) -> np.ndarray:
        return self.alpha / self.alpha.sum()

    @property
    def mean(self) -> float:
        return float(np.dot(self.weights, self.m))

    @property
    def component_variances(self) -> np.ndarray:
        """Plug-in variance 1 / E[precision] = 1 / (nu W) of each component."""
        return 1.0 / (self.nu * self.W)

    def moments(self) -> tuple[float, float, float]:
        """Mean, variance and third central moment of the plug-in mixture."""
        pi, m, var = self.weights, self.m, self.component_variances
        mu = float(np.dot(pi, m))
        d = m - mu
        variance = float(np.dot(pi, var + d * d))
        third = float(np.dot(pi, d**3 + 3.0 * d * var))
        return mu, variance, third

    def copy(self) -> "GmmModel":
        return GmmModel(self.alpha.copy(), self.beta.copy(), self.nu.copy(), self.m.copy(), self.W.copy())

    def validate(self) -> None:
        if not (np.all(self.alpha > 0) and np.all(self.beta > 0) and np.all(self.W > 0) and np.all(self.nu > D - 1)):
            raise DataError("GMM parameters left the valid region (alpha, beta, W > 0, nu > D - 1)")

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "clusters": [
                {"alpha": float(a), "beta": float(b), "nu": float(n), "m": float(mk), "W": float(w)}
                for a, b, n, mk, w in zip(self.alpha, self.beta, self.nu, self.m, self.W)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GmmModel":
        clusters = data["clusters"]
        if len(clusters) != data["K"]:
            raise DataError("cluster count does not match K")
        cols = {key: np.array([c[key] for c in clusters], dtype=float) for key in ("alpha", "beta", "nu", "m", "W")}
        model = cls(**cols)
        model.validate()
        return model

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "GmmModel":
        return cls.from_dict(json.loads(text))


def _finite_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise DataError("data must be nonempty")
    if not np.all(np.isfinite(x)):
        raise DataError("data must be finite")
    return x


def init(K: int, seed_data, rng: np.random.Generator) -> GmmModel:
    """Prior parameters with means placed on the seed data."""
    if int(K) != K or K < 1:
        raise ConfigError(f"cluster count must be a positive integer, got {K!r}", field="clusters")
    K = int(K)
    x = _finite_data(seed_data)
    if x.size >= K:
        m = rng.choice(x, size=K, replace=False)
    elif K == 1:
        m = np.array([x.mean()])
    else:
        m = np.linspace(x.min(), x.max(), K)
    model = GmmModel(
        alpha=np.full(K, PRIOR_ALPHA),
        beta=np.full(K, PRIOR_BETA),
        nu=np.full(K, PRIOR_NU),
        m=np.asarray(m, dtype=float).copy(),
        W=np.full(K, PRIOR_W),
    )
    return zero_shift(model)


def log_rho(model: GmmModel, x: np.ndarray) -> np.ndarray:
    """Unnormalized log responsibilities, shape (N, K)."""
    log_pi = digamma(model.alpha) - digamma(model.alpha.sum())
    log_lambda = digamma(model.nu / 2.0) + D * LOG2 + np.log(model.W)
    diff = x[:, None] - model.m[None, :]
    return (
        log_pi
        + 0.5 * log_lambda
        - D / (2.0 * model.beta)
        - 0.5 * model.nu * model.W * diff * diff
    )


def responsibilities(model: GmmModel, data) -> np.ndarray:
    """Posterior cluster memberships r_nk (rows sum to one)."""
    x = _finite_data(data)
    lr = log_rho(model, x)
    lr -= lr.max(axis=1, keepdims=True)
    r = np.exp(lr)
    r /= r.sum(axis=1, keepdims=True)
    return r


def update(model: GmmModel, data) -> GmmModel:
    """One E-step plus M-step on ``data``, followed by the zero-mean shift."""
    x = _finite_data(data)
    r = responsibilities(model, x)
    nk = r.sum(axis=0)
    live = nk >= EMPTY_CLUSTER
    safe_nk = np.where(live, nk, 1.0)
    xbar = np.where(live, (r * x[:, None]).sum(axis=0) / safe_nk, model.m)
    dev = x[:, None] - xbar[None, :]
    sk = np.where(live, (r * dev * dev).sum(axis=0) / safe_nk, 0.0)

    beta_new = model.beta + nk
    m_new = (model.beta * model.m + nk * xbar) / beta_new
    d = xbar - model.m
    w_inv = 1.0 / model.W + nk * sk + model.beta * nk / (model.beta + nk) * d * d
    new = GmmModel(
        alpha=model.alpha + nk,
        beta=beta_new,
        nu=model.nu + nk,
        m=m_new,
        W=1.0 / w_inv,
    )
    new.validate()
    return zero_shift(new)


def zero_shift(model: GmmModel) -> GmmModel:
    """Move every component mean so that sum_k pi_k m_k = 0."""
    out = model.copy()
    pi = out.weights
    out.m = out.m - np.dot(pi, out.m)
    # A second pass removes the rounding left by the first.
    out.m = out.m - np.dot(pi, out.m)
    return out


def sample(model: GmmModel, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` values: component by weight, then Normal(m_k, 1 / (nu_k W_k))."""
    if n < 0:
        raise ConfigError(f"sample count must be non-negative, got {n}", field="n")
    ks = rng.choice(model.K, size=n, p=model.weights)
    std = np.sqrt(model.component_variances)
    return model.m[ks] + std[ks] * rng.standard_normal(n)


def fit_to_negated_errors(model: GmmModel, errors) -> GmmModel:
    """Move the model toward the law of the negated errors."""
    return update(model, -_finite_data(errors))
