"""Symmetric correction layer: Bellman-error collection, GMM refresh, noise and snapshots."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import gmm
from .errors import ConfigError, DegenerateSampleError, ShapeError
from .numerics import skewness, symmetry_statistic


@dataclass
class CorrectionConfig:
    enabled: bool = True
    k: int = 1
    clusters: int = 10

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"must be >= 1, got {self.k}", field="k")
        if self.clusters < 1:
            raise ConfigError(f"must be >= 1, got {self.clusters}", field="clusters")


def collect_errors(ensemble, batch, y) -> np.ndarray:
    """Bellman errors y - Q_i(s, a), one row per critic."""
    y = np.asarray(y, dtype=float)
    rows = []
    for i in range(len(ensemble)):
        q = ensemble.q(i, batch.states, batch.actions)
        if q.shape != y.shape:
            raise ShapeError(f"target shape {y.shape} != critic output shape {q.shape}")
        rows.append(y - q)
    return np.array(rows)


class NoiseModel:
    """Holds the GMM between refreshes and counts how often it was fitted."""

    def __init__(self, cfg: CorrectionConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self.model: gmm.GmmModel | None = None
        self.refreshes = 0

    @property
    def ready(self) -> bool:
        return self.cfg.enabled and self.refreshes > 0

    def maybe_refresh(self, errors, gradient_step: int) -> bool:
        if not self.cfg.enabled:
            return False
        if self.model is None:
            self.model = gmm.init(self.cfg.clusters, -np.ravel(errors), self.rng)
        new = maybe_refresh(self.model, errors, gradient_step, self.cfg)
        refreshed = new is not self.model
        self.model = new
        self.refreshes += refreshed
        return refreshed

    def draw(self, batch_size: int, critic_index: int = 0) -> np.ndarray:
        # Before the first fit the model is an unfitted prior; inject nothing.
        if not self.ready:
            return np.zeros(batch_size)
        return draw_noise(self.model, batch_size, critic_index, self.rng, self.cfg)


def maybe_refresh(model: gmm.GmmModel, errors, gradient_step: int, cfg: CorrectionConfig) -> gmm.GmmModel:
    """Fit the model to the pooled negated errors when ``gradient_step`` is a multiple of k."""
    if not cfg.enabled or gradient_step % cfg.k != 0:
        return model
    return gmm.fit_to_negated_errors(model, np.ravel(errors))


def draw_noise(model, batch_size, critic_index, rng, cfg: CorrectionConfig | None = None) -> np.ndarray:
    """Independent noise draws for one critic's mini-batch."""
    if (cfg is not None and not cfg.enabled) or model is None:
        return np.zeros(batch_size)
    return gmm.sample(model, rng, batch_size)


@dataclass
class ErrorSnapshot:
    step: int
    pre_errors: np.ndarray
    noise: np.ndarray
    post_errors: np.ndarray
    skew_pre: float
    skew_post: float
    symmetry_pre: float
    symmetry_post: float

    def summary(self) -> dict:
        def clean(v):
            return None if v is None or math.isnan(v) else float(v)

        return {
            "step": self.step,
            "skew_pre": clean(self.skew_pre),
            "skew_post": clean(self.skew_post),
            "symmetry_pre": clean(self.symmetry_pre),
            "symmetry_post": clean(self.symmetry_post),
        }


def _safe(stat, values):
    try:
        return stat(values)
    except DegenerateSampleError:
        return math.nan


def snapshot(step: int, pre_errors, noise) -> ErrorSnapshot:
    """Record errors before and after correction with their shape statistics.

    Statistics that are undefined for the sample (zero variance, too few
    points) are stored as NaN.
    """
    pre = np.ravel(np.asarray(pre_errors, dtype=float))
    eta = np.ravel(np.asarray(noise, dtype=float))
    if pre.shape != eta.shape:
        raise ShapeError(f"errors {pre.shape} and noise {eta.shape} differ in length")
    post = pre + eta
    return ErrorSnapshot(
        step=step,
        pre_errors=pre,
        noise=eta,
        post_errors=post,
        skew_pre=_safe(skewness, pre),
        skew_post=_safe(skewness, post),
        symmetry_pre=_safe(symmetry_statistic, pre),
        symmetry_post=_safe(symmetry_statistic, post),
    )


ERRORS_HEADER = ("step", "kind", "value")


def write_errors_csv(snapshots, path) -> None:
    """Long-format dump: one row per (step, kind in {pre, noise, post}, value)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ERRORS_HEADER)
        for snap in snapshots:
            for kind, values in (("pre", snap.pre_errors), ("noise", snap.noise), ("post", snap.post_errors)):
                for v in values:
                    writer.writerow((snap.step, kind, repr(float(v))))


def read_errors_csv(path) -> list[ErrorSnapshot]:
    by_step: dict[int, dict[str, list]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            by_step.setdefault(int(row["step"]), {"pre": [], "noise": [], "post": []})[row["kind"]].append(float(row["value"]))
    return [snapshot(step, cols["pre"], cols["noise"]) for step, cols in sorted(by_step.items())]


def write_summary_json(snapshots, path, extra=None) -> None:
    payload = dict(extra or {})
    payload["snapshots"] = [s.summary() for s in snapshots]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def noise_histogram(snap: ErrorSnapshot, bins: int = 50):
    """Histograms of pre-errors and of negated noise for side-by-side plotting.

    The negated noise is shifted to the pre-error mean so the two shapes
    overlay; the stored noise itself stays zero-mean.
    """
    neg_noise = -snap.noise + snap.pre_errors.mean() - (-snap.noise).mean()
    lo = min(snap.pre_errors.min(), neg_noise.min(), snap.post_errors.min())
    hi = max(snap.pre_errors.max(), neg_noise.max(), snap.post_errors.max())
    if hi <= lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    return {
        "edges": edges,
        "pre": np.histogram(snap.pre_errors, edges, density=True)[0],
        "neg_noise_shifted": np.histogram(neg_noise, edges, density=True)[0],
        "post": np.histogram(snap.post_errors, edges, density=True)[0],
    }
