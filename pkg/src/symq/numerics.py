"""Seeded randomness, the digamma function and moment statistics."""

from __future__ import annotations

import math

import numpy as np

from .errors import DataError, DegenerateSampleError

# Bernoulli-number coefficients of the asymptotic digamma series, B_2n / (2n).
_DIGAMMA_SERIES = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_ASYMPTOTIC_START = 6.0


def make_rng(seed) -> np.random.Generator:
    """Return a PCG64 generator. Identical seeds give identical streams."""
    return np.random.default_rng(seed)


def spawn_streams(seed: int, names) -> dict[str, np.random.Generator]:
    """Derive one independent generator per name from a single seed.

    Streams are keyed by position in ``names``; adding a name at the end never
    changes the earlier streams.
    """
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(child) for name, child in zip(names, children)}


def digamma(x):
    """Digamma function for positive arguments (scalar or array).

    Uses the recurrence psi(x) = psi(x + 1) - 1/x to move the argument above 6,
    then the asymptotic expansion.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DataError("digamma is defined here only for finite x > 0")
    shift = np.zeros_like(arr)
    z = arr.copy()
    while True:
        low = z < _ASYMPTOTIC_START
        if not low.any():
            break
        shift[low] += 1.0 / z[low]
        z[low] += 1.0
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    for coef in reversed(_DIGAMMA_SERIES):
        series = (series + coef) * inv2
    out = np.log(z) - 0.5 / z - series - shift
    return float(out) if out.ndim == 0 else out


class MomentAccumulator:
    """One-pass count, mean and second/third central moment sums."""

    def __init__(self, values=None):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0
        self.m3 = 0.0
        if values is not None:
            self.extend(values)

    def push(self, x: float) -> None:
        n1 = self.count
        self.count += 1
        n = self.count
        delta = x - self.mean
        delta_n = delta / n
        term1 = delta * delta_n * n1
        self.mean += delta_n
        self.m3 += term1 * delta_n * (n - 2) - 3.0 * delta_n * self.m2
        self.m2 += term1

    def extend(self, values) -> None:
        """Merge a whole batch using the pairwise combination rule."""
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size == 0:
            return
        other = MomentAccumulator()
        other.count = arr.size
        other.mean = float(arr.mean())
        dev = arr - other.mean
        other.m2 = float(np.dot(dev, dev))
        other.m3 = float(np.sum(dev**3))
        self.merge(other)

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2, self.m3 = other.count, other.mean, other.m2, other.m3
            return self
        na, nb = self.count, other.count
        n = na + nb
        delta = other.mean - self.mean
        m3 = (
            self.m3
            + other.m3
            + delta**3 * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n
        )
        m2 = self.m2 + other.m2 + delta * delta * na * nb / n
        self.mean = (na * self.mean + nb * other.mean) / n
        self.m2 = max(m2, 0.0)
        self.m3 = m3
        self.count = n
        return self

    def __add__(self, other: "MomentAccumulator") -> "MomentAccumulator":
        out = MomentAccumulator()
        out.merge(self)
        out.merge(other)
        return out

    @property
    def variance(self) -> float:
        """Population variance (divides by count)."""
        if self.count == 0:
            return math.nan
        return self.m2 / self.count

    @property
    def third_moment(self) -> float:
        if self.count == 0:
            return math.nan
        return self.m3 / self.count

    @property
    def skewness(self) -> float:
        if self.count < 3:
            raise DegenerateSampleError(f"skewness needs at least 3 samples, got {self.count}")
        var = self.variance
        # Relative threshold: a constant sample leaves only rounding noise in m2.
        if not var > 1e-24 * max(1.0, self.mean * self.mean):
            raise DegenerateSampleError("skewness is undefined for a zero-variance sample")
        return self.third_moment / var**1.5

    def __repr__(self):
        return f"MomentAccumulator(count={self.count}, mean={self.mean!r}, m2={self.m2!r}, m3={self.m3!r})"


def _as_finite_1d(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise DataError("samples must be finite")
    return arr


def skewness(samples) -> float:
    """Sample skewness mu3 / sigma^3 from population central moments."""
    return MomentAccumulator(_as_finite_1d(samples)).skewness


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def symmetry_statistic(samples, min_samples: int = 100) -> float:
    """KS distance between the median-centred sample and its mirror image.

    0 means the empirical distribution is exactly symmetric about its median.
    Centring makes the statistic measure shape only: zero-mean correction noise
    leaves the error location where it was.
    """
    arr = _as_finite_1d(samples)
    if arr.size < min_samples:
        raise DegenerateSampleError(f"symmetry statistic needs at least {min_samples} samples, got {arr.size}")
    centred = arr - np.median(arr)
    return ks_statistic(centred, -centred)
