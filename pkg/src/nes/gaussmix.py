"""Finite Gaussian mixtures with closed-form moments.

Means and standard deviations are stored in absolute units; any horizon
scaling is applied by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .special import norm_cdf

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


class CentralStats(NamedTuple):
    mean: float
    variance: float
    skewness: float
    kurtosis: float


def _finite_x(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("mixture evaluated at a non-finite point")
    return arr


@dataclass(frozen=True)
class GaussianMixture:
    """Weighted sum of normal densities ``sum_k w_k N(mu_k, s_k^2)``."""

    weights: np.ndarray
    means: np.ndarray
    stdevs: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        m = np.atleast_1d(np.asarray(self.means, dtype=float))
        s = np.atleast_1d(np.asarray(self.stdevs, dtype=float))
        if not (w.ndim == m.ndim == s.ndim == 1) or not (len(w) == len(m) == len(s)) or len(w) == 0:
            raise ValueError("weights, means and stdevs must be 1-D vectors of one common length")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(m)) and np.all(np.isfinite(s))):
            raise ValueError("mixture parameters must be finite")
        if np.any(w < 0) or np.any(w > 1):
            raise ValueError("mixture weights must lie in [0, 1]")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {w.sum()!r}, expected 1")
        if np.any(s <= 0):
            raise ValueError("mixture standard deviations must be positive")
        for name, val in (("weights", w), ("means", m), ("stdevs", s)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n_components(self) -> int:
        return len(self.weights)

    # -- densities ---------------------------------------------------------

    def _component_logpdf(self, x: np.ndarray) -> np.ndarray:
        z = (x[..., None] - self.means) / self.stdevs
        return -0.5 * z * z - np.log(self.stdevs) - _LOG_SQRT_2PI

    def logpdf(self, x):
        x = _finite_x(x)
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights)
        out = logsumexp(self._component_logpdf(x) + logw, axis=-1)
        return float(out) if out.ndim == 0 else out

    def pdf(self, x):
        x = _finite_x(x)
        z = (x[..., None] - self.means) / self.stdevs
        dens = np.exp(-0.5 * z * z) / (self.stdevs * np.sqrt(2.0 * np.pi))
        out = dens @ self.weights
        return float(out) if np.ndim(out) == 0 else out

    def cdf(self, x):
        x = _finite_x(x)
        out = norm_cdf((x[..., None] - self.means) / self.stdevs) @ self.weights
        return float(out) if np.ndim(out) == 0 else out

    def sf(self, x):
        """Upper tail ``1 - cdf``, accurate far to the right."""
        x = _finite_x(x)
        out = norm_cdf((self.means - x[..., None]) / self.stdevs) @ self.weights
        return float(out) if np.ndim(out) == 0 else out

    # -- moments -----------------------------------------------------------

    def raw_moments(self, order: int = 4) -> np.ndarray:
        """Uncentred moments ``M_1 .. M_order`` for ``order <= 4``."""
        if order not in (1, 2, 3, 4):
            raise ValueError(f"raw moments are available up to order 4, got {order!r}")
        w, m, s2 = self.weights, self.means, self.stdevs ** 2
        per_component = [
            m,
            m ** 2 + s2,
            m ** 3 + 3.0 * m * s2,
            m ** 4 + 6.0 * m ** 2 * s2 + 3.0 * s2 ** 2,
        ]
        return np.array([w @ p for p in per_component[:order]])

    def central_moments(self) -> tuple[float, float, float]:
        """Second, third and fourth central moments, summed component-wise."""
        w, s2 = self.weights, self.stdevs ** 2
        d = self.means - w @ self.means
        c2 = w @ (d ** 2 + s2)
        c3 = w @ (d ** 3 + 3.0 * d * s2)
        c4 = w @ (d ** 4 + 6.0 * d ** 2 * s2 + 3.0 * s2 ** 2)
        return float(c2), float(c3), float(c4)

    def central_stats(self) -> CentralStats:
        mean = float(self.weights @ self.means)
        c2, c3, c4 = self.central_moments()
        if not c2 > 0:
            raise ArithmeticError("mixture variance is not positive")
        return CentralStats(mean, c2, c3 / c2 ** 1.5, c4 / c2 ** 2)

    def mgf(self, u):
        """Moment generating function ``E[exp(u X)]``."""
        u = np.asarray(u, dtype=float)
        out = np.exp(u[..., None] * self.means + 0.5 * (u[..., None] * self.stdevs) ** 2) @ self.weights
        return float(out) if np.ndim(out) == 0 else out

    # -- transforms --------------------------------------------------------

    def shift(self, c: float) -> "GaussianMixture":
        return GaussianMixture(self.weights, self.means + c, self.stdevs)

    def tilt(self, b: float) -> "GaussianMixture":
        """Exponential tilt: density proportional to ``exp(b x) p(x)``."""
        s2 = self.stdevs ** 2
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights) + b * self.means + 0.5 * b * b * s2
        w = np.exp(logw - logsumexp(logw))
        return GaussianMixture(w / w.sum(), self.means + b * s2, self.stdevs)

    def support(self, n_std: float = 12.0) -> tuple[float, float]:
        """Interval covering the mixture to ``n_std`` component deviations."""
        smax = float(self.stdevs.max())
        return float(self.means.min() - n_std * smax), float(self.means.max() + n_std * smax)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        comp = rng.choice(self.n_components, size=n, p=self.weights)
        return self.means[comp] + self.stdevs[comp] * rng.standard_normal(n)
