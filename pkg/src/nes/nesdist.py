"""Finite-horizon NES densities under the real and the risk-neutral measure.

Both are exponential tilts of the stationary three-component mixture:
the real-measure density by the non-equilibrium tilt ``b_T``, the
risk-neutral one by ``xi' = xi + b_T`` fixed through the drift constraint
``E_q[y_T] = (r_f - q - h^2/2) T``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ConvergenceError, InputError
from .gaussmix import GaussianMixture
from .market import MarketEnv
from .passage import escape_rate
from .potential import NesParams, stationary_density

__all__ = [
    "MeasureDensity",
    "LinearTiltDensity",
    "XiSolution",
    "stationary_stats",
    "tilt_b",
    "real_density",
    "solve_xi_prime",
    "solve_xi_prime_detail",
    "xi_prime_fixed_point",
    "xi_prime_small_T",
    "xi_objective",
    "risk_neutral_density",
    "time_dependent_moments",
]

_MAX_ITER = 200


@dataclass(frozen=True)
class MeasureDensity:
    """Tilted three-component mixture; ``mus`` and ``sigma_hats`` are per unit horizon."""

    kind: str  # "real" or "risk_neutral"
    mixture: GaussianMixture
    tilt: float
    base: NesParams
    T: float

    @property
    def weights(self) -> np.ndarray:
        return self.mixture.weights

    @property
    def mus(self) -> np.ndarray:
        return self.mixture.means / self.T

    @property
    def sigma_hats(self) -> np.ndarray:
        return self.mixture.stdevs / np.sqrt(self.T)

    def pdf(self, y):
        return self.mixture.pdf(y)

    @property
    def mean_rate(self) -> float:
        """sum_k omega_k mu_k, the per-unit-horizon mean of y_T."""
        return float(self.weights @ self.mus)

    def forward_discrepancy(self, market: MarketEnv) -> float:
        """E[exp(y_T)] - exp((r_f - q) T); the drift constraint does not zero it."""
        return float(self.mixture.mgf(1.0) - np.exp((market.r_f - market.q_div) * self.T))


@dataclass(frozen=True)
class LinearTiltDensity:
    """Psi0^2(y) [1 + b (y - ybar)]: the un-exponentiated first-order form."""

    stationary: GaussianMixture
    b: float

    def pdf(self, y):
        mean = float(self.stationary.weights @ self.stationary.means)
        y = np.asarray(y, dtype=float)
        return self.stationary.pdf(y) * (1.0 + self.b * (y - mean))


def _horizon(params: NesParams, T: float | None) -> NesParams:
    if T is None:
        return params
    if not T > 0:
        raise InputError("horizon T must be positive")
    return params.replace(T=float(T))


def stationary_stats(params: NesParams) -> tuple[float, float]:
    """Mean and variance of the stationary density."""
    mix = stationary_density(params).mixture
    mean = float(mix.weights @ mix.means)
    return mean, mix.central_moments()[0]


def tilt_b(
    params: NesParams,
    y0: float,
    t: float,
    *,
    rate: float | None = None,
    y_star: float | None = None,
) -> float:
    """Non-equilibrium tilt ((y0 - ybar)/sigma_M^2) exp(-lambda t).

    ``rate`` overrides the escape rate; otherwise it comes from the exact
    passage-time quadrature (``y_star`` is required for single wells).
    """
    if t < 0:
        raise InputError("t must be non-negative")
    mean, var = stationary_stats(params)
    amp = (float(y0) - mean) / var
    if amp == 0.0:
        return 0.0
    lam = escape_rate(params, y0, y_star) if rate is None else float(rate)
    if t == 0.0:
        return amp
    return float(amp * np.exp(-lam * t))


def real_density(
    params: NesParams,
    y0: float,
    T: float | None = None,
    *,
    b: float | None = None,
    rate: float | None = None,
    y_star: float | None = None,
    form: str = "tilt",
):
    """Real-measure density of y_T started from ``y0``.

    ``form="tilt"`` gives the positive exponential-tilt mixture used for
    pricing; ``form="linear"`` gives the first-order linear form.
    """
    p = _horizon(params, T)
    if b is None:
        b = tilt_b(p, y0, p.T, rate=rate, y_star=y_star)
    stat = stationary_density(p).mixture
    if form == "linear":
        return LinearTiltDensity(stat, float(b))
    if form != "tilt":
        raise InputError(f"unknown density form {form!r}")
    return MeasureDensity("real", stat.tilt(b), float(b), params, p.T)


# ---------------------------------------------------------------------------
# xi' solver
# ---------------------------------------------------------------------------


def _drift_target(params: NesParams, market: MarketEnv) -> float:
    return market.r_f - market.q_div - 0.5 * params.h ** 2


def _tilted(xi: float, omega, mus, s2, T):
    """Weights and per-unit means of the tilt exp(xi y) of the stationary mixture."""
    with np.errstate(divide="ignore"):
        logw = np.log(omega) + xi * T * (mus + 0.5 * xi * s2)
    w = np.exp(logw - logsumexp(logw))
    return w, mus + xi * s2


def xi_objective(xi: float, params: NesParams, market: MarketEnv) -> float:
    """Convex dual objective log Z(xi') - xi' c T (up to a constant)."""
    dens = stationary_density(params)
    s2 = 0.5 * dens.sigmas ** 2
    T = params.T
    with np.errstate(divide="ignore"):
        logw = np.log(dens.omega) + xi * T * (dens.mus + 0.5 * xi * s2)
    return float(logsumexp(logw) - xi * _drift_target(params, market) * T)


@dataclass(frozen=True)
class XiSolution:
    xi_prime: float
    residual: float
    iterations: int
    method: str


def solve_xi_prime_detail(params: NesParams, market: MarketEnv) -> XiSolution:
    """Safeguarded Newton on the constraint residual, bisection inside a bracket."""
    dens = stationary_density(params)
    omega, mus, s2, T = dens.omega, dens.mus, 0.5 * dens.sigmas ** 2, params.T
    c = _drift_target(params, market)

    def resid(xi):
        w, m = _tilted(xi, omega, mus, s2, T)
        g = float(w @ m) - c
        slope = float(w @ s2) + T * float(w @ (m - w @ m) ** 2)
        return g, slope

    x = xi_prime_small_T(params, market)
    g, slope = resid(x)
    if g == 0.0:
        return XiSolution(x, 0.0, 0, "newton")
    # bracket: g is increasing in xi'
    step = max(1.0, abs(x))
    lo = hi = x
    glo = ghi = g
    for _ in range(_MAX_ITER):
        if g > 0:
            lo = lo - step
            glo, _ = resid(lo)
            if glo <= 0:
                break
        else:
            hi = hi + step
            ghi, _ = resid(hi)
            if ghi >= 0:
                break
        step *= 2.0
    else:
        raise ConvergenceError(f"could not bracket xi' (last iterate {x!r}, residual {g!r})")
    if g > 0:
        hi, ghi = x, g
    else:
        lo, glo = x, g

    for it in range(1, _MAX_ITER + 1):
        g, slope = resid(x)
        if abs(g) < 1e-14:
            return XiSolution(x, g, it, "newton")
        if g > 0:
            hi = min(hi, x)
        else:
            lo = max(lo, x)
        x_new = x - g / slope if slope > 0 else 0.5 * (lo + hi)
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if x_new == x or hi - lo <= 4e-16 * max(1.0, abs(x)):
            g, _ = resid(x_new)
            return XiSolution(x_new, g, it, "newton")
        x = x_new
    try:
        return xi_prime_fixed_point(params, market, start=x)
    except ConvergenceError:
        raise ConvergenceError(
            f"xi' solver did not converge in {_MAX_ITER} iterations (last iterate {x!r}, gradient {g!r})"
        ) from None


def solve_xi_prime(params: NesParams, market: MarketEnv) -> float:
    return solve_xi_prime_detail(params, market).xi_prime


def xi_prime_fixed_point(
    params: NesParams, market: MarketEnv, start: float | None = None, tol: float = 1e-15, max_iter: int = 10_000
) -> XiSolution:
    """Iterate xi' <- sum w (c - mu) e^{...} / sum w s^2 e^{...} to a fixed point.

    The bare map has slope -T Var(mu) / sum w s^2 at the root, which exceeds
    one in magnitude for long horizons and well separated components, so the
    update is relaxed: the step is halved whenever the fixed-point residual
    grows.
    """
    dens = stationary_density(params)
    omega, mus, s2, T = dens.omega, dens.mus, 0.5 * dens.sigmas ** 2, params.T
    c = _drift_target(params, market)

    def step(x):
        w, _ = _tilted(x, omega, mus, s2, T)
        return float(w @ (c - mus)) / float(w @ s2) - x

    x = xi_prime_small_T(params, market) if start is None else float(start)
    beta = 1.0
    d = step(x)
    for it in range(1, max_iter + 1):
        if abs(d) <= tol * max(1.0, abs(x)):
            w, m = _tilted(x, omega, mus, s2, T)
            return XiSolution(x, float(w @ m) - c, it, "fixed_point")
        x_new = x + beta * d
        d_new = step(x_new)
        if abs(d_new) >= abs(d) and beta > 1e-6:
            beta *= 0.5
            continue
        x, d = x_new, d_new
    raise ConvergenceError(f"fixed-point iteration for xi' did not converge (last iterate {x!r})")


def xi_prime_small_T(params: NesParams, market: MarketEnv) -> float:
    """T -> 0 limit: sum w (c - mu) / sum w s^2."""
    dens = stationary_density(params)
    s2 = 0.5 * dens.sigmas ** 2
    c = _drift_target(params, market)
    return float(dens.omega @ (c - dens.mus)) / float(dens.omega @ s2)


def risk_neutral_density(params: NesParams, market: MarketEnv, T: float | None = None) -> MeasureDensity:
    """Esscher tilt of the stationary density meeting the drift constraint."""
    p = _horizon(params, T)
    xi = solve_xi_prime(p, market)
    return MeasureDensity("risk_neutral", stationary_density(p).mixture.tilt(xi), xi, params, p.T)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def time_dependent_moments(
    params: NesParams,
    y0: float,
    t: float,
    *,
    b: float | None = None,
    rate: float | None = None,
    y_star: float | None = None,
) -> tuple[float, float, float]:
    """Mean, second and third moments about the stationary mean, to first order in b_t."""
    mix = stationary_density(params).mixture
    mean = float(mix.weights @ mix.means)
    var, m3, m4 = mix.central_moments()
    if b is None:
        b = tilt_b(params, y0, t, rate=rate, y_star=y_star)
    if abs(b) * np.sqrt(var) > 1.0:
        warnings.warn("|b_t| sigma_M exceeds 1: first-order moment corrections are unreliable",
                      RuntimeWarning, stacklevel=2)
    return mean + b * var, var + b * m3, m3 + b * m4
