"""Mean first-passage times and escape rates.

The exact route integrates the backward-equation solution

    T(y0) = (2 / h^2) int_{y*}^{y0} dy Psi0(y)^-2 int_y^inf dz Psi0(z)^2,

with the inner integral in closed form as a sum of normal cdfs.  The
saddle-point route expands the outer integrand around the barrier top.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import logsumexp

from .errors import ConvergenceError, InputError
from .potential import GroundState, NesParams, PotentialFn
from .special import log_norm_cdf


@dataclass(frozen=True)
class EscapeResult:
    mean_passage_time: float
    rate: float
    method: str
    y0: float | None = None
    barrier: float | None = None  # Delta V, saddle point only
    kramers_time: float | None = None  # classical limit, saddle point only
    ncdf_factor: float | None = None
    sigma_m: float | None = None
    abs_error: float | None = None

    @property
    def lam(self) -> float:
        return self.rate


def log_tail_mass(gs: GroundState, y, upper: bool = True):
    """log of int_y^inf Psi0^2 (``upper``) or int_-inf^y Psi0^2."""
    mix = gs.density.mixture
    y = np.asarray(y, dtype=float)
    z = (mix.means - y[..., None]) / mix.stdevs
    if not upper:
        z = -z
    with np.errstate(divide="ignore"):
        logw = np.log(mix.weights)
    out = logsumexp(logw + log_norm_cdf(z), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def _log_integrand(gs: GroundState, upper: bool):
    return lambda y: log_tail_mass(gs, y, upper) - 2.0 * gs.log_psi(y)


def passage_time_quadrature(
    params: NesParams,
    y0: float,
    y_star: float,
    rtol: float = 1e-10,
    potential: PotentialFn | None = None,
) -> EscapeResult:
    """Exact mean time to reach ``y_star`` from ``y0``.

    For ``y0 > y_star`` the process is absorbed from above with reflection
    at +inf; for ``y0 < y_star`` the mirrored problem (absorbed from below,
    reflection at -inf) is solved.
    """
    y0, y_star = float(y0), float(y_star)
    if not (np.isfinite(y0) and np.isfinite(y_star)):
        raise InputError("y0 and y_star must be finite")
    if y0 == y_star:
        raise InputError("y0 coincides with the absorbing point; the passage time is zero")
    pot = potential if potential is not None else PotentialFn(params)
    gs = pot.ground
    upper = y0 > y_star
    lo, hi = sorted((y_star, y0))
    logf = _log_integrand(gs, upper)

    probe = np.linspace(lo, hi, 257)
    probe = np.concatenate([probe, [c.location for c in pot.critical_points if lo < c.location < hi]])
    shift = float(np.max(logf(probe)))
    breaks = sorted({c.location for c in pot.critical_points if lo < c.location < hi})

    val, err = quad(
        lambda y: np.exp(logf(y) - shift),
        lo,
        hi,
        points=breaks or None,
        epsabs=0.0,
        epsrel=rtol,
        limit=500,
    )
    if not np.isfinite(val) or err > max(1e-8, 100 * rtol) * abs(val):
        raise ConvergenceError(f"passage-time quadrature reached relative error {err / abs(val):.3g}")
    scale = 2.0 / params.h ** 2 * np.exp(shift)
    tau = scale * val
    return EscapeResult(tau, 1.0 / tau, "quadrature", y0=y0, abs_error=scale * err)


def passage_time_saddle(
    params: NesParams, potential: PotentialFn | None = None, normalization: str = "local"
) -> EscapeResult:
    """Saddle-point mean time to leave the metastable well of a double well.

    ``normalization="local"`` approximates the normalization of Psi0^2 by the
    Gaussian integral around the metastable minimum (the Kramers prefactor)
    and then multiplies by the smeared cdf factor.  ``"exact"`` keeps the
    true normalization, i.e. uses Psi0(y_m)^-2 directly for the barrier
    weight; only the Gaussian expansion around the barrier top remains.
    """
    if normalization not in ("local", "exact"):
        raise InputError(f"unknown normalization {normalization!r}")
    pot = potential if potential is not None else PotentialFn(params)
    if not pot.is_double_well:
        raise InputError("saddle-point inapplicable: the potential has a single well")
    h2 = params.h ** 2
    y_loc, y_m = pot.local_min, pot.barrier
    curv_min = float(pot.d2V(y_loc))
    curv_max = abs(float(pot.d2V(y_m)))
    dV = float(pot.value(y_m) - pot.value(y_loc))
    kramers = 2.0 * np.pi / np.sqrt(curv_min * curv_max) * np.exp(2.0 * dV / h2)

    sigma_m2 = h2 / (2.0 * curv_max)
    mix = pot.ground.density.mixture
    # mass of Psi0^2 on the metastable side, smeared over the barrier width
    direction = 1.0 if y_loc > y_m else -1.0
    z = direction * (mix.means - y_m) / np.sqrt(mix.stdevs ** 2 + sigma_m2)
    with np.errstate(divide="ignore"):
        factor = float(np.exp(logsumexp(np.log(mix.weights) + log_norm_cdf(z))))
    if normalization == "local":
        tau = kramers * factor
    else:
        log_w = -2.0 * float(pot.ground.log_psi(y_m))
        tau = 2.0 / h2 * np.exp(log_w) * np.sqrt(2.0 * np.pi * sigma_m2) * factor
    return EscapeResult(
        tau, 1.0 / tau, "saddle_point" if normalization == "local" else "saddle_point_exact", y0=y_loc, barrier=dV,
        kramers_time=kramers, ncdf_factor=factor, sigma_m=float(np.sqrt(sigma_m2)),
    )


def kramers_rate(params: NesParams, potential: PotentialFn | None = None) -> float:
    """Classical rate sqrt(V''(y*) |V''(y_m)|) / (2 pi) exp(-2 Delta V / h^2)."""
    return 1.0 / passage_time_saddle(params, potential).kramers_time


def default_absorbing_point(pot: PotentialFn) -> float:
    if not pot.is_double_well:
        raise InputError("single-well potential: an explicit crisis threshold y_star is required")
    return pot.global_min


def escape_rate(
    params: NesParams,
    y0: float,
    y_star: float | None = None,
    method: str = "quadrature",
    potential: PotentialFn | None = None,
) -> float:
    """Escape intensity 1 / T; infinite when ``y0`` sits on the absorbing point."""
    pot = potential if potential is not None else PotentialFn(params)
    if method == "saddle_point":
        return passage_time_saddle(params, pot).rate
    if method != "quadrature":
        raise InputError(f"unknown escape-rate method {method!r}")
    target = default_absorbing_point(pot) if y_star is None else float(y_star)
    if float(y0) == target:
        return float("inf")
    return passage_time_quadrature(params, y0, target, potential=pot).rate
