"""European options under the NES risk-neutral mixture.

Each mixture component is a Black-Scholes price with vol sigma_k/sqrt(2)
and an effective "NES dividend" q_k = r_f - mu_k - (xi' + 1/2) s_k^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import ConvergenceError, InputError
from .market import MarketEnv, OptionQuote
from .nesdist import risk_neutral_density, solve_xi_prime
from .potential import NesParams, stationary_density
from .special import norm_cdf, norm_pdf

__all__ = [
    "MarketEnv",
    "OptionQuote",
    "NesDividends",
    "bs_price",
    "bs_d1",
    "nes_dividends",
    "nes_option_price",
    "nes_component_prices",
    "price_by_quadrature",
    "implied_vol",
    "bs_delta_from_implied",
]

_KINDS = ("call", "put")


def _check_kind(kind: str) -> None:
    if kind not in _KINDS:
        raise InputError(f"option kind must be 'call' or 'put', got {kind!r}")


def bs_d1(spot, strike, T, vol, r, q_div):
    return (np.log(spot / strike) + (r - q_div + 0.5 * vol * vol) * T) / (vol * np.sqrt(T))


def bs_price(spot, strike, T, vol, r, q_div=0.0, kind: str = "call"):
    """Dividend-adjusted Black-Scholes price; ``vol = 0`` gives the discounted intrinsic forward value."""
    _check_kind(kind)
    spot, strike, vol = np.asarray(spot, float), np.asarray(strike, float), np.asarray(vol, float)
    if np.any(spot <= 0) or np.any(strike <= 0) or np.any(np.asarray(T) <= 0) or np.any(vol < 0):
        raise InputError("bs_price needs positive spot, strike, T and non-negative vol")
    df_s = spot * np.exp(-q_div * T)
    df_k = strike * np.exp(-r * T)
    sign = 1.0 if kind == "call" else -1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = bs_d1(spot, strike, T, vol, r, q_div)
        d2 = d1 - vol * np.sqrt(T)
        price = sign * (df_s * norm_cdf(sign * d1) - df_k * norm_cdf(sign * d2))
    intrinsic = np.maximum(sign * (df_s - df_k), 0.0)
    out = np.where(vol > 0, price, intrinsic)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NesDividends:
    q_k: np.ndarray
    xi_prime: float
    weights: np.ndarray  # risk-neutral weights omega_k^(q)
    vols: np.ndarray  # sigma_k / sqrt(2)


def nes_dividends(params: NesParams, market: MarketEnv, T: float | None = None) -> NesDividends:
    p = params if T is None else params.replace(T=float(T))
    xi = solve_xi_prime(p, market)
    dens = stationary_density(p)
    vols = dens.sigmas / np.sqrt(2.0)
    q_k = market.r_f - dens.mus - (xi + 0.5) * vols ** 2
    w = dens.mixture.tilt(xi).weights
    return NesDividends(q_k, xi, w, vols)


def nes_component_prices(params: NesParams, market: MarketEnv, strike, T: float, kind: str = "call"):
    """Per-component Black-Scholes prices (last axis) and the dividends used."""
    _check_kind(kind)
    div = nes_dividends(params, market, T)
    K = np.asarray(strike, dtype=float)[..., None]
    comps = bs_price(market.spot, K, T, div.vols, market.r_f, div.q_k, kind)
    return comps, div


def nes_option_price(params: NesParams, market: MarketEnv, strike, T: float, kind: str = "call"):
    """Closed-form price: sum_k omega_k^(q) BS(sigma_k/sqrt 2, q_k)."""
    comps, div = nes_component_prices(params, market, strike, T, kind)
    out = comps @ div.weights
    return float(out) if np.ndim(out) == 0 else out


def price_by_quadrature(
    params: NesParams, market: MarketEnv, strike: float, T: float, kind: str = "call", payoff=None
) -> float:
    """Discounted payoff integrated against the risk-neutral density (oracle route).

    ``payoff`` optionally replaces the vanilla payoff by any function of S_T.
    """
    dens = risk_neutral_density(params, market, T)
    mix = dens.mixture
    lo, hi = mix.support(12.0)
    S0, K = market.spot, float(strike)
    if payoff is None:
        _check_kind(kind)
        sign = 1.0 if kind == "call" else -1.0

        def payoff(s):
            return max(sign * (s - K), 0.0)

        y_k = np.log(K / S0)
        breaks = [y_k] if lo < y_k < hi else []
    else:
        breaks = []
    val, err = quad(
        lambda y: payoff(S0 * np.exp(y)) * mix.pdf(y), lo, hi,
        points=breaks or None, epsabs=0.0, epsrel=1e-13, limit=400,
    )
    if not np.isfinite(val) or (val != 0 and err > 1e-9 * abs(val) and err > 1e-15):
        raise ConvergenceError(f"payoff quadrature did not converge (estimate {val!r}, error {err!r})")
    return float(np.exp(-market.r_f * T) * val)


def implied_vol(price: float, spot: float, strike: float, T: float, r: float, q_div: float, kind: str,
                lo: float = 1e-4, hi: float = 5.0) -> float:
    """Invert ``bs_price`` for the volatility by bracketed root finding on [lo, hi]."""
    _check_kind(kind)
    sign = 1.0 if kind == "call" else -1.0
    df_s, df_k = spot * np.exp(-q_div * T), strike * np.exp(-r * T)
    lower = max(sign * (df_s - df_k), 0.0)
    upper = df_s if kind == "call" else df_k
    if price < lower:
        raise InputError(f"price {price!r} is below the no-arbitrage lower bound {lower!r}")
    if price > upper:
        raise InputError(f"price {price!r} is above the no-arbitrage upper bound {upper!r}")
    f = lambda v: bs_price(spot, strike, T, v, r, q_div, kind) - price  # noqa: E731
    flo, fhi = f(lo), f(hi)
    if flo > 0:
        raise InputError(f"price {price!r} is below the model price at vol {lo}")
    if fhi < 0:
        raise InputError(f"price {price!r} is above the model price at vol {hi}")
    return float(brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500))


def bs_delta_from_implied(quote: OptionQuote, market: MarketEnv) -> float:
    """Absolute Black-Scholes delta at the quote's implied vol."""
    T = quote.expiry_T
    vol = quote.implied_vol
    if vol is None:
        vol = implied_vol(quote.mid, market.spot, quote.strike, T, market.r_f, market.q_div, quote.kind)
    d1 = bs_d1(market.spot, quote.strike, T, vol, market.r_f, market.q_div)
    disc = np.exp(-market.q_div * T)
    if quote.kind == "call":
        return float(disc * norm_cdf(d1))
    return float(disc * norm_cdf(-d1))


def bs_vega(spot, strike, T, vol, r, q_div=0.0):
    d1 = bs_d1(spot, strike, T, vol, r, q_div)
    return spot * np.exp(-q_div * T) * norm_pdf(d1) * np.sqrt(T)
