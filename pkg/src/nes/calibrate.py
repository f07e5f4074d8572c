"""Calibration of (mu, sigma1, sigma2, a, h) to European option quotes.

The loss is the delta-weighted mean squared pricing error plus a penalty
on the risk-neutral drift constraint.  Minimization is a seeded
multi-start: Latin-hypercube starting points in the parameter box, each
refined by a bounded simplex search, with the best candidates polished by
bounded least squares on the residual vector.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares, minimize
from scipy.stats import qmc

from .errors import ConvergenceError, InputError
from .market import MarketEnv, OptionQuote
from .nesdist import solve_xi_prime_detail
from .pricing import bs_delta_from_implied, nes_option_price
from .potential import NesParams, PotentialFn, stationary_density

__all__ = [
    "PARAM_NAMES",
    "DEFAULT_BOUNDS",
    "CalibConfig",
    "CalibrationResult",
    "quote_weights",
    "loss",
    "calibrate",
    "synthetic_quotes",
    "strike_for_delta",
    "PotentialReport",
    "implied_potential_report",
    "classify_state",
]

PARAM_NAMES = ("mu", "sigma1", "sigma2", "a", "h")
DEFAULT_BOUNDS = {"mu": (0.0, 1.0), "sigma1": (0.01, 2.0), "sigma2": (0.01, 2.0), "a": (0.0, 1.0), "h": (0.01, 2.0)}


@dataclass(frozen=True)
class CalibConfig:
    reg_lambda: float | None = None  # None: 1e3 * mean(mid)^2
    atm_weight_boost: float = 2.0
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    n_starts: int = 12
    seed: int = 0
    tol: float = 1e-10
    max_local_evals: int = 1500
    n_polish: int = 3
    threads: int = 1
    initial: tuple | None = None  # optional (mu, sigma1, sigma2, a, h) tried before the Latin-hypercube starts

    def __post_init__(self):
        if self.reg_lambda is not None and self.reg_lambda < 0:
            raise InputError("reg_lambda must be non-negative")
        if self.n_starts < 1:
            raise InputError("n_starts must be at least 1")
        if self.atm_weight_boost <= 0:
            raise InputError("atm_weight_boost must be positive")
        for name in PARAM_NAMES:
            if name not in self.bounds:
                raise InputError(f"missing bounds for {name}")
            lo, hi = self.bounds[name]
            if not lo < hi:
                raise InputError(f"bounds for {name} must satisfy lower < upper")
        if self.initial is not None:
            init = np.asarray(self.initial, dtype=float)
            if init.shape != (len(PARAM_NAMES),) or np.any(init < self.lower) or np.any(init > self.upper):
                raise InputError("initial point must hold five values inside the bounds")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.bounds[n][0] for n in PARAM_NAMES], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.bounds[n][1] for n in PARAM_NAMES], dtype=float)


@dataclass
class CalibrationResult:
    params: NesParams
    xi_prime: float
    loss: float
    mape: float
    mape_relative: float
    per_quote_errors: np.ndarray
    converged: bool
    starts_summary: list
    n_evals: int
    message: str = ""

    def as_dict(self) -> dict:
        p = self.params
        return {
            "params": {"mu": p.mu1, "sigma1": p.sigma1, "sigma2": p.sigma2, "a": p.a, "h": p.h, "T": p.T},
            "xi_prime": self.xi_prime,
            "loss": self.loss,
            "mape": self.mape,
            "mape_relative": self.mape_relative,
            "per_quote_errors": [float(e) for e in self.per_quote_errors],
            "converged": self.converged,
            "starts_summary": [float(s) for s in self.starts_summary],
            "n_evals": self.n_evals,
            "message": self.message,
        }


def _check_quotes(quotes) -> float:
    if len(quotes) == 0:
        raise InputError("calibration needs at least one quote")
    kinds = {q.kind for q in quotes}
    if len(kinds) != 1:
        raise InputError("calls and puts are calibrated separately; got both kinds")
    Ts = {q.expiry_T for q in quotes}
    if len(Ts) != 1:
        raise InputError("all quotes in one calibration must share the expiry")
    return Ts.pop()


def quote_weights(quotes, market: MarketEnv, atm_weight_boost: float = 2.0) -> np.ndarray:
    """1/|delta| per quote, boosted for the strike nearest the forward."""
    w = np.empty(len(quotes))
    for i, q in enumerate(quotes):
        try:
            w[i] = 1.0 / bs_delta_from_implied(q, market)
        except (InputError, ValueError) as exc:
            warnings.warn(f"quote {i} (K={q.strike}): implied vol inversion failed ({exc}); unit weight used",
                          RuntimeWarning, stacklevel=2)
            w[i] = 1.0
        if not np.isfinite(w[i]):
            w[i] = 1.0
    fwd = market.forward(quotes[0].expiry_T)
    atm = int(np.argmin([abs(q.strike - fwd) for q in quotes]))
    w[atm] *= atm_weight_boost
    return w


def _reg_lambda(quotes, cfg: CalibConfig) -> float:
    if cfg.reg_lambda is not None:
        return float(cfg.reg_lambda)
    return 1e3 * float(np.mean([q.mid for q in quotes])) ** 2


def _residuals(theta, quotes, market, T, weights, lam):
    """Weighted pricing residuals and the drift-constraint residual."""
    p = NesParams.from_mu(*theta, T=T)
    sol = solve_xi_prime_detail(p, market)
    K = np.array([q.strike for q in quotes])
    mids = np.array([q.mid for q in quotes])
    model = nes_option_price(p, market, K, T, quotes[0].kind)
    n = len(quotes)
    r = np.sqrt(weights / n) * (np.atleast_1d(model) - mids)
    return np.append(r, np.sqrt(lam) * sol.residual), np.atleast_1d(model), sol.xi_prime


def loss(params: NesParams, quotes, market: MarketEnv, cfg: CalibConfig | None = None,
         weights: np.ndarray | None = None) -> float:
    """(1/N) sum w_n (C_model - C_mid)^2 + lambda (constraint residual)^2."""
    cfg = cfg or CalibConfig()
    T = _check_quotes(quotes)
    if weights is None:
        weights = quote_weights(quotes, market, cfg.atm_weight_boost)
    p = params.replace(T=T)
    sol = solve_xi_prime_detail(p, market)
    K = np.array([q.strike for q in quotes])
    mids = np.array([q.mid for q in quotes])
    model = np.atleast_1d(nes_option_price(p, market, K, T, quotes[0].kind))
    fit = float(np.mean(weights * (model - mids) ** 2))
    return fit + _reg_lambda(quotes, cfg) * sol.residual ** 2


def calibrate(quotes, market: MarketEnv, cfg: CalibConfig | None = None) -> CalibrationResult:
    cfg = cfg or CalibConfig()
    T = _check_quotes(quotes)
    # price on a unit spot; quotes are rescaled and errors scaled back
    scale = market.spot
    unit = MarketEnv(1.0, market.r_f, market.q_div)
    uq = [OptionQuote(q.strike / scale, q.expiry_T, q.kind, q.mid / scale, q.implied_vol) for q in quotes]
    weights = quote_weights(uq, unit, cfg.atm_weight_boost)
    lam = _reg_lambda(uq, cfg)
    lo, hi = cfg.lower, cfg.upper
    span = hi - lo
    counter = {"n": 0}

    def theta_of(u):
        return lo + span * np.clip(u, 0.0, 1.0)

    def resid(u):
        counter["n"] += 1
        try:
            r, _, _ = _residuals(theta_of(u), uq, unit, T, weights, lam)
        except (ValueError, ArithmeticError):
            return None
        return r

    def objective(u):
        with np.errstate(all="ignore"):
            r = resid(u)
        if r is None or not np.all(np.isfinite(r)):
            return 1e300
        return float(r @ r)

    sampler = qmc.LatinHypercube(d=len(PARAM_NAMES), seed=cfg.seed)
    starts = sampler.random(cfg.n_starts)
    if cfg.initial is not None:
        u_init = (np.asarray(cfg.initial, dtype=float) - lo) / span
        starts = np.vstack([u_init, starts])
    start_losses = [objective(u) for u in starts]
    if cfg.initial is not None and start_losses[0] <= cfg.tol:
        # already fitted: return the initial point untouched
        return _result(np.asarray(cfg.initial, dtype=float), uq, unit, T, weights, lam, scale,
                       [start_losses[0] * scale ** 2], counter["n"], True)

    def local(u0):
        res = minimize(objective, u0, method="Nelder-Mead", bounds=[(0.0, 1.0)] * 5,
                       options={"xatol": 1e-10, "fatol": 0.0, "maxfev": cfg.max_local_evals, "adaptive": True})
        return res.x, float(res.fun)

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            refined = list(pool.map(local, starts))
    else:
        refined = [local(u) for u in starts]
    finals = [f for _, f in refined]

    # polish the best candidates (ties broken by start index)
    order = sorted(range(len(refined)), key=lambda i: (finals[i], i))
    best_u, best_f = refined[order[0]]
    for i in order[: cfg.n_polish]:
        u0 = refined[i][0]

        def fun(u):
            with np.errstate(all="ignore"):
                r = resid(u)
            return np.full(len(uq) + 1, 1e150) if r is None else r

        try:
            ls = least_squares(fun, np.clip(u0, 0.0, 1.0), bounds=(0.0, 1.0), method="trf",
                               xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400, x_scale="jac")
        except (ValueError, ArithmeticError):
            continue
        f = float(ls.fun @ ls.fun)
        if f < best_f:
            best_u, best_f = ls.x, f
    best_f = min(best_f, min(start_losses))
    if best_f == min(start_losses) and objective(best_u) > best_f:
        best_u = starts[int(np.argmin(start_losses))]

    improved = best_f < min(start_losses) or best_f <= cfg.tol
    converged = bool(improved and np.isfinite(best_f))
    return _result(theta_of(best_u), uq, unit, T, weights, lam, scale, [f * scale ** 2 for f in finals],
                   counter["n"], converged)


def _result(theta, uq, unit, T, weights, lam, scale, summary, n_evals, converged) -> CalibrationResult:
    params = NesParams.from_mu(*theta, T=T)
    r, model, xi = _residuals(theta, uq, unit, T, weights, lam)
    mids = np.array([q.mid for q in uq])
    err = (model - mids) * scale
    rel = np.abs(model - mids) / np.where(mids > 0, mids, np.nan)
    return CalibrationResult(
        params=params,
        xi_prime=float(xi),
        loss=float(r @ r) * scale ** 2,
        mape=float(np.mean(np.abs(err))),
        mape_relative=float(np.nanmean(rel)),
        per_quote_errors=err,
        converged=converged,
        starts_summary=summary,
        n_evals=n_evals,
        message="" if converged else "no start improved on its initial loss",
    )


# ---------------------------------------------------------------------------
# synthetic quotes
# ---------------------------------------------------------------------------


def strike_for_delta(params: NesParams, market: MarketEnv, T: float, kind: str, delta: float) -> float:
    """Strike whose model price has Black-Scholes |delta| equal to ``delta``."""
    fwd = market.forward(T)

    def f(K):
        price = nes_option_price(params, market, K, T, kind)
        return bs_delta_from_implied(OptionQuote(K, T, kind, price), market) - delta

    # walk away from the forward until the delta crosses the target
    step = 1.02 if kind == "call" else 1.0 / 1.02
    a = fwd * (0.97 if kind == "call" else 1.03)
    fa = f(a)
    b = a
    for _ in range(400):
        b = b * step
        try:
            fb = f(b)
        except InputError:
            break
        if np.sign(fb) != np.sign(fa):
            return float(brentq(f, min(a, b), max(a, b), xtol=1e-14 * fwd, rtol=1e-15))
        a, fa = b, fb
    raise ConvergenceError(f"no strike found for |delta| = {delta}")


def synthetic_quotes(params: NesParams, market: MarketEnv, T: float, kind: str, deltas) -> list[OptionQuote]:
    """Quotes priced exactly by ``params`` at the strikes matching ``deltas``."""
    out = []
    for d in deltas:
        K = strike_for_delta(params, market, T, kind, float(d))
        out.append(OptionQuote(K, T, kind, float(nes_option_price(params, market, K, T, kind))))
    return sorted(out, key=lambda q: q.strike)


# ---------------------------------------------------------------------------
# implied potential
# ---------------------------------------------------------------------------


@dataclass
class PotentialReport:
    y: np.ndarray
    V: np.ndarray
    critical_points: list
    shape: str
    global_min: float
    local_min: float | None
    barrier: float | None
    y0: float
    state: str


def classify_state(pot: PotentialFn, y0: float) -> str:
    """equilibrium: near the global minimum; metastable: inside the shallower well; unstable otherwise."""
    y_glob = pot.global_min
    if pot.is_double_well:
        side_local = np.sign(pot.local_min - pot.barrier)
        if np.sign(y0 - pot.barrier) == side_local:
            return "metastable"
    if abs(y0 - y_glob) <= 2.0 * pot.well_width(y_glob):
        return "equilibrium"
    return "unstable"


def implied_potential_report(result, market, y0: float | None = None, n: int = 401) -> PotentialReport:
    """Implied potential curve, its critical points and the regime of the current return."""
    params = result.params if isinstance(result, CalibrationResult) else result
    if y0 is None:
        y0 = getattr(market, "y0", None)
    if y0 is None:
        raise InputError("implied potential report needs the current log-return y0")
    pot = PotentialFn(params)
    lo, hi = stationary_density(params).mixture.support(5.0)
    lo, hi = min(lo, y0 - 0.1 * (hi - lo)), max(hi, y0 + 0.1 * (hi - lo))
    y = np.linspace(lo, hi, n)
    return PotentialReport(
        y=y, V=pot.value(y), critical_points=list(pot.critical_points), shape=pot.shape(),
        global_min=pot.global_min, local_min=pot.local_min, barrier=pot.barrier,
        y0=float(y0), state=classify_state(pot, float(y0)),
    )
