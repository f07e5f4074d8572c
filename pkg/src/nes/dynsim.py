"""Euler-Maruyama simulation of the NES Langevin equation and the cubic instanton.

Paths are simulated in fixed-size chunks; chunk ``i`` draws from the
``i``-th child of ``SeedSequence(seed)``, so results do not depend on how
chunks are scheduled.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import expit

from .errors import ConvergenceError, InputError
from .passage import escape_rate
from .potential import NesParams

__all__ = [
    "SimConfig",
    "SimResult",
    "drift_function",
    "simulate_paths",
    "FirstPassageResult",
    "empirical_first_passage",
    "CubicPotential",
    "instanton_closed_form",
    "instanton_ode",
]

CHUNK = 8192


@dataclass(frozen=True)
class SimConfig:
    dt: float
    n_paths: int
    horizon: float
    seed: int = 0
    y0: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise InputError("dt must be positive")
        if not self.horizon >= self.dt:
            raise InputError("horizon must be at least one step")
        if int(self.n_paths) < 1:
            raise InputError("n_paths must be at least 1")
        object.__setattr__(self, "n_paths", int(self.n_paths))

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass
class SimResult:
    terminal: np.ndarray
    times: np.ndarray | None = None
    paths: np.ndarray | None = None  # (len(times), n_paths) when recorded


def drift_function(params: NesParams):
    """-V'(y) = h^2 d log Psi0 / dy, written for speed on large arrays."""
    p = params
    h2 = p.h ** 2
    m1, m2 = p.mu1 * p.T, p.mu2 * p.T
    v1, v2 = p.sigma1 ** 2 * p.T, p.sigma2 ** 2 * p.T
    if p.a == 0.0:
        return lambda y: -h2 * (y - m1) / v1
    if p.a == 1.0:
        return lambda y: -h2 * (y - m2) / v2
    c = np.log(p.a / (1.0 - p.a)) - 0.5 * np.log(v2 / v1)

    def drift(y):
        d1 = y - m1
        d2 = y - m2
        r2 = expit(c - 0.5 * (d2 * d2 / v2 - d1 * d1 / v1))
        s1 = d1 / v1
        return -h2 * (s1 + r2 * (d2 / v2 - s1))

    return drift


def _chunks(n: int) -> list[int]:
    sizes = [CHUNK] * (n // CHUNK)
    if n % CHUNK:
        sizes.append(n % CHUNK)
    return sizes


def _rngs(seed: int, n: int):
    children = np.random.SeedSequence(seed).spawn(len(_chunks(n)))
    return [np.random.default_rng(c) for c in children]


def simulate_paths(
    params: NesParams, cfg: SimConfig, record_every: int | None = None, threads: int = 1
) -> SimResult:
    """y_{t+dt} = y_t - V'(y_t) dt + h sqrt(dt) xi; terminal sample, optionally sub-sampled paths."""
    drift = drift_function(params)
    sd = params.h * np.sqrt(cfg.dt)
    dt, n_steps = cfg.dt, cfg.n_steps
    sizes = _chunks(cfg.n_paths)
    rngs = _rngs(cfg.seed, cfg.n_paths)
    rec_idx = None if record_every is None else np.arange(0, n_steps + 1, record_every)

    def run(i):
        rng, m = rngs[i], sizes[i]
        y = np.full(m, float(cfg.y0))
        rec = [] if rec_idx is not None else None
        if rec is not None:
            rec.append(y.copy())
        for k in range(1, n_steps + 1):
            y += drift(y) * dt + sd * rng.standard_normal(m)
            if rec is not None and k % record_every == 0:
                rec.append(y.copy())
        return y, (np.array(rec) if rec is not None else None)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            out = list(pool.map(run, range(len(sizes))))
    else:
        out = [run(i) for i in range(len(sizes))]
    terminal = np.concatenate([o[0] for o in out])
    if rec_idx is None:
        return SimResult(terminal)
    return SimResult(terminal, rec_idx * dt, np.concatenate([o[1] for o in out], axis=1))


@dataclass
class FirstPassageResult:
    mean_passage_time: float
    stderr: float
    cap_fraction: float
    biased_low: bool
    n_paths: int
    times: np.ndarray


def empirical_first_passage(
    params: NesParams,
    cfg: SimConfig,
    absorbing_y: float,
    *,
    rate: float | None = None,
    cap_multiple: float = 20.0,
) -> FirstPassageResult:
    """Mean first hitting time of ``absorbing_y`` from ``cfg.y0``.

    Paths run in blocks of ``cfg.horizon`` until absorbed or until the cap
    ``cap_multiple / lambda`` (lambda from the passage-time quadrature unless
    ``rate`` is given).  Capped paths count at the cap, so a cap fraction
    above 5% flags the estimate as biased low.
    """
    y0, target = float(cfg.y0), float(absorbing_y)
    if y0 == target:
        return FirstPassageResult(0.0, 0.0, 0.0, False, cfg.n_paths, np.zeros(cfg.n_paths))
    lam = escape_rate(params, y0, target) if rate is None else float(rate)
    cap = cap_multiple / lam
    down = target < y0
    drift = drift_function(params)
    dt = cfg.dt
    sd = params.h * np.sqrt(dt)
    block = max(cfg.n_steps, 1)
    max_steps = int(np.ceil(cap / dt))
    sizes = _chunks(cfg.n_paths)
    rngs = _rngs(cfg.seed, cfg.n_paths)
    all_times, capped = [], 0
    for rng, m in zip(rngs, sizes):
        y = np.full(m, y0)
        idx = np.arange(m)
        hit = np.full(m, np.nan)
        step = 0
        while idx.size and step < max_steps:
            for _ in range(min(block, max_steps - step)):
                step += 1
                y += drift(y) * dt + sd * rng.standard_normal(y.size)
                done = y <= target if down else y >= target
                if done.any():
                    hit[idx[done]] = step * dt
                    keep = ~done
                    y, idx = y[keep], idx[keep]
                    if not idx.size:
                        break
        capped += idx.size
        hit[idx] = max_steps * dt
        all_times.append(hit)
    times = np.concatenate(all_times)
    frac = capped / cfg.n_paths
    biased = frac > 0.05
    if biased:
        warnings.warn(f"{frac:.1%} of paths reached the time cap; the mean passage time is biased low",
                      RuntimeWarning, stacklevel=2)
    return FirstPassageResult(
        float(times.mean()), float(times.std(ddof=1) / np.sqrt(times.size)) if times.size > 1 else 0.0,
        float(frac), bool(biased), cfg.n_paths, times,
    )


# ---------------------------------------------------------------------------
# cubic instanton
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CubicPotential:
    """V(y) = -theta y + kappa y^2 / 2 + g y^3 / 3 with g > 0."""

    theta: float
    kappa: float
    g: float

    def __post_init__(self):
        if not self.g > 0:
            raise InputError("the cubic coefficient g must be positive")
        if not self.discriminant > 0:
            raise InputError("V' needs two distinct real roots (kappa^2 + 4 g theta > 0)")

    @property
    def discriminant(self) -> float:
        return self.kappa ** 2 + 4.0 * self.g * self.theta

    def value(self, y):
        y = np.asarray(y, dtype=float)
        return -self.theta * y + 0.5 * self.kappa * y * y + self.g * y ** 3 / 3.0

    def dV(self, y):
        y = np.asarray(y, dtype=float)
        return -self.theta + self.kappa * y + self.g * y * y

    @property
    def y_min(self) -> float:
        """Metastable minimum y_star (larger root of V')."""
        return (-self.kappa + np.sqrt(self.discriminant)) / (2.0 * self.g)

    @property
    def y_max(self) -> float:
        """Barrier top (smaller root of V')."""
        return (-self.kappa - np.sqrt(self.discriminant)) / (2.0 * self.g)

    @property
    def reflection_point(self) -> float:
        """Point beyond the barrier with V equal to V(y_min).

        V - V(y_min) = (g/3)(y - y_min)^2 (y - y_hat) gives the closed form;
        it is refined by bracketed root finding on the equipotential condition.
        """
        y_hat = -1.5 * self.kappa / self.g - 2.0 * self.y_min
        f = lambda y: float(self.value(y) - self.value(self.y_min))  # noqa: E731
        width = self.y_min - self.y_max
        lo, hi = y_hat - 0.5 * width, min(y_hat + 0.5 * width, self.y_max)
        if f(lo) * f(hi) < 0:
            y_hat = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)
        return float(y_hat)

    @property
    def rate_constant(self) -> float:
        return self.g * (self.y_min - self.y_max)


def instanton_closed_form(cp: CubicPotential, t, t_c: float = 0.0, endpoint: str = "barrier"):
    """Logistic trajectory leaving the metastable minimum at t -> -inf.

    With ``endpoint="barrier"`` the curve ends at the barrier top, where the
    logistic law solves dy/dt = V'(y) exactly.  ``endpoint="reflection"``
    substitutes the equipotential point y_hat in the same formula; that curve
    has the right end points but does not satisfy the instanton equation.
    """
    if endpoint == "barrier":
        b = cp.y_max
    elif endpoint == "reflection":
        b = cp.reflection_point
    else:
        raise InputError(f"unknown endpoint {endpoint!r}")
    a = cp.y_min
    x = cp.g * (a - b) * (np.asarray(t, dtype=float) - t_c)
    out = a * expit(-x) + b * expit(x)
    return float(out) if np.ndim(out) == 0 else out


def instanton_ode(dV, y_init: float, t_span, t_eval=None, rtol: float = 1e-13, atol: float = 1e-15):
    """Integrate dy/dt = +V'(y) (the zero-noise flow in the inverted potential).

    ``dV`` is a ``CubicPotential``, any object with a ``dV`` method, or a
    callable.  ``t_span`` may run backwards in time.
    """
    f = dV.dV if hasattr(dV, "dV") else dV
    sol = solve_ivp(lambda t, y: np.atleast_1d(f(y[0])), t_span, [float(y_init)], method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol, dense_output=t_eval is None)
    if not sol.success:
        raise ConvergenceError(f"instanton integration failed: {sol.message}")
    return sol
