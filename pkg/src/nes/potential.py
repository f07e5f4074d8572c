"""Ground state, Langevin potential and critical points of the NES model.

The ground-state wave function is a two-component Gaussian mixture

    Psi0(y) = C [(1 - a) phi(y | mu1 T, sigma1^2 T) + a phi(y | mu2 T, sigma2^2 T)],

so its square, the stationary density, is a three-component mixture.  The
potential follows as ``V = -h^2 log Psi0 + V0`` with the gauge ``min V = 0``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .errors import InputError
from .gaussmix import GaussianMixture

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class NesParams:
    """Model parameters: drift locations, component vols, asymmetry, noise vol, horizon."""

    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    a: float
    h: float
    T: float = 1.0

    def __post_init__(self):
        for name in ("mu1", "mu2", "sigma1", "sigma2", "a", "h", "T"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise InputError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        for name in ("sigma1", "sigma2", "h", "T"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0.0 <= self.a <= 1.0:
            raise InputError(f"a must lie in [0, 1], got {self.a!r}")
        if self.mu2 > self.mu1:
            raise InputError("expected mu2 <= mu1")

    @classmethod
    def from_mu(cls, mu: float, sigma1: float, sigma2: float, a: float, h: float, T: float = 1.0) -> "NesParams":
        """Symmetric-drift convention ``mu1 = mu``, ``mu2 = -mu`` used by calibration."""
        return cls(mu, -mu, sigma1, sigma2, a, h, T)

    def replace(self, **changes) -> "NesParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class StationaryDensity:
    """Psi0^2 written as a three-component mixture (means mu_k T, stdevs sigma_k sqrt(T/2))."""

    mixture: GaussianMixture
    omega: np.ndarray
    Omega: float
    C2: float
    mu3: float
    sigma3: float
    mus: np.ndarray  # (mu1, mu2, mu3) per unit horizon
    sigmas: np.ndarray  # (sigma1, sigma2, sigma3); stdevs are sigma_k sqrt(T/2)


def stationary_density(params: NesParams) -> StationaryDensity:
    p = params
    s1, s2, a, T = p.sigma1, p.sigma2, p.a, p.T
    ssum = s1 * s1 + s2 * s2
    cross = 2.0 * a * (1.0 - a) / np.sqrt(0.5 * ssum) * np.exp(-((p.mu1 - p.mu2) ** 2) * T / (2.0 * ssum))
    terms = np.array([(1.0 - a) ** 2 / s1, a * a / s2, cross])
    Omega = float(terms.sum())
    omega = terms / Omega
    omega[2] = 1.0 - omega[0] - omega[1]
    omega = np.clip(omega, 0.0, 1.0)
    mu3 = (p.mu1 * s2 * s2 + p.mu2 * s1 * s1) / ssum
    sigma3 = np.sqrt(2.0 * s1 * s1 * s2 * s2 / ssum)
    mus = np.array([p.mu1, p.mu2, mu3])
    sigmas = np.array([s1, s2, sigma3])
    mix = GaussianMixture(omega, mus * T, sigmas * np.sqrt(0.5 * T))
    return StationaryDensity(
        mix, omega, Omega, 2.0 * np.sqrt(np.pi * T) / Omega, float(mu3), float(sigma3), mus, sigmas
    )


class GroundState:
    """Evaluator for log Psi0 and its first two derivatives."""

    def __init__(self, params: NesParams):
        self.params = p = params
        self.density = stationary_density(params)
        self.log_C = 0.5 * np.log(self.density.C2)
        self._m = np.array([p.mu1 * p.T, p.mu2 * p.T])
        self._v = np.array([p.sigma1 ** 2 * p.T, p.sigma2 ** 2 * p.T])
        with np.errstate(divide="ignore"):
            self._logw = np.log(np.array([1.0 - p.a, p.a]))

    def _component_logs(self, y: np.ndarray) -> np.ndarray:
        d = y[..., None] - self._m
        return self._logw - 0.5 * d * d / self._v - 0.5 * np.log(self._v) - _LOG_SQRT_2PI

    def _dominant(self, y: np.ndarray) -> np.ndarray:
        """Index of the component factored out of the mixture (0 or 1)."""
        p = self.params
        if p.a == 0.0:
            return np.zeros(y.shape, dtype=int)
        if p.a == 1.0:
            return np.ones(y.shape, dtype=int)
        if p.sigma2 > p.sigma1:
            return np.ones(y.shape, dtype=int)
        if p.sigma2 < p.sigma1:
            return np.zeros(y.shape, dtype=int)
        return np.where(y > 0, 0, 1)

    def log_psi(self, y):
        y = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(y)):
            raise ValueError("ground state evaluated at a non-finite point")
        logs = self._component_logs(y)
        dom = self._dominant(y)[..., None]
        lead = np.take_along_axis(logs, dom, axis=-1)[..., 0]
        other = np.take_along_axis(logs, 1 - dom, axis=-1)[..., 0]
        # log(eta) with eta = 1 + other/lead, kept finite when the ratio is huge
        with np.errstate(invalid="ignore"):
            log_eta = np.where(np.isneginf(other), 0.0, np.logaddexp(0.0, other - lead))
        out = self.log_C + lead + log_eta
        return float(out) if out.ndim == 0 else out

    def psi(self, y):
        return np.exp(self.log_psi(y))

    def _resp(self, y: np.ndarray):
        logs = self._component_logs(y)
        top = np.max(logs, axis=-1, keepdims=True)
        e = np.exp(logs - top)
        r = e / e.sum(axis=-1, keepdims=True)
        s = -(y[..., None] - self._m) / self._v
        return r, s

    def dlog_psi(self, y):
        y = np.asarray(y, dtype=float)
        r, s = self._resp(y)
        out = np.sum(r * s, axis=-1)
        return float(out) if out.ndim == 0 else out

    def d2log_psi(self, y):
        y = np.asarray(y, dtype=float)
        r, s = self._resp(y)
        out = -np.sum(r / self._v, axis=-1) + r[..., 0] * r[..., 1] * (s[..., 0] - s[..., 1]) ** 2
        return float(out) if out.ndim == 0 else out


def ground_state(params: NesParams) -> tuple[GroundState, StationaryDensity]:
    gs = GroundState(params)
    return gs, gs.density


class CriticalPoint(NamedTuple):
    location: float
    kind: str  # "min" or "max"


class PotentialFn:
    """Langevin potential V(y) = -h^2 log Psi0(y) + V0 with min V = 0."""

    def __init__(self, params: NesParams, scan_points: int = 2001):
        self.params = params
        self.ground = GroundState(params)
        self.scan_points = scan_points
        self.critical_points = tuple(_scan_critical_points(self.ground, scan_points))
        h2 = params.h ** 2
        self.V0 = h2 * max(self.ground.log_psi(c.location) for c in self.critical_points)

    # -- evaluation --------------------------------------------------------

    def value(self, y):
        return -self.params.h ** 2 * self.ground.log_psi(y) + self.V0

    def dV(self, y):
        return -self.params.h ** 2 * self.ground.dlog_psi(y)

    def d2V(self, y):
        return -self.params.h ** 2 * self.ground.d2log_psi(y)

    def derivs(self, y):
        return self.dV(y), self.d2V(y)

    def superpotential(self, y):
        return self.dV(y) / np.sqrt(2.0)

    # -- structure ---------------------------------------------------------

    @property
    def minima(self) -> list[float]:
        return [c.location for c in self.critical_points if c.kind == "min"]

    @property
    def is_double_well(self) -> bool:
        return len(self.critical_points) == 3

    @property
    def global_min(self) -> float:
        return min(self.minima, key=lambda y: self.value(y))

    @property
    def local_min(self) -> float | None:
        """The metastable minimum of a double well (None for a single well)."""
        if not self.is_double_well:
            return None
        return max(self.minima, key=lambda y: self.value(y))

    @property
    def barrier(self) -> float | None:
        if not self.is_double_well:
            return None
        return self.critical_points[1].location

    @property
    def barrier_height(self) -> float | None:
        """V(y_m) - V(y*) measured from the metastable minimum."""
        if not self.is_double_well:
            return None
        return float(self.value(self.barrier) - self.value(self.local_min))

    def shape(self) -> str:
        return "double_well" if self.is_double_well else "single_well"

    def global_min_side(self, tol: float = 1e-9) -> str | None:
        """Which minimum of a double well is global: ``"left"``, ``"right"`` or ``"symmetric"``."""
        if not self.is_double_well:
            return None
        left, _, right = (c.location for c in self.critical_points)
        gap = float(self.value(left) - self.value(right))
        if abs(gap) <= tol * self.params.h ** 2:
            return "symmetric"
        return "left" if gap < 0 else "right"

    def well_width(self, y_min: float) -> float:
        """Standard deviation of Psi0^2 in the quadratic approximation around ``y_min``."""
        return float(self.params.h / np.sqrt(2.0 * self.d2V(y_min)))


def _scan_grid(gs: GroundState, n: int) -> np.ndarray:
    p = gs.params
    sq = np.sqrt(p.T)
    lo = p.mu2 * p.T - 10.0 * p.sigma2 * sq
    hi = p.mu1 * p.T + 10.0 * p.sigma1 * sq
    pieces = [np.linspace(lo, hi, n)]
    # extra resolution around each component so narrow features are not stepped over
    for m, s in ((p.mu1 * p.T, p.sigma1 * sq), (p.mu2 * p.T, p.sigma2 * sq)):
        local = m + s * np.linspace(-10.0, 10.0, n)
        pieces.append(local[(local >= lo) & (local <= hi)])
    return np.unique(np.concatenate(pieces))


def _scan_critical_points(gs: GroundState, n: int) -> list[CriticalPoint]:
    grid = _scan_grid(gs, n)
    f = np.sign(gs.dlog_psi(grid))  # signs, so tiny values cannot underflow a product
    roots = []
    for i in np.flatnonzero(f == 0.0):
        roots.append(float(grid[i]))
    sign_change = np.flatnonzero(f[:-1] * f[1:] < 0)
    for i in sign_change:
        roots.append(brentq(gs.dlog_psi, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15, maxiter=500))
    roots = sorted(set(roots))
    if len(roots) not in (1, 3):
        raise ArithmeticError(
            f"found {len(roots)} critical points of V on a {len(grid)}-point scan; expected 1 or 3"
        )
    out = []
    for y in roots:
        curv = -gs.d2log_psi(y)  # sign of V''
        out.append(CriticalPoint(float(y), "min" if curv > 0 else "max"))
    kinds = [c.kind for c in out]
    if kinds not in (["min"], ["min", "max", "min"]):
        raise ArithmeticError(f"unexpected critical-point pattern {kinds}")
    return out


def find_critical_points(p: PotentialFn) -> tuple[CriticalPoint, ...]:
    return p.critical_points


def potential_value(p: PotentialFn, y):
    return p.value(y)


def potential_derivs(p: PotentialFn, y):
    return p.derivs(y)
