"""SUSY partner ground state, first-order log perturbation theory and the first excited state.

The partner Hamiltonian H+ = A A+ has no normalizable zero mode, but the
piecewise function

    Psi+(y) = int_y^inf Psi0^2 / (2 I+ Psi0(y))    (y > 0)
    Psi+(y) = int_-inf^y Psi0^2 / (2 I- Psi0(y))   (y < 0)

is the exact zero mode of H+ with a delta-function well at the origin
removed.  Treating that delta term as a perturbation gives the lowest
non-zero eigenvalue E1- of the Fokker-Planck Hamiltonian and, through
the SUSY intertwining, the first excited state Psi1-.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicHermiteSpline
from scipy.special import logsumexp

from .passage import log_tail_mass
from .potential import GroundState, NesParams, PotentialFn
from .special import erfcx  # noqa: F401  (re-exported)

__all__ = [
    "erfcx",
    "PartnerGroundState",
    "partner_ground_state",
    "LptFirstOrder",
    "lpt_first_order",
    "FirstExcitedState",
    "first_excited_state",
    "TwoTermDensity",
    "transition_density_two_term",
    "lpt_step",
]

_GL8 = leggauss(8)
_GL16 = leggauss(16)


def _gl_nodes(a, b, rule):
    """Map a Gauss-Legendre rule onto [a, b] (broadcast over arrays of intervals)."""
    x, w = rule
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _log_quad(logf, a, b, rule=_GL16):
    """log int_a^b exp(logf) for arrays of intervals with b >= a."""
    pts, wts = _gl_nodes(a, b, rule)
    with np.errstate(divide="ignore"):
        return logsumexp(logf(pts) + np.log(wts), axis=-1)


# ---------------------------------------------------------------------------
# partner ground state
# ---------------------------------------------------------------------------


class PartnerGroundState:
    """Unperturbed ground state Psi+ of the partner Hamiltonian."""

    def __init__(self, params: NesParams):
        self.params = params
        self.ground = GroundState(params)
        mix = self.ground.density.mixture
        self.I_plus = float(mix.sf(0.0))
        self.I_minus = float(mix.cdf(0.0))
        self.log_psi0_at_0 = float(self.ground.log_psi(0.0))
        h4 = params.h ** 4
        psi0_sq = np.exp(2.0 * self.log_psi0_at_0)
        # strength of the delta well: fixed by the jump of Psi+' at the origin
        self.alpha = h4 * psi0_sq / (2.0 * self.I_plus * self.I_minus)
        self.alpha_printed = 4.0 * self.alpha

    def log_psi(self, y):
        """log Psi+ built from the erfcx-stable log normal cdf."""
        y = np.asarray(y, dtype=float)
        upper = y >= 0
        log_mass = np.where(
            upper,
            log_tail_mass(self.ground, y, upper=True) - np.log(2.0 * self.I_plus),
            log_tail_mass(self.ground, y, upper=False) - np.log(2.0 * self.I_minus),
        )
        out = log_mass - self.ground.log_psi(y)
        return float(out) if np.ndim(out) == 0 else out

    def psi(self, y):
        return np.exp(self.log_psi(y))

    def log_psi_sq(self, y):
        return 2.0 * self.log_psi(y)

    def _hazard(self, y):
        """Psi0^2 / (tail mass) on the side of y that Psi+ integrates."""
        y = np.asarray(y, dtype=float)
        upper = y >= 0
        lm = np.where(upper, log_tail_mass(self.ground, y, True), log_tail_mass(self.ground, y, False))
        return np.exp(2.0 * self.ground.log_psi(y) - lm), upper

    def dlog_psi(self, y):
        u, upper = self._hazard(y)
        lp = self.ground.dlog_psi(y)
        out = np.where(upper, -u - lp, u - lp)
        return float(out) if np.ndim(out) == 0 else out

    def d2log_psi(self, y):
        u, upper = self._hazard(y)
        lp, lpp = self.ground.dlog_psi(y), self.ground.d2log_psi(y)
        out = np.where(upper, -u * (2.0 * lp + u) - lpp, u * (2.0 * lp - u) - lpp)
        return float(out) if np.ndim(out) == 0 else out

    def derivative_jump(self) -> float:
        """Psi+'(0+) - Psi+'(0-)."""
        return -np.exp(self.log_psi0_at_0) / (2.0 * self.I_plus * self.I_minus)


def partner_ground_state(params: NesParams) -> PartnerGroundState:
    return PartnerGroundState(params)


# ---------------------------------------------------------------------------
# first-order LPT
# ---------------------------------------------------------------------------


def _lpt_grid(pg: PartnerGroundState, n_side: int, n_std: float):
    lo, hi = pg.ground.density.mixture.support(n_std)
    span = hi - lo
    lo = min(lo, -0.05 * span)
    hi = max(hi, 0.05 * span)
    left = np.linspace(lo, 0.0, n_side + 1)
    right = np.linspace(0.0, hi, n_side + 1)
    return np.concatenate([left, right[1:]]), n_side


@dataclass
class LptFirstOrder:
    """First-order LPT for the delta perturbation of the partner Hamiltonian.

    ``G1`` is defined up to an additive constant; it is anchored to zero at
    the left edge of the integration grid (its limit at -inf diverges
    logarithmically).
    """

    pg: PartnerGroundState
    E1_bar: float
    E1: float
    C1: float
    nodes: np.ndarray
    log_L: np.ndarray  # log int_lo^x Psi+^2 at nodes
    log_F: np.ndarray  # log int_x^hi Psi+^2 at nodes
    G1_nodes: np.ndarray
    g1_nodes: np.ndarray
    n_side: int
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        k = self.n_side
        # g1 jumps at the origin: one Hermite spline per side
        self._left = CubicHermiteSpline(self.nodes[: k + 1], self.G1_nodes[: k + 1], self._g1_left_nodes)
        self._right = CubicHermiteSpline(self.nodes[k:], self.G1_nodes[k:], self._g1_right_nodes)

    @property
    def h2(self) -> float:
        return self.pg.params.h ** 2

    @property
    def k1(self) -> float:
        return 2.0 * self.E1_bar / self.h2

    @property
    def rate(self) -> float:
        """Escape intensity E1- / h^2."""
        return self.E1 / self.h2

    # -- g1 ----------------------------------------------------------------

    def _locate(self, x):
        return np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, len(self.nodes) - 2)

    def _log_L(self, x):
        i = self._locate(x)
        part = _log_quad(self.pg.log_psi_sq, self.nodes[i], x)
        return np.logaddexp(self.log_L[i], part)

    def _log_F(self, x):
        i = self._locate(x) + 1
        part = _log_quad(self.pg.log_psi_sq, x, self.nodes[i])
        return np.logaddexp(self.log_F[i], part)

    def g1(self, x, side: str | None = None):
        """G1'(x); at x = 0 the right-hand limit unless ``side='left'``."""
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.empty_like(flat)
        left = flat < 0 if side != "left" else flat <= 0
        lps = self.pg.log_psi_sq(flat)
        if np.any(left):
            out[left] = self.k1 * np.exp(self._log_L(flat[left]) - lps[left])
        if np.any(~left):
            out[~left] = -self.k1 * np.exp(self._log_F(flat[~left]) - lps[~left])
        out = out.reshape(x.shape)
        return float(out) if x.ndim == 0 else out

    # -- G1 ----------------------------------------------------------------

    def G1(self, x):
        """Spline evaluation on the cached grid."""
        x = np.asarray(x, dtype=float)
        out = np.where(x < 0, self._left(np.minimum(x, 0.0)), self._right(np.maximum(x, 0.0)))
        return float(out) if out.ndim == 0 else out

    def G1_exact(self, x):
        """Direct quadrature from the nearest cached node (no interpolation)."""
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        i = self._locate(flat)
        a = self.nodes[i]
        pts, wts = _gl_nodes(a, flat, _GL16)
        vals = np.where(flat[..., None] <= 0, self.g1(pts, side="left"), self.g1(pts))
        out = (self.G1_nodes[i] + np.sum(vals * wts, axis=-1)).reshape(x.shape)
        return float(out) if x.ndim == 0 else out

    def G0(self, x):
        """Unperturbed log-WF -h^2 log(Psi+ / C1)."""
        return -self.h2 * (self.pg.log_psi(x) - np.log(self.C1))

    def second_derivative_jump_numeric(self, eps: float = 1e-4) -> float:
        """G1''(0+) - G1''(0-) from one-sided second differences of G1."""
        e = eps
        gp = self.G1_exact(np.array([0.0, e, 2 * e, 3 * e]))
        gm = self.G1_exact(np.array([0.0, -e, -2 * e, -3 * e]))
        # second-order accurate one-sided second differences
        d2p = (2 * gp[0] - 5 * gp[1] + 4 * gp[2] - gp[3]) / e ** 2
        d2m = (2 * gm[0] - 5 * gm[1] + 4 * gm[2] - gm[3]) / e ** 2
        return float(d2p - d2m)

    def second_derivative_jump_analytic(self) -> float:
        """Jump of G1'' implied by differentiating the two branches of g1."""
        pg = self.pg
        rho_p = float(pg.dlog_psi(0.0))
        rho_m = self._rho_minus()
        lps0 = float(pg.log_psi_sq(0.0))
        F0 = np.exp(self.log_F[self.n_side] - lps0)
        L0 = np.exp(self.log_L[self.n_side] - lps0)
        return float(2.0 * self.k1 * (rho_p * F0 + rho_m * L0))

    def _rho_minus(self) -> float:
        pg = self.pg
        lp = float(pg.ground.dlog_psi(0.0))
        u = np.exp(2.0 * pg.log_psi0_at_0) / pg.I_minus
        return u - lp

    def perturbation_ratio(self, x):
        """alpha |G1| / |G0|; first order is trustworthy where this is < 1."""
        return self.pg.alpha * np.abs(self.G1(x)) / np.abs(self.G0(x))

    @property
    def _g1_left_nodes(self):
        k = self.n_side
        out = self.g1_nodes[: k + 1].copy()
        out[-1] = self._g1_zero_left
        return out

    @property
    def _g1_right_nodes(self):
        return self.g1_nodes[self.n_side:]

    # -- higher order --------------------------------------------------------

    def second_order_energy(self) -> float:
        """E2 (in units of alpha^2) from the generic recursion step."""
        x = self.nodes
        gx = np.where(x < 0, self.g1(x, side="left"), self.g1(x))
        lps = self.pg.log_psi_sq(x)
        E2, _ = lpt_step(x, lps - lps.max(), [gx], self.h2)
        return E2

    def gaussian_E1_bar(self, potential: PotentialFn | None = None) -> float | None:
        """High-barrier Gaussian approximation of E1_bar (double wells only)."""
        pot = potential if potential is not None else PotentialFn(self.pg.params)
        if not pot.is_double_well:
            return None
        h2 = self.h2
        y_min, y_m = pot.global_min, pot.barrier
        # int exp(-2V/h^2) around the minimum and int exp(2V/h^2) around the maximum
        lo = 0.5 * np.log(np.pi * h2 / pot.d2V(y_min)) - 2.0 * pot.value(y_min) / h2
        hi = 0.5 * np.log(np.pi * h2 / abs(pot.d2V(y_m))) + 2.0 * pot.value(y_m) / h2
        return float(np.exp(self.pg.log_psi_sq(0.0) - lo - hi))


def lpt_first_order(pg: PartnerGroundState, n_side: int = 2000, n_std: float = 14.0) -> LptFirstOrder:
    """Energy shift and log-WF correction to first order in the delta coupling."""
    nodes, k = _lpt_grid(pg, n_side, n_std)
    a, b = nodes[:-1], nodes[1:]
    panel = _log_quad(pg.log_psi_sq, a, b)

    log_L = np.concatenate([[-np.inf], np.logaddexp.accumulate(panel)])
    log_F = np.concatenate([np.logaddexp.accumulate(panel[::-1])[::-1], [-np.inf]])
    log_J = float(log_L[-1])
    lps0 = float(pg.log_psi_sq(0.0))
    E1_bar = float(np.exp(lps0 - log_J))
    h2 = pg.params.h ** 2
    k1 = 2.0 * E1_bar / h2

    lps_nodes = pg.log_psi_sq(nodes)
    with np.errstate(divide="ignore"):
        g_left = k1 * np.exp(log_L - lps_nodes)
        g_right = -k1 * np.exp(log_F - lps_nodes)
    g1_nodes = np.where(nodes < 0, g_left, g_right)

    lpt = LptFirstOrder.__new__(LptFirstOrder)
    lpt.pg, lpt.E1_bar, lpt.E1, lpt.C1 = pg, E1_bar, pg.alpha * E1_bar, 1.0
    lpt.nodes, lpt.log_L, lpt.log_F, lpt.n_side = nodes, log_L, log_F, k
    lpt.g1_nodes, lpt.warnings = g1_nodes, []
    lpt._g1_zero_left = float(g_left[k])

    # integrate g1 panel by panel, left side using the left branch
    pts, wts = _gl_nodes(a, b, _GL8)
    left_panel = (b <= 0)[:, None]
    gv = np.where(left_panel, lpt.g1(pts, side="left"), lpt.g1(pts))
    G1_nodes = np.concatenate([[0.0], np.cumsum(np.sum(gv * wts, axis=-1))])
    lpt.G1_nodes = G1_nodes
    LptFirstOrder.__post_init__(lpt)

    # normalization of the corrected ground state C1 Psi+ exp(-alpha G1 / h^2)
    alpha = pg.alpha
    pts, wts = _gl_nodes(a, b, _GL8)
    logf = pg.log_psi_sq(pts) - 2.0 * alpha * lpt.G1(pts) / h2
    log_norm = logsumexp(logf + np.log(wts))
    lpt.C1 = float(np.exp(-0.5 * log_norm))

    if not (G1_nodes[k] > 0 and np.argmax(G1_nodes) == k):
        lpt.warnings.append("G1 does not peak at the origin")
    ratio_grid = nodes[np.abs(nodes) > 2.0 * pg.ground.density.mixture.stdevs.max()]
    if ratio_grid.size and np.any(lpt.perturbation_ratio(ratio_grid) >= 1.0):
        lpt.warnings.append("first-order correction exceeds the unperturbed log-WF away from the origin")
    for msg in lpt.warnings:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return lpt


def lpt_step(x: np.ndarray, log_psi0_sq: np.ndarray, g_lower: list, hbar: float):
    """One generic LPT order k >= 2 on a grid.

    ``g_lower`` holds g_1 .. g_{k-1} sampled on ``x``; ``log_psi0_sq`` is the
    (unnormalized) log of the unperturbed ground-state density.  Returns
    (E_k, g_k) from the Riccati hierarchy

        2 g0 gk - hbar gk' = -sum_{j=1}^{k-1} g_j g_{k-j} - 2 E_k.
    """
    from scipy.integrate import cumulative_trapezoid, trapezoid

    k = len(g_lower) + 1
    if k < 2:
        raise ValueError("lpt_step needs at least g_1")
    veff = sum(g_lower[j - 1] * g_lower[k - j - 1] for j in range(1, k))
    w = np.exp(log_psi0_sq - np.max(log_psi0_sq))
    Ek = -0.5 * trapezoid(veff * w, x) / trapezoid(w, x)
    f = (veff + 2.0 * Ek) * w
    left = cumulative_trapezoid(f, x, initial=0.0)
    right = -(left[-1] - left)  # -int_x^inf f, better conditioned past the peak
    peak = int(np.argmax(w))
    acc = np.where(np.arange(len(x)) <= peak, left, right)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        gk = np.where(w > 0, acc / (hbar * w), 0.0)
    return float(Ek), gk


# ---------------------------------------------------------------------------
# first excited state and the two-term transition density
# ---------------------------------------------------------------------------


class FirstExcitedState:
    """Psi1- = (E0+)^(-1/2) A+ Psi0+, renormalized numerically."""

    def __init__(self, pg: PartnerGroundState, lpt: LptFirstOrder):
        self.pg, self.lpt = pg, lpt
        h2 = pg.params.h ** 2
        self._scale = (lpt.E1 ** -0.5) * lpt.C1 * h2 / (2.0 * np.sqrt(2.0))
        a, b = lpt.nodes[:-1], lpt.nodes[1:]
        pts, wts = _gl_nodes(a, b, _GL8)
        vals = self._raw(pts)
        self.raw_norm = float(np.sum(vals ** 2 * wts))
        self.norm = 1.0 / np.sqrt(self.raw_norm)
        self.overlap = float(np.sum(vals * self.norm * pg.ground.psi(pts) * wts))

    def _raw(self, y):
        pg, lpt = self.pg, self.lpt
        h2 = pg.params.h ** 2
        y = np.asarray(y, dtype=float)
        damp = np.exp(-pg.alpha * lpt.G1(y) / h2)
        psi0 = pg.ground.psi(y)
        psip = pg.psi(y)
        g = np.where(y < 0, lpt.g1(y, side="left"), lpt.g1(y))
        lead = np.where(y >= 0, psi0 / pg.I_plus, -psi0 / pg.I_minus)
        return self._scale * damp * (lead + 2.0 * pg.alpha / h2 * g * psip)

    def __call__(self, y):
        out = self.norm * self._raw(y)
        return float(out) if np.ndim(out) == 0 else out

    def A_applied(self, y, step: float = 1e-5):
        """(h^2/sqrt 2) d/dy Psi1- + W Psi1-, by central differences."""
        h2 = self.pg.params.h ** 2
        y = np.asarray(y, dtype=float)
        d = (self(y + step) - self(y - step)) / (2.0 * step)
        W = -(h2 / np.sqrt(2.0)) * self.pg.ground.dlog_psi(y)
        return h2 / np.sqrt(2.0) * d + W * self(y)

    def corrected_partner(self, y):
        """Psi0+ = C1 Psi+ exp(-alpha G1 / h^2)."""
        h2 = self.pg.params.h ** 2
        return self.lpt.C1 * self.pg.psi(y) * np.exp(-self.pg.alpha * self.lpt.G1(y) / h2)


def first_excited_state(pg: PartnerGroundState, lpt: LptFirstOrder) -> FirstExcitedState:
    return FirstExcitedState(pg, lpt)


class TwoTermDensity:
    """p(y, t | y0) = Psi0^2 + (Psi1(y0)/Psi0(y0)) exp(-t E1/h^2) Psi0 Psi1."""

    def __init__(self, params: NesParams, y0: float, t: float, excited: FirstExcitedState | None = None):
        if t < 0:
            raise ValueError("t must be non-negative")
        if excited is None:
            pg = partner_ground_state(params)
            excited = first_excited_state(pg, lpt_first_order(pg))
        self.params, self.y0, self.t, self.excited = params, float(y0), float(t), excited
        gs = excited.pg.ground
        h2 = params.h ** 2
        self.amplitude = float(excited(self.y0) / gs.psi(self.y0) * np.exp(-t * excited.lpt.E1 / h2))

    def pdf(self, y):
        gs = self.excited.pg.ground
        psi0 = gs.psi(y)
        return psi0 * psi0 + self.amplitude * psi0 * self.excited(y)

    def integral(self) -> float:
        lpt = self.excited.lpt
        pts, wts = _gl_nodes(lpt.nodes[:-1], lpt.nodes[1:], _GL8)
        return float(np.sum(self.pdf(pts) * wts))

    def negative_region(self, n: int = 4001) -> bool:
        lo, hi = self.excited.lpt.nodes[[0, -1]]
        return bool(np.any(self.pdf(np.linspace(lo, hi, n)) < 0))


def transition_density_two_term(params: NesParams, y0: float, t: float, excited: FirstExcitedState | None = None):
    dens = TwoTermDensity(params, y0, t, excited)
    if dens.negative_region():
        warnings.warn("two-term density turns negative: first-order term dominates", RuntimeWarning, stacklevel=2)
    return dens
