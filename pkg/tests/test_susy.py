import copy
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import HIGH_BARRIER
from nes.potential import NesParams, PotentialFn
from nes.susy import (
    first_excited_state,
    lpt_first_order,
    lpt_step,
    partner_ground_state,
    transition_density_two_term,
)

# mpmath (20+ digits) quadratures of the raw mixture for the asymmetric excited-state example
I_PLUS_ASYM = 0.888675082794764713996548920354
E1_BAR_ASYM = 2.5430128708695410677
RATE_ASYM = 0.0049096154569800617904  # alpha * E1_bar / h^2 with the corrected alpha


def test_half_masses(asym_well):
    pg, _, _ = asym_well
    assert pg.I_plus + pg.I_minus == pytest.approx(1.0, abs=1e-12)
    assert pg.I_plus == pytest.approx(I_PLUS_ASYM, rel=1e-12)


def test_junction_value(asym_well):
    pg, _, _ = asym_well
    assert pg.psi(0.0) * 2 * pg.ground.psi(0.0) == pytest.approx(1.0, abs=1e-10)


def test_partner_vs_direct_quadrature(asym_well):
    pg, _, _ = asym_well
    gs = pg.ground
    for y in np.linspace(-1.2, 1.2, 50):
        if y >= 0:
            mass, _ = quad(lambda z: gs.psi(z) ** 2, y, np.inf, epsabs=0, epsrel=1e-13, limit=200)
            ref = mass / (2 * pg.I_plus * gs.psi(y))
        else:
            mass, _ = quad(lambda z: gs.psi(z) ** 2, -np.inf, y, epsabs=0, epsrel=1e-13, limit=200)
            ref = mass / (2 * pg.I_minus * gs.psi(y))
        assert pg.psi(y) == pytest.approx(ref, rel=1e-8)


def test_partner_positive_and_decaying(asym_well):
    pg, _, _ = asym_well
    y = np.linspace(-6, 6, 241)
    lp = pg.log_psi(y)
    assert np.all(np.isfinite(lp))
    # Gaussian times 1/y tail: log Psi+ falls off quadratically
    assert lp[-1] < lp[-40] - 10 and lp[0] < lp[40] - 10


def test_partner_zero_mode_residual(asym_well):
    # H+ Psi+ = 0 away from the origin: Psi+''/Psi+ = (V'^2 + h^2 V'') / h^4
    pg, _, _ = asym_well
    pot = PotentialFn(pg.params)
    h4 = pg.params.h ** 4
    y = np.concatenate([np.linspace(-1.0, -0.01, 40), np.linspace(0.01, 1.0, 40)])
    lhs = pg.d2log_psi(y) + pg.dlog_psi(y) ** 2
    rhs = (pot.dV(y) ** 2 + pg.params.h ** 2 * pot.d2V(y)) / h4
    np.testing.assert_allclose(lhs, rhs, rtol=1e-6, atol=1e-6 * np.max(np.abs(rhs)))


def test_derivative_jump(asym_well):
    pg, _, _ = asym_well
    e = 1e-7
    fd = (pg.psi(e) - pg.psi(0.0)) / e - (pg.psi(-1e-300) - pg.psi(-e)) / e
    assert pg.derivative_jump() == pytest.approx(fd, rel=1e-5)
    assert pg.alpha == pytest.approx(-pg.params.h ** 4 * pg.ground.psi(0.0) * pg.derivative_jump(), rel=1e-14)


def test_alpha_versions(asym_well):
    pg, _, _ = asym_well
    assert pg.alpha_printed == pytest.approx(4 * pg.alpha, rel=1e-15)


def test_lpt_energy_vs_oracle(asym_well):
    pg, lpt, _ = asym_well
    assert lpt.E1_bar == pytest.approx(E1_BAR_ASYM, rel=1e-9)
    assert lpt.E1 == pytest.approx(pg.alpha * lpt.E1_bar, rel=1e-15)
    assert lpt.rate == pytest.approx(RATE_ASYM, rel=1e-9)


def test_E1_bar_direct_quadrature(asym_well):
    pg, lpt, _ = asym_well
    num, _ = quad(lambda y: pg.psi(y) ** 2, -3, 0, epsrel=1e-13, limit=400)
    num2, _ = quad(lambda y: pg.psi(y) ** 2, 0, 3, epsrel=1e-13, limit=400)
    assert lpt.E1_bar == pytest.approx(pg.psi(0.0) ** 2 / (num + num2), rel=1e-10)


def test_g1_sign_pattern(asym_well):
    _, lpt, _ = asym_well
    assert lpt.g1(-0.3) > 0 > lpt.g1(0.3)
    x = np.linspace(-1.5, 1.5, 301)
    g = lpt.g1(x[x != 0])
    xs = x[x != 0]
    assert np.all(g[xs < 0] > 0) and np.all(g[xs > 0] < 0)


def test_g1_jump_at_origin(asym_well):
    pg, lpt, _ = asym_well
    jump = lpt.g1(0.0) - lpt.g1(0.0, side="left")
    assert jump == pytest.approx(-2 / pg.params.h ** 2, rel=1e-12)


def test_G1_maximum_and_continuity(asym_well):
    _, lpt, _ = asym_well
    x = np.linspace(-1.5, 1.5, 3001)
    G = lpt.G1(x)
    assert lpt.G1(0.0) > 0
    assert x[np.argmax(G)] == 0.0
    assert abs(lpt.G1(-1e-12) - lpt.G1(0.0)) < 1e-8 * lpt.G1(0.0)
    assert abs(lpt.G1(1e-12) - lpt.G1(0.0)) < 1e-8 * lpt.G1(0.0)


def test_G1_spline_vs_exact(asym_well):
    _, lpt, _ = asym_well
    x = np.linspace(-1.3, 1.3, 97)
    np.testing.assert_allclose(lpt.G1(x), lpt.G1_exact(x), rtol=0, atol=1e-8 * lpt.G1(0.0))


def test_G1_second_derivative_jump_numeric_vs_analytic(asym_well):
    # the jump implied by differentiating both branches of g1; see the decisions log for
    # why this differs from the closed-form 4 E1_bar / h^2
    _, lpt, _ = asym_well
    assert lpt.second_derivative_jump_numeric(1e-4) == pytest.approx(lpt.second_derivative_jump_analytic(), rel=1e-4)


def test_perturbation_domain(asym_well):
    pg, lpt, _ = asym_well
    s = pg.ground.density.mixture.stdevs.max()
    x = np.concatenate([np.linspace(-1.5, -2 * s, 50), np.linspace(2 * s, 1.5, 50)])
    assert np.all(lpt.perturbation_ratio(x) < 1.0)
    assert lpt.warnings == []


def test_excited_state_normalized_and_orthogonal(asym_well):
    pg, lpt, ex = asym_well
    norm2, _ = quad(lambda y: ex(y) ** 2, lpt.nodes[0], lpt.nodes[-1], points=[0.0, -0.4, 0.4], limit=400,
                    epsrel=1e-10)
    assert norm2 == pytest.approx(1.0, abs=1e-6)
    assert abs(ex.overlap) < 1e-7


def test_excited_state_single_node(asym_well):
    _, _, ex = asym_well
    y = np.linspace(-1.5, 1.5, 3001)
    v = ex(y)
    s = np.sign(v[np.abs(v) > 1e-12])
    assert np.count_nonzero(np.diff(s)) == 1
    # negative lobe on the left, positive on the right
    assert ex(-0.4) < 0 < ex(0.4)


def test_excited_state_continuous_only_with_corrected_alpha(asym_well):
    pg, _, ex = asym_well
    e = 1e-13
    assert abs(ex(e) - ex(-e)) < 1e-9 * abs(ex(e))
    bad = copy.copy(pg)
    bad.alpha = pg.alpha_printed
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ex_bad = first_excited_state(bad, lpt_first_order(bad))
    assert abs(ex_bad(e) - ex_bad(-e)) > 0.1 * abs(ex_bad(e))


def test_susy_pairing_high_barrier():
    pg = partner_ground_state(HIGH_BARRIER)
    lpt = lpt_first_order(pg)
    ex = first_excited_state(pg, lpt)
    y = np.linspace(*pg.ground.density.mixture.support(5), 801)
    A, P = ex.A_applied(y), ex.corrected_partner(y)
    m = (np.abs(A) > 1e-6) & (np.abs(P) > 1e-6)
    r = A[m] / P[m]
    assert r.max() / r.min() - 1 < 0.01


def test_susy_pairing_profile_fig4(asym_well):
    # for the asymmetric example the ratio is not flat: first order leaves the factor
    # 1 - alpha g1^2 / (2 E1_bar), which the ratio must follow
    pg, lpt, ex = asym_well
    y = np.linspace(*pg.ground.density.mixture.support(5), 801)
    y = y[np.abs(y) > 0.05]
    A, P = ex.A_applied(y), ex.corrected_partner(y)
    m = (np.abs(A) > 1e-6) & (np.abs(P) > 1e-6)
    pred = 1 - pg.alpha * lpt.g1(y[m]) ** 2 / (2 * lpt.E1_bar)
    q = A[m] / P[m] / pred
    assert q.max() / q.min() - 1 < 1e-5


def test_lpt_step_harmonic_oracle():
    # V0 = x^2/2, V1 = x^2/2: g0 = x, g1 = x/2 give E2 = -hbar/16, g2 = -x/8
    hbar = 0.3
    x = np.linspace(-4, 4, 40001)
    E2, g2 = lpt_step(x, -x ** 2 / hbar, [x / 2], hbar)
    assert E2 == pytest.approx(-hbar / 16, rel=1e-6)
    core = np.abs(x) < 1.2
    np.testing.assert_allclose(g2[core], -x[core] / 8, atol=1e-5)
    # third order from the same step: E3 = -1/2 <2 g1 g2> = hbar/32
    E3, _ = lpt_step(x, -x ** 2 / hbar, [x / 2, -x / 8], hbar)
    assert E3 == pytest.approx(hbar / 32, rel=1e-6)


def test_second_order_energy_negative(asym_well):
    _, lpt, _ = asym_well
    assert lpt.second_order_energy() < 0


def test_gaussian_energy_reported(asym_well):
    _, lpt, _ = asym_well
    assert lpt.gaussian_E1_bar() > 0
    single = lpt_first_order(partner_ground_state(NesParams.from_mu(0.1, 0.3, 0.3, 0.0, 0.5)))
    assert single.gaussian_E1_bar() is None


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_two_term_density_integrates_to_one(asym_well, t):
    pg, _, ex = asym_well
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        dens = transition_density_two_term(pg.params, 0.2, t, ex)
    assert dens.integral() == pytest.approx(1.0, abs=1e-6)


def test_two_term_density_long_time_limit(asym_well):
    pg, _, ex = asym_well
    dens = transition_density_two_term(pg.params, 0.2, 1e7, ex)
    y = np.linspace(-1, 1, 21)
    np.testing.assert_array_equal(dens.pdf(y), pg.ground.psi(y) ** 2)


def test_two_term_density_flags_negative(asym_well):
    pg, _, ex = asym_well
    with pytest.warns(RuntimeWarning, match="negative"):
        dens = transition_density_two_term(pg.params, -0.4, 0.0, ex)
    assert dens.negative_region()
