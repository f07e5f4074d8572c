import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import HIGH_BARRIER
from nes.errors import InputError
from nes.passage import (
    escape_rate,
    kramers_rate,
    passage_time_quadrature,
    passage_time_saddle,
)
from nes.potential import NesParams, PotentialFn
from nes.tables import escape_rate_example

# 2 int Psi0^-2 int_y^inf Psi0^2 between the wells of HIGH_BARRIER, from a
# 25-digit mpmath double quadrature of the raw mixture (h = 1)
TAU_HIGH_BARRIER = 47.557973653481945


def test_quadrature_vs_mpmath_oracle():
    pot = PotentialFn(HIGH_BARRIER)
    res = passage_time_quadrature(HIGH_BARRIER, pot.local_min, pot.global_min)
    assert res.mean_passage_time == pytest.approx(TAU_HIGH_BARRIER, rel=1e-10)
    assert res.rate == 1 / res.mean_passage_time
    assert res.method == "quadrature"


@pytest.mark.parametrize("y0", [-0.1, 0.0, 0.2, 0.35])
def test_h_scaling(y0):
    base = escape_rate_example()
    vals = [passage_time_quadrature(base.replace(h=h), y0, -0.4).mean_passage_time * h ** 2
            for h in (0.05, 0.1, 0.2, 0.4)]
    np.testing.assert_allclose(vals, vals[0], rtol=1e-10)


def test_rescaled_rate_decreasing_in_y0():
    p = escape_rate_example()
    y0 = np.linspace(-0.35, 0.6, 40)
    lam = np.array([escape_rate(p, v, -0.4) for v in y0]) / p.h ** 2
    assert np.all(np.diff(lam) < 0)


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.3, 0.5), st.floats(0.01, 0.3))
def test_passage_time_increasing_in_y0(y0, dy):
    p = escape_rate_example()
    t1 = passage_time_quadrature(p, y0, -0.4).mean_passage_time
    t2 = passage_time_quadrature(p, y0 + dy, -0.4).mean_passage_time
    assert t2 > t1 > 0


def test_boundary_vanishes():
    p = escape_rate_example()
    t1 = passage_time_quadrature(p, -0.4 + 1e-8, -0.4).mean_passage_time
    t2 = passage_time_quadrature(p, -0.4 + 1e-9, -0.4).mean_passage_time
    assert 0 < t2 < 1e-5
    assert t1 / t2 == pytest.approx(10.0, rel=1e-6)
    with pytest.raises(InputError):
        passage_time_quadrature(p, -0.4, -0.4)
    assert escape_rate(p, -0.4, -0.4) == float("inf")


def test_mirror_direction():
    # absorbing from below equals the reflected problem absorbed from above
    p = NesParams.from_mu(0.3, 0.2, 0.25, 0.4, 0.2)
    q = NesParams(0.3, -0.3, 0.25, 0.2, 0.6, 0.2)  # mirror image: swap components, a -> 1-a
    t_up = passage_time_quadrature(p, 0.1, 0.5).mean_passage_time
    t_down = passage_time_quadrature(q, -0.1, -0.5).mean_passage_time
    assert t_up == pytest.approx(t_down, rel=1e-9)


def test_rate_decreasing_in_barrier():
    lams = []
    for mu in (0.45, 0.55, 0.65, 0.75):
        p = HIGH_BARRIER.replace(mu1=mu, mu2=-mu)
        pot = PotentialFn(p)
        lams.append((pot.barrier_height, escape_rate(p, pot.local_min)))
    lams.sort()
    assert all(l1 > l2 for (_, l1), (_, l2) in zip(lams, lams[1:]))


def test_saddle_requires_double_well():
    with pytest.raises(InputError, match="saddle-point inapplicable"):
        passage_time_saddle(NesParams.from_mu(0.2, 0.2, 0.3, 0.0, 0.1))
    with pytest.raises(InputError):
        escape_rate(NesParams.from_mu(0.2, 0.2, 0.3, 0.0, 0.1), 0.0)


def test_saddle_unit_limit():
    s1, s2 = 0.2, 1e-12
    r = 2 * s2 / s1
    p = NesParams(2.0, -2.0, s1, s2, r / (1 + r), 0.1)
    res = passage_time_saddle(p)
    assert res.ncdf_factor == pytest.approx(1.0, abs=1e-10)
    assert res.mean_passage_time == pytest.approx(1 / kramers_rate(p), rel=1e-10)


def test_exact_normalization_saddle_tracks_quadrature():
    # keeping the true normalization leaves only the barrier-top Gaussian error
    for p in (HIGH_BARRIER, NesParams(0.5, -0.5, 0.12, 0.15, 0.7, 1.0)):
        pot = PotentialFn(p)
        quad_tau = passage_time_quadrature(p, pot.local_min, pot.global_min).mean_passage_time
        ex = passage_time_saddle(p, normalization="exact").mean_passage_time
        assert 0.7 < ex / quad_tau < 1.0


def test_verbatim_saddle_ratio_is_frozen():
    # the verbatim formula double counts the well normalization (see the decisions log);
    # pin its output so any change is deliberate
    p = NesParams(0.5, -0.5, 0.12, 0.15, 0.7, 1.0)
    pot = PotentialFn(p)
    quad_tau = passage_time_quadrature(p, pot.local_min, pot.global_min).mean_passage_time
    ratio = passage_time_saddle(p).mean_passage_time / quad_tau
    assert 0.1 < ratio < 0.25


def test_lpt_rate_tracks_quadrature():
    from nes.susy import lpt_first_order, partner_ground_state

    pot = PotentialFn(HIGH_BARRIER)
    lam = escape_rate(HIGH_BARRIER, pot.local_min)
    lpt = lpt_first_order(partner_ground_state(HIGH_BARRIER))
    assert lpt.rate == pytest.approx(lam, rel=0.25)
