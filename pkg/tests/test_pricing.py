import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nes.errors import InputError
from nes.market import MarketEnv, OptionQuote
from nes.pricing import (
    bs_delta_from_implied,
    bs_price,
    implied_vol,
    nes_dividends,
    nes_option_price,
    price_by_quadrature,
)
from nes.potential import NesParams
from nes.tables import ROWS

MARKET = MarketEnv(1.0, 0.0005, 0.013)
STRIKES = np.array([0.8, 0.9, 1.0, 1.1, 1.2])
HORIZONS = np.array([1 / 12, 0.25, 0.5, 1.0, 2.0])
BS_ATM_QUAD = 7.96556745540579629  # mpmath quadrature of the call payoff against the lognormal

params_st = st.builds(
    NesParams.from_mu,
    mu=st.floats(0.0, 0.8),
    sigma1=st.floats(0.05, 1.2),
    sigma2=st.floats(0.05, 1.2),
    a=st.floats(0.0, 1.0),
    h=st.floats(0.02, 0.9),
    T=st.just(1.0),
)


def test_bs_atm_vs_quadrature():
    assert bs_price(100, 100, 1.0, 0.2, 0.0, 0.0, "call") == pytest.approx(BS_ATM_QUAD, rel=1e-13)


def test_bs_zero_vol_limit():
    S, K, T, r, q = 100.0, 90.0, 1.0, 0.03, 0.01
    expect = np.exp(-r * T) * (S * np.exp((r - q) * T) - K)
    assert bs_price(S, K, T, 0.0, r, q, "call") == pytest.approx(expect, rel=1e-15)
    assert bs_price(S, K, T, 1e-10, r, q, "call") == pytest.approx(expect, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.01, 3), st.floats(0.01, 1.5), st.floats(-0.05, 0.1), st.floats(0, 0.08))
def test_bs_parity(K, T, vol, r, q):
    c = bs_price(1.0, K, T, vol, r, q, "call")
    p = bs_price(1.0, K, T, vol, r, q, "put")
    assert c - p == pytest.approx(np.exp(-q * T) - K * np.exp(-r * T), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 2), st.floats(0.05, 2), st.floats(0.05, 1.0), st.sampled_from(["call", "put"]))
def test_implied_vol_round_trip(K, T, vol, kind):
    price = bs_price(1.0, K, T, vol, 0.01, 0.005, kind)
    vega = 1.0 * np.exp(-0.005 * T) * np.exp(-0.5 * ((np.log(1 / K) + (0.01 - 0.005 + vol ** 2 / 2) * T)
                                                     / (vol * np.sqrt(T))) ** 2) * np.sqrt(T / (2 * np.pi))
    if vega < 1e-6:
        return  # vol is not identifiable from the price
    assert implied_vol(price, 1.0, K, T, 0.01, 0.005, kind) == pytest.approx(vol, abs=1e-8)


def test_implied_vol_bound_errors():
    with pytest.raises(InputError, match="lower bound"):
        implied_vol(0.0, 1.0, 0.5, 1.0, 0.0, 0.0, "call")
    with pytest.raises(InputError, match="upper bound"):
        implied_vol(1.5, 1.0, 0.5, 1.0, 0.0, 0.0, "call")


def test_delta_atm_and_deep_itm():
    m = MarketEnv(100.0, 0.0, 0.0)
    T = 0.01
    K = 100.0
    q = OptionQuote(K, T, "call", bs_price(100, K, T, 0.2, 0, 0, "call"))
    assert bs_delta_from_implied(q, m) == pytest.approx(0.5, abs=0.02)
    m2 = MarketEnv(100.0, 0.01, 0.03)
    q = OptionQuote(10.0, 1.0, "call", 0.0, implied_vol=0.2)
    assert bs_delta_from_implied(q, m2) == pytest.approx(np.exp(-0.03), rel=1e-9)
    q = OptionQuote(1000.0, 1.0, "put", 0.0, implied_vol=0.2)
    assert bs_delta_from_implied(q, m2) == pytest.approx(np.exp(-0.03), rel=1e-9)


def test_dividend_identity():
    p = ROWS["6M_call"].params()
    div = nes_dividends(p, MARKET)
    from nes.potential import stationary_density

    dens = stationary_density(p)
    np.testing.assert_array_equal(div.q_k, MARKET.r_f - dens.mus - (div.xi_prime + 0.5) * div.vols ** 2)


@pytest.mark.parametrize("key", sorted(ROWS))
def test_closed_form_vs_quadrature_grid(key):
    row = ROWS[key]
    p = row.params()
    for T in HORIZONS:
        closed = nes_option_price(p, MARKET, STRIKES, T, row.kind)
        quad_ = [price_by_quadrature(p, MARKET, K, T, row.kind) for K in STRIKES]
        np.testing.assert_allclose(closed, quad_, rtol=1e-8)


def test_table1_put_against_quadrature_at_two_strikes():
    p = ROWS["1M_put"].params()
    for K in (0.8, 1.0):
        assert nes_option_price(p, MARKET, K, p.T, "put") == pytest.approx(
            price_by_quadrature(p, MARKET, K, p.T, "put"), rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(params_st, st.floats(0.3, 3.0), st.floats(0.05, 2.0))
def test_mixture_parity(p, K, T):
    div = nes_dividends(p, MARKET, T)
    c = nes_option_price(p, MARKET, K, T, "call")
    put = nes_option_price(p, MARKET, K, T, "put")
    expect = div.weights @ (MARKET.spot * np.exp(-div.q_k * T) - K * np.exp(-MARKET.r_f * T))
    assert c - put == pytest.approx(expect, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(params_st, st.floats(0.05, 2.0))
def test_monotone_and_bounded(p, T):
    K = np.linspace(0.3, 3.0, 40)
    c = nes_option_price(p, MARKET, K, T, "call")
    put = nes_option_price(p, MARKET, K, T, "put")
    assert np.all(np.diff(c) <= 1e-14) and np.all(np.diff(put) >= -1e-14)
    div = nes_dividends(p, MARKET, T)
    fwd = div.weights @ (MARKET.spot * np.exp(-div.q_k * T))
    lower = np.maximum(fwd - K * np.exp(-MARKET.r_f * T), 0.0)
    assert np.all(c >= lower - 1e-14) and np.all(c <= fwd + 1e-14)


def test_single_component_degeneration():
    p = NesParams.from_mu(0.12, 0.3, 0.5, 0.0, 0.2, T=0.7)
    div = nes_dividends(p, MARKET)
    K = np.array([0.7, 1.0, 1.3])
    for kind in ("call", "put"):
        bs = bs_price(MARKET.spot, K, 0.7, 0.3 / np.sqrt(2), MARKET.r_f, div.q_k[0], kind)
        np.testing.assert_array_equal(nes_option_price(p, MARKET, K, 0.7, kind), bs)


def test_zero_strike_forward_limit():
    p = ROWS["1Y_call"].params()
    div = nes_dividends(p, MARKET)
    expect = MARKET.spot * div.weights @ np.exp(-div.q_k * p.T)
    # at K = 1e-9 S the remaining gap is exactly the discounted strike
    K = 1e-9
    price = nes_option_price(p, MARKET, K, p.T, "call")
    assert price + K * np.exp(-MARKET.r_f * p.T) == pytest.approx(expect, abs=1e-15)
    assert nes_option_price(p, MARKET, 1e-11, p.T, "call") == pytest.approx(expect, abs=1e-10)


def test_deep_otm_zero():
    p = NesParams.from_mu(0.0, 0.02, 0.02, 0.3, 0.02)
    assert nes_option_price(p, MARKET, 10.0, 1.0, "call") < 1e-12
    assert price_by_quadrature(p, MARKET, 10.0, 1.0, "call") < 1e-12


def test_quadrature_linearity():
    p = ROWS["6M_put"].params()
    T = p.T
    fa = lambda s: max(s - 0.9, 0.0)  # noqa: E731
    fb = lambda s: max(1.1 - s, 0.0)  # noqa: E731
    a = price_by_quadrature(p, MARKET, 1.0, T, payoff=fa)
    b = price_by_quadrature(p, MARKET, 1.0, T, payoff=fb)
    ab = price_by_quadrature(p, MARKET, 1.0, T, payoff=lambda s: fa(s) + fb(s))
    assert ab == pytest.approx(a + b, rel=1e-10)
    assert a == pytest.approx(nes_option_price(p, MARKET, 0.9, T, "call"), rel=1e-8)


def test_bad_kind():
    with pytest.raises(InputError):
        nes_option_price(ROWS["6M_put"].params(), MARKET, 1.0, 0.5, "straddle")
