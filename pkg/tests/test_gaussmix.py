import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import norm

from nes.gaussmix import GaussianMixture
from nes.potential import stationary_density
from nes.tables import ROWS


def _mix_strategy(k_max=3):
    def build(k):
        return st.tuples(
            st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k),
            st.lists(st.floats(-1.0, 1.0), min_size=k, max_size=k),
            st.lists(st.floats(0.05, 0.8), min_size=k, max_size=k),
        ).map(lambda t: GaussianMixture(np.array(t[0]) / sum(t[0]), t[1], t[2]))

    return st.integers(1, k_max).flatmap(build)


def _bounds(m):
    return m.means.min() - 12 * m.stdevs.max(), m.means.max() + 12 * m.stdevs.max()


def test_standard_normal_peak():
    m = GaussianMixture([1.0], [0.0], [1.0])
    assert m.pdf(0.0) == pytest.approx(1 / np.sqrt(2 * np.pi), rel=1e-15)
    assert m.cdf(0.0) == 0.5
    np.testing.assert_allclose(m.raw_moments(4), [0, 1, 0, 3], atol=1e-15)
    s = m.central_stats()
    assert s.skewness == 0 and s.kurtosis == pytest.approx(3.0, rel=1e-15)


def test_point_mass_limit():
    m = GaussianMixture([1.0], [2.0], [1e-8])
    assert m.raw_moments(3)[2] == pytest.approx(8.0, rel=1e-12)


def test_symmetric_pdf():
    m = GaussianMixture([0.5, 0.5], [-0.3, 0.3], [0.2, 0.2])
    x = np.linspace(-1, 1, 41)
    np.testing.assert_allclose(m.pdf(x), m.pdf(-x), rtol=1e-15)
    s = m.central_stats()
    assert abs(s.mean) < 1e-16 and abs(s.skewness) < 1e-12


def test_pdf_term_by_term_table1_put():
    m = stationary_density(ROWS["1M_put"].params()).mixture
    x = np.linspace(-0.3, 0.3, 13)
    direct = sum(w * norm.pdf(x, mu, s) for w, mu, s in zip(m.weights, m.means, m.stdevs))
    np.testing.assert_allclose(m.pdf(x), direct, rtol=1e-14)


def test_bad_inputs():
    with pytest.raises(ValueError):
        GaussianMixture([0.5, 0.6], [0, 1], [1, 1])
    with pytest.raises(ValueError):
        GaussianMixture([1.0], [0.0], [0.0])
    with pytest.raises(ValueError):
        GaussianMixture([1.0], [0.0], [1.0]).raw_moments(5)
    with pytest.raises(ValueError):
        GaussianMixture([1.0], [0.0], [1.0]).pdf(np.nan)


@settings(max_examples=40, deadline=None)
@given(_mix_strategy())
def test_normalization(m):
    lo, hi = _bounds(m)
    val, _ = quad(m.pdf, lo, hi, points=list(m.means), epsabs=1e-13, limit=200)
    assert abs(val - 1) < 1e-10


@settings(max_examples=30, deadline=None)
@given(_mix_strategy(), st.floats(-1.5, 1.5))
def test_cdf_vs_quadrature(m, x):
    lo, _ = _bounds(m)
    pts = [p for p in m.means if lo < p < x]
    val, _ = quad(m.pdf, lo, x, points=pts or None, epsabs=1e-13, limit=200) if x > lo else (0.0, 0)
    assert abs(m.cdf(x) - val) < 1e-9
    assert abs(m.cdf(x) + m.sf(x) - 1) < 1e-15


@settings(max_examples=30, deadline=None)
@given(_mix_strategy())
def test_moments_vs_quadrature(m):
    lo, hi = _bounds(m)
    raw = m.raw_moments(4)
    for n in range(1, 5):
        val, _ = quad(lambda x: x ** n * m.pdf(x), lo, hi, points=list(m.means), epsabs=1e-14, epsrel=1e-12,
                      limit=200)
        assert abs(raw[n - 1] - val) <= 1e-8 * max(abs(val), 1e-3)


@settings(max_examples=40, deadline=None)
@given(_mix_strategy(), st.floats(-2, 2))
def test_affine_shift(m, c):
    a, b = m.central_stats(), m.shift(c).central_stats()
    assert b.mean == pytest.approx(a.mean + c, abs=1e-12)
    assert b.variance == pytest.approx(a.variance, rel=1e-9)
    assert b.skewness == pytest.approx(a.skewness, abs=1e-7)
    assert b.kurtosis == pytest.approx(a.kurtosis, rel=1e-7)


@settings(max_examples=30, deadline=None)
@given(_mix_strategy(), st.floats(-3, 3))
def test_tilt_matches_exponential_reweighting(m, b):
    t = m.tilt(b)
    x = np.linspace(*m.support(5), 9)
    ratio = t.pdf(x) / (np.exp(b * x) * m.pdf(x))
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-10)


def test_skew_kurtosis_sweep_vs_monte_carlo():
    # stationary densities of the sigma1=0.2, mu=+-0.4 sweep; moments agree with samples
    from nes.potential import NesParams

    rng = np.random.default_rng(11)
    for a in (0.2, 0.5, 0.8):
        m = stationary_density(NesParams.from_mu(0.4, 0.2, 0.3, a, 0.1)).mixture
        s = m.central_stats()
        x = m.sample(2_000_000, rng)
        xc = x - x.mean()
        v = np.mean(xc ** 2)
        assert np.mean(xc ** 3) / v ** 1.5 == pytest.approx(s.skewness, abs=0.01)
        assert np.mean(xc ** 4) / v ** 2 == pytest.approx(s.kurtosis, abs=0.02)


def test_skewness_monotone_in_a():
    from nes.potential import NesParams

    sk = [stationary_density(NesParams.from_mu(0.4, 0.2, 0.3, a, 0.1)).mixture.central_stats().skewness
          for a in np.linspace(0.05, 0.95, 19)]
    # a small weight on the left component is a left tail; a small weight on the right one a right tail
    assert sk[0] < 0 < sk[-1]
