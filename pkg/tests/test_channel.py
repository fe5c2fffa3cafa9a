import math

import numpy as np
import pytest
from scipy import integrate, stats

from noma_underlay.channel import (
    AntennaConfig,
    LinkParams,
    ccdf_gain,
    ccdf_ratio_xu,
    cdf_gain,
    cdf_ratio_xu,
    pdf_gain,
    pdf_gmin,
    pdf_gp,
    pdf_ratio_xmin,
    pdf_ratio_xu,
    sample_gains,
)
from noma_underlay.errors import DomainError

P = LinkParams(200.0, 30.0, 100.0, 2.0)


def test_mean_gains():
    assert P.omega_n == pytest.approx(1 / 900, rel=1e-15)
    assert P.omega_f == pytest.approx(1e-4, rel=1e-15)
    assert P.omega_p == pytest.approx(2.5e-5, rel=1e-15)
    assert P.omega_harm == pytest.approx(1 / (900 + 1e4), rel=1e-14)


def test_link_validation():
    with pytest.raises(ValueError):
        LinkParams(200.0, -1.0, 100.0, 2.0)
    with pytest.raises(ValueError):
        LinkParams(200.0, 30.0, 100.0, 0.0)
    with pytest.warns(UserWarning):
        LinkParams(50.0, 30.0, 100.0, 2.0)
    with pytest.raises(ValueError):
        AntennaConfig(0, 1)
    with pytest.raises(ValueError):
        AntennaConfig(1.5, 1)


def test_omega_f_scaling():
    assert P.with_omega_f_scaled(1.05).omega_f == pytest.approx(1.05 * P.omega_f, rel=1e-13)


def mass(pdf, scale):
    # integrate in units of the natural scale so quad sees an O(1) integrand
    v, _ = integrate.quad(lambda t: scale * pdf(scale * t), 0, np.inf, epsrel=1e-12, limit=200)
    return v


@pytest.mark.parametrize("n", [(1, 1), (2, 3), (4, 1)])
def test_densities_integrate_to_one(n):
    a = AntennaConfig(*n)
    for u in "nf":
        assert mass(lambda x: pdf_gain(u, x, P, a), P.omega(u)) == pytest.approx(1, abs=1e-9)
        assert mass(lambda x: pdf_ratio_xu(u, x, P, a), P.omega(u) / P.omega_p) == pytest.approx(1, abs=1e-8)
    assert mass(lambda x: pdf_gmin(x, P, a), P.omega_harm) == pytest.approx(1, abs=1e-9)
    assert mass(lambda x: pdf_ratio_xmin(x, P, a), P.omega_harm / P.omega_p) == pytest.approx(1, abs=1e-8)
    assert mass(lambda x: pdf_gp(x, P), P.omega_p) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_cdf_ccdf_consistency(n):
    a = AntennaConfig(n, n)
    xs = np.geomspace(1e-8, 1e-1, 30)
    for u in "nf":
        c, q = cdf_gain(u, xs, P, a), ccdf_gain(u, xs, P, a)
        np.testing.assert_allclose(c + q, 1, atol=1e-15)
        x0 = P.omega(u)
        v, _ = integrate.quad(lambda x: pdf_gain(u, x, P, a), 0, x0, epsrel=1e-12)
        assert cdf_gain(u, x0, P, a) == pytest.approx(v, rel=1e-9)
        ts = np.geomspace(1e-3, 1e3, 20)
        np.testing.assert_allclose(cdf_ratio_xu(u, ts, P, a) + ccdf_ratio_xu(u, ts, P, a), 1, atol=1e-14)


def test_ratio_ccdf_tail_no_cancellation():
    a = AntennaConfig(3, 3)
    t = 1e12
    w = P.omega_p * t / (P.omega_n + P.omega_p * t)
    assert ccdf_ratio_xu("n", t, P, a) == pytest.approx(-math.expm1(3 * math.log(w)), rel=1e-12)
    assert ccdf_ratio_xu("n", t, P, a) > 0


def test_domain():
    with pytest.raises(DomainError):
        pdf_gain("n", -1.0, P, AntennaConfig())
    with pytest.raises(DomainError):
        cdf_ratio_xu("n", -1.0, P, AntennaConfig())
    with pytest.raises(DomainError):
        pdf_gp(float("nan"), P)


def test_sampling_determinism():
    a = AntennaConfig(2, 3)
    s1 = sample_gains(np.random.default_rng(3), P, a, 1000)
    s2 = sample_gains(np.random.default_rng(3), P, a, 1000)
    for x, y in zip((s1.g_p, s1.g_n, s1.g_f), (s2.g_p, s2.g_n, s2.g_f)):
        assert np.array_equal(x, y)


@pytest.mark.slow
@pytest.mark.parametrize("n", [(1, 1), (2, 3)])
def test_sampler_ks(n):
    """KS tests of the sampled gains and ratios against the analytic CDFs at 1e6 draws."""
    a = AntennaConfig(*n)
    s = sample_gains(np.random.default_rng(2024), P, a, 1_000_000)
    assert stats.kstest(s.g_p, lambda x: 1 - np.exp(-x / P.omega_p)).pvalue > 1e-3
    assert stats.kstest(s.g_n, lambda x: cdf_gain("n", x, P, a)).pvalue > 1e-3
    assert stats.kstest(s.g_f, lambda x: cdf_gain("f", x, P, a)).pvalue > 1e-3
    assert stats.kstest(s.g_n / s.g_p, lambda t: cdf_ratio_xu("n", t, P, a)).pvalue > 1e-3
    assert stats.kstest(s.g_f / s.g_p, lambda t: cdf_ratio_xu("f", t, P, a)).pvalue > 1e-3

    def cdf_min(x):
        return 1 - ccdf_gain("n", x, P, a) * ccdf_gain("f", x, P, a)

    assert stats.kstest(np.minimum(s.g_n, s.g_f), cdf_min).pvalue > 1e-3
