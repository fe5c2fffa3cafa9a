import math

import pytest

from conftest import request
from noma_underlay import oracle
from noma_underlay.errors import QuadratureError


def test_integrate_adaptive_known_integrals():
    v, _ = oracle.integrate_adaptive(lambda x: math.exp(-x), 0.0, math.inf)
    assert v == pytest.approx(1.0, rel=1e-12)
    v, _ = oracle.integrate_adaptive(lambda x: math.exp(-x / 1e-5), 0.0, math.inf, scale=1e-5)
    assert v == pytest.approx(1e-5, rel=1e-12)
    v, _ = oracle.integrate_adaptive(lambda x: x * x, 0.0, 3.0)
    assert v == pytest.approx(9.0, rel=1e-12)
    with pytest.raises(ValueError):
        oracle.integrate_adaptive(math.exp, 0.0, math.inf, scale=0.0)


def test_log_against_exponential_integral():
    from noma_underlay.specfun import exp_integral_ei

    v, _ = oracle.integrate_adaptive(lambda x: math.log1p(x) * math.exp(-x), 0.0, math.inf)
    assert v == pytest.approx(-math.e * exp_integral_ei(-1.0), rel=1e-11)
    assert v == pytest.approx(0.59634736, rel=1e-8)


def test_nonconvergence_is_reported():
    spec = oracle.QuadratureSpec(abs_tol=1e-300, rel_tol=1e-14, max_subdivisions=2)
    with pytest.raises(QuadratureError):
        oracle.integrate_adaptive(lambda x: math.sin(1.0 / x) if x > 0 else 0.0, 0.0, 1.0, spec)


def test_spec_validation():
    with pytest.raises(ValueError):
        oracle.QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        oracle.QuadratureSpec(max_subdivisions=0)
    assert oracle.QuadratureSpec().loosened(10).rel_tol == pytest.approx(1e-10)


@pytest.mark.parametrize("kind", ["IntSCSI", "PowIntOneBit"])
def test_cdf_integration_path_matches_library_cdf(kind):
    req = request(kind, 10, n=(2, 1))
    a = oracle.outage_noma_by_quadrature(req)
    b = oracle.outage_noma_by_quadrature(req, oracle.QuadratureSpec(rel_tol=1e-12))
    assert a == pytest.approx(b, rel=1e-9)


def test_oma_sumrate_halves_time():
    req = request("IntSCSI", 20)
    assert oracle.sumrate_oma_by_quadrature(req) == pytest.approx(
        0.5 * (oracle.expected_log2_rate("n", 1.0, req) + oracle.expected_log2_rate("f", 1.0, req))
    )


def test_meijer_quadrature_rejects_bad_input():
    with pytest.raises(ValueError):
        oracle.meijer_g_by_quadrature("g33", 0, 1.0)
    with pytest.raises(ValueError):
        oracle.meijer_g_by_quadrature("g33", 1, -1.0)
    with pytest.raises(ValueError):
        oracle.meijer_g_by_quadrature("g99", 1, 1.0)
    # M=1, g23 reduces to e^{z} E1(z)/z
    z = 0.7
    assert oracle.meijer_g_by_quadrature("g23", 1, z) == pytest.approx(math.exp(z) * _e1(z) / z, rel=1e-10)


def _e1(z):
    from scipy.special import exp1

    return float(exp1(z))


def test_unknown_scheme():
    with pytest.raises(ValueError):
        oracle.outage_by_quadrature(request("IntICSI", 20), "tdma")
