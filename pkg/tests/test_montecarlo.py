import math

import numpy as np
import pytest

from conftest import request
from noma_underlay import analytic
from noma_underlay.montecarlo import (
    BLOCK_TRIALS,
    McConfig,
    McEstimate,
    point_seed,
    request_at,
    simulate,
    simulate_sweep,
    trial_values,
    within_sigmas,
)
from noma_underlay.policy import fixed_power


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(trials=0)
    with pytest.raises(ValueError):
        McConfig(seed=-1)
    with pytest.raises(ValueError):
        McConfig(seed=2**64)
    with pytest.raises(ValueError):
        McConfig(workers=0)
    assert McConfig(trials=100, batch_size=1000).batch_size == 100


def test_same_seed_same_bits():
    req = request("IntICSI", 10)
    a = simulate("outage", "noma", req, McConfig(trials=50_000, seed=5))
    b = simulate("outage", "noma", req, McConfig(trials=50_000, seed=5))
    assert a == b
    c = simulate("outage", "noma", req, McConfig(trials=50_000, seed=6))
    assert c.mean != a.mean


@pytest.mark.parametrize("metric", ["sumrate", "outage"])
def test_batch_size_and_workers_do_not_change_result(metric):
    req = request("PowIntICSI", 10, n=(2, 1))
    n = 5 * BLOCK_TRIALS + 123
    ref = simulate(metric, "noma", req, McConfig(trials=n, seed=9, batch_size=BLOCK_TRIALS))
    for bs in (2 * BLOCK_TRIALS, 10**9):
        assert simulate(metric, "noma", req, McConfig(trials=n, seed=9, batch_size=bs)) == ref
    assert simulate(metric, "noma", req, McConfig(trials=n, seed=9, batch_size=BLOCK_TRIALS, workers=2)) == ref


def test_standard_error_scaling():
    req = request("IntSCSI", 10)
    se = [simulate("sumrate", "noma", req, McConfig(trials=t, seed=1)).std_error for t in (40_000, 160_000)]
    assert se[0] / se[1] == pytest.approx(2.0, rel=0.05)
    est = simulate("outage", "noma", req, McConfig(trials=40_000, seed=1))
    assert est.std_error == pytest.approx(math.sqrt(est.mean * (1 - est.mean) / 40_000))


def test_trial_values_by_hand():
    req = request("IntSCSI", 20, a_n=0.2)
    p = fixed_power(req.scenario, req.params)
    g_n, g_f = np.array([10 / p]), np.array([1 / p])
    r = trial_values("sumrate", "noma", req, np.array([1e-5]), g_n, g_f)
    assert r[0] == pytest.approx(math.log2(1 + 0.2 * 10) + math.log2(1 + 0.8 / 1.2))
    # far user at SNR 1 with a_f=0.8: SINR 0.8/1.2 < θ = 1, outage
    assert trial_values("outage", "noma", req, np.array([1e-5]), g_n, g_f)[0] == 1.0
    ok = trial_values("outage", "noma", req, np.array([1e-5]), g_n, 10 * g_f)[0]
    assert ok == 0.0
    with pytest.raises(ValueError):
        trial_values("rate", "noma", req, g_n, g_n, g_f)


def test_within_sigmas_zero_events():
    est = McEstimate(0.0, 0.0, 10**6, 0, "IntICSI", "noma", "outage")
    assert within_sigmas(est, 1e-6)
    assert not within_sigmas(est, 1e-4)


def test_point_seed_and_sweep():
    assert point_seed(1, 0) != point_seed(1, 1)
    assert point_seed(1, 2, 3) == point_seed(1, 2, 3)
    tmpl = request("IntSCSI", 0)
    assert request_at(tmpl, 20).scenario.i_peak == pytest.approx(100.0)
    out = simulate_sweep("outage", "noma", tmpl, [0, 10], McConfig(trials=20_000, seed=3))
    assert [e.seed for e in out] == [point_seed(3, 0), point_seed(3, 1)]
    with pytest.raises(ValueError):
        simulate_sweep("outage", "noma", tmpl, [], McConfig(trials=10))
    with pytest.raises(ValueError):
        simulate_sweep("outage", "noma", tmpl, [10, 0], McConfig(trials=10))


@pytest.mark.slow
def test_factorized_form_is_rejected_by_simulation():
    """At I=0 dB the product-form IntICSI outage misses the simulated value; the joint form does not."""
    req = request("IntICSI", 0)
    est = simulate("outage", "noma", req, McConfig(trials=1_000_000, seed=20260101))
    assert within_sigmas(est, analytic.outage_noma(req))
    assert not within_sigmas(est, analytic.outage_intcsi_factorized(req))


@pytest.mark.slow
def test_intcsi_outage_at_ten_million_trials():
    req = request("IntICSI", 20)
    est = simulate("outage", "noma", req, McConfig(trials=10_000_000, seed=777))
    assert within_sigmas(est, analytic.outage_noma(req))
    assert est.std_error < 3e-5
