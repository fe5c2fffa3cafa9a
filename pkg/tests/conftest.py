import pytest

from noma_underlay.channel import AntennaConfig, LinkParams
from noma_underlay.policy import Scenario, db_to_linear, make_request

KINDS = ["IntICSI", "IntSCSI", "PowIntICSI", "PowIntSCSI", "PowIntOneBit"]


@pytest.fixture
def geometry():
    """Reference layout: d_n=30, d_f=100, d_p=200, α=2."""
    return LinkParams(d_p=200.0, d_n=30.0, d_f=100.0, alpha=2.0)


def request(kind, i_db, n=(1, 1), a_n=0.2, rate=1.0, p_peak_db=50.0, delta=0.1, params=None):
    params = params or LinkParams(200.0, 30.0, 100.0, 2.0)
    sc = Scenario.build(kind, db_to_linear(i_db), delta=delta, p_peak=db_to_linear(p_peak_db))
    return make_request(sc, params, AntennaConfig(*n), a_n, rate)
