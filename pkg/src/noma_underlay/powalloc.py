"""Outage-minimizing power split a_n*.

Single-antenna cases have closed forms; everything else goes through a
golden-section search on the analytic outage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import analytic
from .channel import AntennaConfig, LinkParams
from .errors import UnsupportedCaseError
from .policy import MetricRequest, Scenario, ScenarioKind, make_request, weak_branch_bound

EDGE = 1e-9
PRESCAN_POINTS = 64
FALLBACK_POINTS = 4096

CLOSED = "closed_form"
NUMERIC = "numeric"

def _log_product_success(req):
    ok = analytic.nonoutage_intcsi_factorized(req)
    return math.log(ok) if ok > 0 else -math.inf


# (outage, log non-outage) pairs; "product" is the product-form ICSI
# outage whose minimizer is an_product_form
OBJECTIVES = {
    "outage": (analytic.outage_noma, analytic.log_nonoutage_noma),
    "product": (analytic.outage_intcsi_factorized, _log_product_success),
}


@dataclass(frozen=True)
class AllocationResult:
    a_n_star: float
    method: str
    outage_at_optimum: float
    objective: str = "outage"
    at_kink: bool = False
    fallback: bool = False


def _theta(r_target: float) -> float:
    return 2.0**r_target - 1.0


def an_statistical(params: LinkParams, theta: float) -> float:
    """Root for the fixed-power policies; I, δ, Ω_p and P_peak drop out.

    Algebraically identical to
        Ω_f/((1+θ)Ω_f - Ω_n) - √(Ω_n Ω_f (1+θ)) / ((1+θ)((1+θ)Ω_f - Ω_n)),
    rationalized so that (1+θ)Ω_f = Ω_n is not a 0/0.
    """
    return 1.0 / ((1.0 + theta) * (1.0 + math.sqrt(params.omega_n / ((1.0 + theta) * params.omega_f))))


def an_statistical_literal(params: LinkParams, theta: float) -> float:
    on, of = params.omega_n, params.omega_f
    d = (1.0 + theta) * of - on
    return of / d - math.sqrt(on * of * (1.0 + theta)) / ((1.0 + theta) * d)


def an_product_form(params: LinkParams, theta: float, i_peak: float) -> float:
    """Minimizer of the product-form ICSI outage, rationalized like ``an_statistical``.

    K = IΩ_f + Ω_pθ,  L = IΩ_n + Ω_pθ(1+θ),  a* = K / ((1+θ)K + √((1+θ)KL)).
    """
    k = i_peak * params.omega_f + params.omega_p * theta
    ell = i_peak * params.omega_n + params.omega_p * theta * (1.0 + theta)
    return k / ((1.0 + theta) * k + math.sqrt((1.0 + theta) * k * ell))


def an_product_form_literal(params: LinkParams, theta: float, i_peak: float) -> float:
    on, of, op = params.omega_n, params.omega_f, params.omega_p
    k = i_peak * of + op * theta
    d = (1.0 + theta) * of - on
    return k / (i_peak * d) - math.sqrt((1.0 + theta) * k * (i_peak * on + op * theta * (1.0 + theta))) / (
        i_peak * (1.0 + theta) * d
    )


def rejected_roots(params: LinkParams, theta: float, i_peak: float | None = None) -> tuple[float, float]:
    """The two stationary-point candidates discarded by the feasibility argument.

    Returns (1/(1+θ), "+" root of the quadratic).  The "+" root is NaN when
    (1+θ)Ω_f = Ω_n, where the quadratic degenerates to a linear equation.
    """
    on, of, op = params.omega_n, params.omega_f, params.omega_p
    d = (1.0 + theta) * of - on
    if d == 0:
        return 1.0 / (1.0 + theta), math.nan
    if i_peak is None:
        plus = of / d + math.sqrt(on * of * (1.0 + theta)) / ((1.0 + theta) * d)
    else:
        k = i_peak * of + op * theta
        plus = k / (i_peak * d) + math.sqrt((1.0 + theta) * k * (i_peak * on + op * theta * (1.0 + theta))) / (
            i_peak * (1.0 + theta) * d
        )
    return 1.0 / (1.0 + theta), plus


def _upper(theta: float) -> float:
    # a_n < a_f as well as a_n < 1/(1+θ)
    return min(1.0 / (1.0 + theta), 0.5) - EDGE


def optimal_an_closed(
    scenario: Scenario,
    params: LinkParams,
    r_target: float,
    antennas: AntennaConfig = AntennaConfig(),
) -> AllocationResult:
    """Closed-form a_n* for single-antenna users.

    The fixed-power and one-bit policies share one root.  For IntICSI the
    product-form root is returned (objective ``"product"``); the exact
    joint outage has the fixed-power root as its minimizer instead, which
    ``optimal_an_numeric`` confirms.  If the root falls past the kink at
    1/(2+θ), where ξ_n switches branch, the kink is the minimizer.
    """
    if scenario.kind is ScenarioKind.POWINT_ICSI:
        raise UnsupportedCaseError("no closed form for PowIntICSI; use optimal_an_numeric")
    if (antennas.n_n, antennas.n_f) != (1, 1):
        raise UnsupportedCaseError("closed forms need N_n = N_f = 1; use optimal_an_numeric")
    theta = _theta(r_target)
    if scenario.kind is ScenarioKind.INT_ICSI:
        root = an_product_form(params, theta, scenario.i_peak)
        objective = "product"
        plus = rejected_roots(params, theta, scenario.i_peak)[1]
    else:
        root = an_statistical(params, theta)
        objective = "outage"
        plus = rejected_roots(params, theta)[1]
    assert 0.0 < root < 1.0 / (1.0 + theta), "closed-form root left the feasible interval"
    assert math.isnan(plus) or plus >= 1.0 / (1.0 + theta) or plus <= 0.0, "the '+' root should be infeasible"
    kink = weak_branch_bound(theta)
    at_kink = root >= kink
    a_star = kink if at_kink else root
    req = make_request(scenario, params, antennas, a_star, r_target)
    return AllocationResult(a_star, CLOSED, OBJECTIVES[objective][0](req), objective, at_kink)


def _golden(f, lo, mid, hi, tol):
    res = optimize.minimize_scalar(f, bracket=(lo, mid, hi), method="golden", tol=tol / max(hi, 1e-300))
    return float(res.x)


def optimal_an_numeric(template: MetricRequest, search_tol: float = 1e-8, objective: str = "outage") -> AllocationResult:
    """Golden-section minimization of the analytic outage over a_n.

    A 64-point scan locates the bracket and checks the curve is unimodal
    on it; if not, a dense grid picks the basin and the result is
    flagged.  The branch kink 1/(2+θ) is always tried as a candidate.
    """
    try:
        out_fn, ok_fn = OBJECTIVES[objective]
    except KeyError:
        raise ValueError(f"unknown objective {objective!r}") from None
    sc, params, ant = template.scenario, template.params, template.antennas
    r_target = template.thresholds.r_target
    theta = _theta(r_target)

    def outage(a):
        return out_fn(make_request(sc, params, ant, float(a), r_target))

    def neg_log_success(a):
        return -ok_fn(make_request(sc, params, ant, float(a), r_target))

    lo, hi = EDGE, _upper(theta)
    xs = np.linspace(lo, hi, PRESCAN_POINTS)
    ys = np.array([outage(x) for x in xs])
    # near-certain outage is resolved through log(1 - outage), which
    # stays informative after 1 - outage itself has underflowed
    f = outage
    if ys.min() > 0.5:
        f = neg_log_success
        ys = np.array([f(x) for x in xs])
    fallback = not _unimodal(ys)
    if fallback:
        xs = np.linspace(lo, hi, FALLBACK_POINTS)
        ys = np.array([f(x) for x in xs])
    i = int(np.argmin(ys))
    a_best = float(xs[i])
    if 0 < i < len(xs) - 1 and ys[i] < ys[i - 1] and ys[i] < ys[i + 1]:
        a_best = _golden(f, float(xs[i - 1]), float(xs[i]), float(xs[i + 1]), search_tol)
    candidates = [a_best]
    kink = weak_branch_bound(theta)
    if lo < kink < hi:
        candidates.append(kink)
    a_star = min(candidates, key=f)
    return AllocationResult(a_star, NUMERIC, outage(a_star), objective, at_kink=a_star == kink, fallback=fallback)


def _unimodal(ys: np.ndarray) -> bool:
    d = np.diff(ys)
    scale = np.max(np.abs(ys)) * 1e-12
    sign = np.where(d > scale, 1, np.where(d < -scale, -1, 0))
    nz = sign[sign != 0]
    # at most one change of sign, from descending to ascending
    changes = np.count_nonzero(np.diff(nz))
    return changes == 0 or (changes == 1 and nz[0] < 0)
