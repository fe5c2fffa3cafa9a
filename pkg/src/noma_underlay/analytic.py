"""Closed-form sum-rate and outage for the five power policies.

Sum-rates are finite mixtures of Meijer-G terms (or, for the peak-power
ICSI policy with single antennas, exponential integrals).  Outage
probabilities are rearranged so that small probabilities are computed
directly rather than as 1 minus something close to 1.

OMA sum-rates have no closed form here and come from :mod:`oracle`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import oracle
from .channel import ccdf_ratio_xu
from .errors import UnsupportedCaseError
from .policy import MetricRequest, Scenario, ScenarioKind, fixed_power, make_request
from .specfun import exp_e1, exp_integral_ei, meijer_g23, meijer_g33

LN2 = math.log(2.0)

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"

# T(x) has a removable singularity at x = Ω_p/I; inside this relative
# window it is replaced by the mean of two points T_OFFSET either side.
T_SINGULAR_WINDOW = 1e-6
T_OFFSET = 1e-4


# ---- sum-rate -------------------------------------------------------------


def _mixture_sumrate(g, s: float, a_n: float, params, antennas) -> float:
    """Common skeleton of the Meijer-G sum-rate expressions, in bits.

    ``g(M, z)`` is the G-function pattern and ``s`` the effective power:
    I/Ω_p for the ratio laws (instantaneous CSI, no power limit) and the
    transmit power itself for the fixed-power laws.
    """
    nn, nf = antennas.n_n, antennas.n_f
    on, of, om = params.omega_n, params.omega_f, params.omega_harm
    z0 = 1.0 / (on * a_n * s)
    total = math.exp(nn * math.log(z0) - math.lgamma(nn)) * g(nn, z0)
    z1 = 1.0 / (om * s)
    z2 = z1 / a_n

    def bracket(m):
        return g(m, z1) - g(m, z2) / a_n**m

    for k in range(nf):
        m = nn + k
        logc = -math.lgamma(nn) - math.lgamma(k + 1) - nn * math.log(on) - k * math.log(of) - m * math.log(s)
        total += math.exp(logc) * bracket(m)
    for l in range(nn):
        m = nf + l
        logc = -math.lgamma(nf) - math.lgamma(l + 1) - nf * math.log(of) - l * math.log(on) - m * math.log(s)
        total += math.exp(logc) * bracket(m)
    return total / LN2


def sumrate_ratio_closed(req: MetricRequest) -> float:
    """Interference-only policy with instantaneous g_p (G^{3,2}_{3,3} form)."""
    s = req.scenario.i_peak / req.params.omega_p
    return _mixture_sumrate(meijer_g33, s, req.split.a_n, req.params, req.antennas)


def sumrate_fixed_power_closed(power: float, req: MetricRequest) -> float:
    """Any policy whose power does not depend on g_p (G^{3,1}_{2,3} form)."""
    if power <= 0:
        return 0.0
    return _mixture_sumrate(meijer_g23, power, req.split.a_n, req.params, req.antennas)


def _t_raw(x, i_peak, p_peak, omega_p):
    u = 1.0 / (x * p_peak)
    big_a = i_peak / (omega_p * p_peak)
    s = exp_e1(u)
    e = exp_integral_ei(-big_a)
    return s + (-x * i_peak * e - omega_p * math.exp(-big_a) * s) / (omega_p - x * i_peak)


def t_function(x: float, i_peak: float, p_peak: float, omega_p: float) -> float:
    """E{ln(1 + x·g·P_t*(g_p))} for unit-mean exponential g, in nats.

    Written with e^u E1(u) and Ei(-A) only, so nothing overflows for
    large 1/(x·P_peak), and with Shi - Chi replaced by E1.
    """
    if not (x > 0 and i_peak > 0 and p_peak > 0 and omega_p > 0):
        raise ValueError("T(x) needs positive arguments")
    if abs(1.0 - x * i_peak / omega_p) < T_SINGULAR_WINDOW:
        x0 = omega_p / i_peak
        lo = _t_raw(x0 * (1.0 - T_OFFSET), i_peak, p_peak, omega_p)
        hi = _t_raw(x0 * (1.0 + T_OFFSET), i_peak, p_peak, omega_p)
        return 0.5 * (lo + hi)
    return _t_raw(x, i_peak, p_peak, omega_p)


def sumrate_powint_icsi_closed(req: MetricRequest) -> float:
    if (req.antennas.n_n, req.antennas.n_f) != (1, 1):
        raise UnsupportedCaseError("the exponential-integral sum-rate needs N_n = N_f = 1")
    sc, p = req.scenario, req.params
    a = req.split.a_n

    def t(x):
        return t_function(x, sc.i_peak, sc.p_peak, p.omega_p)

    return (t(a * p.omega_n) + t(p.omega_harm) - t(a * p.omega_harm)) / LN2


def sumrate_noma_with_method(req: MetricRequest) -> tuple[float, str]:
    sc = req.scenario
    kind = sc.kind
    if kind is ScenarioKind.INT_ICSI:
        return sumrate_ratio_closed(req), CLOSED_FORM
    if kind in (ScenarioKind.INT_SCSI, ScenarioKind.POWINT_SCSI):
        return sumrate_fixed_power_closed(fixed_power(sc, req.params), req), CLOSED_FORM
    if kind is ScenarioKind.POWINT_ONEBIT:
        p_on = -math.expm1(-sc.tau / req.params.omega_p)
        return p_on * sumrate_fixed_power_closed(sc.p_peak, req), CLOSED_FORM
    if kind is ScenarioKind.POWINT_ICSI:
        if (req.antennas.n_n, req.antennas.n_f) == (1, 1):
            return sumrate_powint_icsi_closed(req), CLOSED_FORM
        return oracle.sumrate_noma_by_quadrature(req), QUADRATURE
    raise ValueError(kind)  # pragma: no cover


def sumrate_noma(req: MetricRequest) -> float:
    """Average achievable NOMA sum-rate in bits/s/Hz."""
    return sumrate_noma_with_method(req)[0]


def sumrate_oma(req: MetricRequest) -> float:
    """OMA sum-rate; evaluated numerically by design."""
    return oracle.sumrate_oma_by_quadrature(req)


# ---- outage -------------------------------------------------------------


def _union2(p1, p2):
    """Pr(A or B) for independent events, accurate when both are small."""
    return p1 + p2 - p1 * p2


def _fixed_power_fail(xi_n, xi_f, power, params, antennas):
    if power <= 0:
        return 1.0
    pn = special.gammainc(antennas.n_n, xi_n / (params.omega_n * power))
    pf = special.gammainc(antennas.n_f, xi_f / (params.omega_f * power))
    return float(_union2(pn, pf))


def _ratio_weights(xi_n, xi_f, i_peak, params):
    """(ρ_p, ρ_n, ρ_f): the three parts of β = 1/Ω_p + ξ_n/(Ω_n I) + ξ_f/(Ω_f I), normalized."""
    a_n = params.omega_p * xi_n / (params.omega_n * i_peak)
    a_f = params.omega_p * xi_f / (params.omega_f * i_peak)
    d = 1.0 + a_n + a_f
    return 1.0 / d, a_n / d, a_f / d


def joint_ratio_outage(xi_n: float, xi_f: float, i_peak: float, params, antennas) -> float:
    """Pr(g_n < ξ_n g_p/I or g_f < ξ_f g_p/I) with the same g_p in both.

    Non-outage is ρ_p Σ_{k<N_f} Σ_{l<N_n} C(k+l, k) ρ_n^l ρ_f^k; since the
    full double series sums to one, outage is the part outside the box.
    The l >= N_n strip sums to F_{X_n}(ξ_n/I) and the rest to a
    negative-binomial tail, i.e. a regularized incomplete beta.
    """
    rho_p, rho_n, rho_f = _ratio_weights(xi_n, xi_f, i_peak, params)
    nn, nf = antennas.n_n, antennas.n_f
    w = rho_n / (rho_p + rho_n)
    total = w**nn
    one_m = 1.0 - rho_f
    for l in range(nn):
        total += rho_p * rho_n**l / one_m ** (l + 1) * special.betainc(nf, l + 1, rho_f)
    return float(min(total, 1.0))


def joint_ratio_nonoutage_series(xi_n: float, xi_f: float, i_peak: float, params, antennas) -> float:
    """The finite double sum for the non-outage probability, term by term."""
    op, on, of = params.omega_p, params.omega_n, params.omega_f
    beta = 1.0 / op + xi_n / (on * i_peak) + xi_f / (of * i_peak)
    total = 0.0
    for k in range(antennas.n_f):
        for l in range(antennas.n_n):
            total += (
                xi_n**l * xi_f**k * math.factorial(k + l)
                / (math.factorial(k) * math.factorial(l) * on**l * of**k * i_peak ** (k + l))
                * beta ** (-(k + l + 1))
            )
    return total / op


def powint_icsi_terms(xi_n: float, xi_f: float, scenario: Scenario, params, antennas) -> tuple[float, float]:
    """(𝔛₁, 𝔛₂): non-outage split by whether the power or the interference limit binds.

    𝔛₁ covers g_p <= τ (full power), 𝔛₂ covers g_p > τ (P = I/g_p).
    """
    op = params.omega_p
    tau = scenario.tau
    p_on = -math.expm1(-tau / op)
    qn = special.gammaincc(antennas.n_n, xi_n / (params.omega_n * scenario.p_peak))
    qf = special.gammaincc(antennas.n_f, xi_f / (params.omega_f * scenario.p_peak))
    x1 = p_on * qn * qf
    rho_p, rho_n, rho_f = _ratio_weights(xi_n, xi_f, scenario.i_peak, params)
    beta_tau = tau / (op * rho_p)
    x2 = 0.0
    for k in range(antennas.n_f):
        for l in range(antennas.n_n):
            m = k + l
            coef = math.comb(m, k) * rho_n**l * rho_f**k
            x2 += coef * special.gammaincc(m + 1, beta_tau)
    x2 *= rho_p
    return float(x1), float(x2)


def _outage(req: MetricRequest, xi_n: float, xi_f: float) -> float:
    sc, params, ant = req.scenario, req.params, req.antennas
    kind = sc.kind
    if kind is ScenarioKind.INT_ICSI:
        return joint_ratio_outage(xi_n, xi_f, sc.i_peak, params, ant)
    if kind in (ScenarioKind.INT_SCSI, ScenarioKind.POWINT_SCSI):
        return _fixed_power_fail(xi_n, xi_f, fixed_power(sc, params), params, ant)
    if kind is ScenarioKind.POWINT_ONEBIT:
        p_off = math.exp(-sc.tau / params.omega_p)
        return p_off + (1.0 - p_off) * _fixed_power_fail(xi_n, xi_f, sc.p_peak, params, ant)
    if kind is ScenarioKind.POWINT_ICSI:
        x1, x2 = powint_icsi_terms(xi_n, xi_f, sc, params, ant)
        return min(max(1.0 - x1 - x2, 0.0), 1.0)
    raise ValueError(kind)  # pragma: no cover


def outage_noma(req: MetricRequest) -> float:
    """NOMA outage: the near user fails SIC or its own symbol, or the far user fails.

    Exactly 1 when the power split cannot support the target rate.
    """
    th = req.thresholds
    if not th.feasible:
        return 1.0
    return _outage(req, th.xi_n, th.xi_f)


def outage_oma(req: MetricRequest) -> float:
    """OMA outage with the doubled-rate threshold Θ = 2^{2r} - 1 for both users."""
    t = req.thresholds.theta_oma
    return _outage(req, t, t)


def outage_intcsi_factorized(req: MetricRequest) -> float:
    """1 - Π_u [1 - (Ω_p ξ_u/(Ω_u I + Ω_p ξ_u))^{N_u}].

    Product form that treats the two users' ratios X_n, X_f as
    independent.  They share g_p, so this is not the outage of the
    signal model (see ``outage_noma``); it is the objective whose
    minimizer is ``powalloc.an_product_form``.
    """
    th = req.thresholds
    if not th.feasible:
        return 1.0
    sc, p, a = req.scenario, req.params, req.antennas
    cn = (p.omega_p * th.xi_n / (p.omega_n * sc.i_peak + p.omega_p * th.xi_n)) ** a.n_n
    cf = (p.omega_p * th.xi_f / (p.omega_f * sc.i_peak + p.omega_p * th.xi_f)) ** a.n_f
    return float(_union2(cn, cf))


def outage_floor_powint(req: MetricRequest) -> float:
    """I -> ∞ limit shared by the three peak-power policies: the P_peak-only outage."""
    sc = req.scenario
    if not sc.kind.uses_p_peak:
        raise ValueError(f"{sc.kind} has no power budget and no outage floor")
    th = req.thresholds
    if not th.feasible:
        return 1.0
    return _fixed_power_fail(th.xi_n, th.xi_f, sc.p_peak, req.params, req.antennas)


def _success(req: MetricRequest, xi_n: float, xi_f: float) -> float:
    sc, params, ant = req.scenario, req.params, req.antennas
    kind = sc.kind
    if kind is ScenarioKind.INT_ICSI:
        rho_p, rho_n, rho_f = _ratio_weights(xi_n, xi_f, sc.i_peak, params)
        total = 0.0
        for k in range(ant.n_f):
            for l in range(ant.n_n):
                total += math.comb(k + l, k) * rho_n**l * rho_f**k
        return rho_p * total

    def fixed(power):
        qn = special.gammaincc(ant.n_n, xi_n / (params.omega_n * power))
        qf = special.gammaincc(ant.n_f, xi_f / (params.omega_f * power))
        return float(qn * qf)

    if kind in (ScenarioKind.INT_SCSI, ScenarioKind.POWINT_SCSI):
        return fixed(fixed_power(sc, params))
    if kind is ScenarioKind.POWINT_ONEBIT:
        return -math.expm1(-sc.tau / params.omega_p) * fixed(sc.p_peak)
    if kind is ScenarioKind.POWINT_ICSI:
        return sum(powint_icsi_terms(xi_n, xi_f, sc, params, ant))
    raise ValueError(kind)  # pragma: no cover


def nonoutage_noma(req: MetricRequest) -> float:
    """1 - outage_noma, computed directly; accurate when outage is close to 1."""
    th = req.thresholds
    if not th.feasible:
        return 0.0
    return _success(req, th.xi_n, th.xi_f)


def nonoutage_intcsi_factorized(req: MetricRequest) -> float:
    th = req.thresholds
    if not th.feasible:
        return 0.0
    sc, p, a = req.scenario, req.params, req.antennas
    return float(ccdf_ratio_xu("n", th.xi_n / sc.i_peak, p, a) * ccdf_ratio_xu("f", th.xi_f / sc.i_peak, p, a))



def _log_q(n: int, x: float) -> float:
    """log Q(n, x) for integer n: -x + log Σ_{k<n} x^k/k!, finite however large x is."""
    if x == 0:
        return 0.0
    return -x + float(special.logsumexp([k * math.log(x) - math.lgamma(k + 1) for k in range(n)]))


def log_nonoutage_noma(req: MetricRequest) -> float:
    """log(1 - outage_noma), kept finite where the success probability underflows.

    -inf for an infeasible split.
    """
    th = req.thresholds
    if not th.feasible:
        return -math.inf
    sc, params, ant = req.scenario, req.params, req.antennas
    xi_n, xi_f = th.xi_n, th.xi_f
    kind = sc.kind

    def fixed(power):
        return _log_q(ant.n_n, xi_n / (params.omega_n * power)) + _log_q(ant.n_f, xi_f / (params.omega_f * power))

    if kind in (ScenarioKind.INT_SCSI, ScenarioKind.POWINT_SCSI):
        return fixed(fixed_power(sc, params))
    log_p_on = math.log(-math.expm1(-sc.tau / params.omega_p)) if kind.uses_p_peak else 0.0
    if kind is ScenarioKind.POWINT_ONEBIT:
        return log_p_on + fixed(sc.p_peak)
    if kind is ScenarioKind.INT_ICSI:
        return math.log(_success(req, xi_n, xi_f))
    if kind is ScenarioKind.POWINT_ICSI:
        rho_p, rho_n, rho_f = _ratio_weights(xi_n, xi_f, sc.i_peak, params)
        beta_tau = sc.tau / (params.omega_p * rho_p)
        terms = [log_p_on + fixed(sc.p_peak)]
        for k in range(ant.n_f):
            for l in range(ant.n_n):
                m = k + l
                terms.append(
                    math.log(rho_p * math.comb(m, k)) + l * math.log(rho_n) + k * math.log(rho_f) + _log_q(m + 1, beta_tau)
                )
        return float(special.logsumexp(terms))
    raise ValueError(kind)  # pragma: no cover

# ---- asymptotics --------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticReport:
    decay_order_expected: int
    slope_measured: float
    i_grid: tuple


def outage_decay_order(req: MetricRequest, i_grid) -> AsymptoticReport:
    """Least-squares slope of log10(outage) against log10(I) over ``i_grid`` (linear I)."""
    if req.scenario.kind not in (ScenarioKind.INT_ICSI, ScenarioKind.INT_SCSI):
        raise ValueError("decay order is only defined without a power budget")
    grid = np.asarray(i_grid, dtype=float)
    if grid.size < 2 or np.any(grid <= 0) or grid.max() / grid.min() < 10.0:
        raise ValueError("i_grid must hold positive values spanning at least one decade")
    vals = []
    for i_lin in grid:
        sc = Scenario(req.scenario.kind, float(i_lin), delta=req.scenario.delta)
        r = make_request(sc, req.params, req.antennas, req.split.a_n, req.thresholds.r_target)
        vals.append(outage_noma(r))
    vals = np.asarray(vals)
    if np.any(vals <= 0):
        raise ValueError("outage underflowed to zero on the grid")
    slope = np.polyfit(np.log10(grid), np.log10(vals), 1)[0]
    return AsymptoticReport(min(req.antennas.n_n, req.antennas.n_f), float(slope), tuple(grid.tolist()))


# ---- dispatch -----------------------------------------------------------


def evaluate(metric: str, scheme: str, req: MetricRequest) -> tuple[float, str]:
    """(value, method) for any metric/scheme pair; method says how it was computed."""
    if metric == "sumrate":
        if scheme == "noma":
            return sumrate_noma_with_method(req)
        if scheme == "oma":
            return sumrate_oma(req), QUADRATURE
    elif metric == "outage":
        if scheme == "noma":
            return outage_noma(req), CLOSED_FORM
        if scheme == "oma":
            return outage_oma(req), CLOSED_FORM
    raise ValueError(f"unknown metric/scheme {metric!r}/{scheme!r}")
