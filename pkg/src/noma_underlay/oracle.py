"""Reference values by direct numerical integration.

Every closed form in :mod:`analytic` is checked against the expectation
or probability integral it came from, integrated here with adaptive
Gauss-Kronrod quadrature against the densities in :mod:`channel`.  Slow
but independent of the special-function machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from . import channel
from .errors import QuadratureError
from .policy import MetricRequest, ScenarioKind, fixed_power

LOG2E = 1.0 / math.log(2.0)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-300
    rel_tol: float = 1e-11
    max_subdivisions: int = 1000
    tail_transform: bool = True

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def loosened(self, factor: float) -> "QuadratureSpec":
        return QuadratureSpec(self.abs_tol * factor, self.rel_tol * factor, self.max_subdivisions, self.tail_transform)


DEFAULT_SPEC = QuadratureSpec()
# inner integrals of nested quadrature run tighter than the outer one
_INNER_SPEC = QuadratureSpec(rel_tol=1e-12)


def integrate_adaptive(f, lower: float, upper: float, spec: QuadratureSpec = DEFAULT_SPEC, scale: float = 1.0):
    """∫_lower^upper f(x) dx, returning (value, error estimate).

    With ``upper = inf`` and ``spec.tail_transform`` the range is mapped
    onto (0, 1) by x = lower + scale·t/(1-t); ``scale`` should be the
    natural length of the integrand (a mean, a median) so the mass does
    not get squeezed against either end of the unit interval.
    """
    if math.isinf(upper) and spec.tail_transform:
        if not scale > 0:
            raise ValueError("scale must be positive")

        def g(t):
            if t >= 1.0:
                return 0.0
            s = 1.0 - t
            x = lower + scale * t / s
            val = f(x)
            return 0.0 if val == 0.0 else val * scale / (s * s)

        a, b, fun = 0.0, 1.0, g
    else:
        a, b, fun = lower, upper, f
    value, err, info, *msg = integrate.quad(
        fun, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions, full_output=1
    )
    if msg and not _converged_anyway(value, err, spec):
        raise QuadratureError(f"quadrature did not converge: {msg[0].strip()}", estimate=err, value=value)
    return value, err


def _converged_anyway(value, err, spec):
    # quad flags roundoff trouble even when the estimate already meets the
    # tolerance (typical for integrands that are exactly zero over a stretch)
    return math.isfinite(value) and err <= max(spec.abs_tol, spec.rel_tol * abs(value)) * 10


# ---- building blocks ----------------------------------------------------


def _density(which: str, req: MetricRequest, ratio: bool):
    p, a = req.params, req.antennas
    if which == "min":
        if ratio:
            return lambda x: channel.pdf_ratio_xmin(x, p, a), p.omega_harm / p.omega_p
        return lambda x: channel.pdf_gmin(x, p, a), p.omega_harm
    if ratio:
        return lambda x: channel.pdf_ratio_xu(which, x, p, a), p.omega(which) / p.omega_p
    return lambda x: channel.pdf_gain(which, x, p, a), p.omega(which)


def _expect_log2(pdf, scale, gain, spec):
    """E{log2(1 + gain·X)} for X with density ``pdf``."""
    if gain == 0:
        return 0.0
    v, _ = integrate_adaptive(lambda x: math.log1p(gain * x) * pdf(x), 0.0, math.inf, spec, scale)
    return v * LOG2E


def expected_log2_rate(which: str, coef: float, req: MetricRequest, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """E{log2(1 + coef·g·P_t*)} where g is g_n, g_f or g_min.

    The expectation runs over every random quantity of the scenario,
    including g_p whenever the transmit power depends on it.
    """
    sc, params = req.scenario, req.params
    kind = sc.kind
    if kind is ScenarioKind.INT_ICSI:
        pdf, scale = _density(which, req, ratio=True)
        return _expect_log2(pdf, scale, coef * sc.i_peak, spec)
    pdf, scale = _density(which, req, ratio=False)
    if kind in (ScenarioKind.INT_SCSI, ScenarioKind.POWINT_SCSI):
        return _expect_log2(pdf, scale, coef * fixed_power(sc, params), spec)
    p_on = -math.expm1(-sc.tau / params.omega_p)
    if kind is ScenarioKind.POWINT_ONEBIT:
        return p_on * _expect_log2(pdf, scale, coef * sc.p_peak, spec)
    if kind is ScenarioKind.POWINT_ICSI:
        # g_p <= τ: full power.  g_p > τ: P = I/g_p, with g_p = τ + Ω_p t
        head = p_on * _expect_log2(pdf, scale, coef * sc.p_peak, _INNER_SPEC)
        tau, op = sc.tau, params.omega_p

        def tail(t):
            return math.exp(-t) * _expect_log2(pdf, scale, coef * sc.i_peak / (tau + op * t), _INNER_SPEC)

        v, _ = integrate_adaptive(tail, 0.0, math.inf, spec, 1.0)
        return head + math.exp(-tau / op) * v
    raise ValueError(kind)  # pragma: no cover


def sumrate_noma_by_quadrature(req: MetricRequest, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """E log2(1+a_n g_n P) + E log2(1+g_min P) - E log2(1+a_n g_min P)."""
    a_n = req.split.a_n
    return (
        expected_log2_rate("n", a_n, req, spec)
        + expected_log2_rate("min", 1.0, req, spec)
        - expected_log2_rate("min", a_n, req, spec)
    )


def sumrate_oma_by_quadrature(req: MetricRequest, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """0.5 Σ_u E log2(1 + g_u P): each user owns half the time."""
    return 0.5 * (expected_log2_rate("n", 1.0, req, spec) + expected_log2_rate("f", 1.0, req, spec))


def _thresholds_for(req: MetricRequest, scheme: str):
    if scheme == "noma":
        th = req.thresholds
        return (th.xi_n, th.xi_f) if th.feasible else None
    if scheme == "oma":
        t = req.thresholds.theta_oma
        return t, t
    raise ValueError(f"unknown scheme {scheme!r}")


def _fail_given_power(req: MetricRequest, xi_n: float, xi_f: float, power: float, spec=None) -> float:
    """Pr(g_n < ξ_n/P or g_f < ξ_f/P) for a fixed power P.

    With ``spec`` the two CDFs are themselves integrated from the gain
    densities; without it they come from ``channel.cdf_gain``.
    """
    if power <= 0:
        return 1.0
    p, a = req.params, req.antennas
    if spec is None:
        pn = channel.cdf_gain("n", xi_n / power, p, a)
        pf = channel.cdf_gain("f", xi_f / power, p, a)
    else:
        pn, _ = integrate_adaptive(lambda x: channel.pdf_gain("n", x, p, a), 0.0, xi_n / power, spec)
        pf, _ = integrate_adaptive(lambda x: channel.pdf_gain("f", x, p, a), 0.0, xi_f / power, spec)
    # 1 - (1-pn)(1-pf) without cancellation when both are small
    return pn + pf - pn * pf


def outage_by_quadrature(req: MetricRequest, scheme: str = "noma", spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Outage probability from its defining integral over g_p.

    Conditioned on g_p the two users fail independently; the conditional
    failure probability is then averaged over g_p.
    """
    xis = _thresholds_for(req, scheme)
    if xis is None:
        return 1.0
    xi_n, xi_f = xis
    sc, params = req.scenario, req.params
    kind, op = sc.kind, params.omega_p
    if kind in (ScenarioKind.INT_SCSI, ScenarioKind.POWINT_SCSI):
        return _fail_given_power(req, xi_n, xi_f, fixed_power(sc, params), spec)
    if kind is ScenarioKind.POWINT_ONEBIT:
        p_on = -math.expm1(-sc.tau / op)
        return (1.0 - p_on) + p_on * _fail_given_power(req, xi_n, xi_f, sc.p_peak, spec)
    if kind is ScenarioKind.INT_ICSI:
        i_peak = sc.i_peak
        v, _ = integrate_adaptive(
            lambda t: math.exp(-t) * _fail_given_power(req, xi_n, xi_f, i_peak / (op * t)) if t > 0 else 0.0,
            0.0,
            math.inf,
            spec,
            1.0,
        )
        return v
    if kind is ScenarioKind.POWINT_ICSI:
        tau = sc.tau
        p_on = -math.expm1(-tau / op)
        head = p_on * _fail_given_power(req, xi_n, xi_f, sc.p_peak)
        v, _ = integrate_adaptive(
            lambda t: math.exp(-t) * _fail_given_power(req, xi_n, xi_f, sc.i_peak / (tau + op * t)),
            0.0,
            math.inf,
            spec,
            1.0,
        )
        return head + math.exp(-tau / op) * v
    raise ValueError(kind)  # pragma: no cover


def outage_noma_by_quadrature(req: MetricRequest, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return outage_by_quadrature(req, "noma", spec)


def outage_oma_by_quadrature(req: MetricRequest, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return outage_by_quadrature(req, "oma", spec)


def meijer_g_by_quadrature(kind: str, order: int, z: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """The two sum-rate Meijer-G patterns from the integrals they stand for.

        g33: G^{3,2}_{3,3}(z | -M,-M,1-M; 0,-M,-M) = M! ∫ ln(1+y) y^{M-1} (1+zy)^{-(M+1)} dy
        g23: G^{3,1}_{2,3}(z | -M,1-M; 0,-M,-M)    = ∫ ln(1+y) y^{M-1} e^{-zy} dy

    Both come from writing E{ln(1+cX)} for the ratio law and for the
    gamma law of the MRC gain.
    """
    if order < 1 or int(order) != order:
        raise ValueError("order must be a positive integer")
    if not z > 0:
        raise ValueError("z must be positive")
    m = int(order)
    if kind == "g33":

        def f(y):
            return math.log1p(y) * math.exp((m - 1) * math.log(y) - (m + 1) * math.log1p(z * y)) if y > 0 else 0.0

        v, _ = integrate_adaptive(f, 0.0, math.inf, spec, 1.0 / z)
        return math.factorial(m) * v
    if kind == "g23":

        def f(y):
            return math.log1p(y) * math.exp((m - 1) * math.log(y) - z * y) if y > 0 else 0.0

        v, _ = integrate_adaptive(f, 0.0, math.inf, spec, 1.0 / z)
        return v
    raise ValueError(f"unknown pattern {kind!r}")


__all__ = [
    "QuadratureSpec",
    "integrate_adaptive",
    "expected_log2_rate",
    "sumrate_noma_by_quadrature",
    "sumrate_oma_by_quadrature",
    "outage_by_quadrature",
    "outage_noma_by_quadrature",
    "outage_oma_by_quadrature",
    "meijer_g_by_quadrature",
]
