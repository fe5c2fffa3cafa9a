"""Special functions used by the closed-form metrics.

Log-gamma, incomplete gamma, the exponential integral and a Meijer-G
evaluator restricted to the handful of order classes that show up in the
sum-rate expressions.  All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.optimize import minimize_scalar

from .errors import AccuracyError, DomainError, UnsupportedOrderError

EULER_GAMMA = 0.57721566490153286061

# |x| at which Ei switches from the power series to the tail expansions
# (positive argument only, see exp_integral_ei).
EI_SERIES_LIMIT = 40.0
# For negative arguments the alternating series cancels badly beyond this.
E1_SERIES_LIMIT = 1.0


def ln_gamma(x: float) -> float:
    """ln Γ(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def upper_incomplete_gamma(s: float, x: float) -> float:
    """Γ[s, x] = ∫_x^∞ t^(s-1) e^(-t) dt.

    Integer orders use the finite Poisson sum, which is exact up to
    rounding and has no cancellation.  Other orders go through the
    regularized function from scipy.
    """
    if not s > 0:
        raise DomainError(f"upper_incomplete_gamma requires s > 0, got {s!r}")
    if not x >= 0:
        raise DomainError(f"upper_incomplete_gamma requires x >= 0, got {x!r}")
    if float(s).is_integer() and s < 171:
        n = int(s)
        if x == 0:
            return math.factorial(n - 1)
        term = 1.0
        total = 1.0
        for k in range(1, n):
            term *= x / k
            total += term
        return math.factorial(n - 1) * math.exp(-x) * total
    return float(special.gammaincc(s, x) * special.gamma(s))


def gamma_q(s: float, x: float) -> float:
    """Regularized upper incomplete gamma Γ[s, x]/Γ(s)."""
    if not s > 0 or not x >= 0:
        raise DomainError(f"gamma_q requires s > 0, x >= 0, got ({s!r}, {x!r})")
    return float(special.gammaincc(s, x))


def gamma_p(s: float, x: float) -> float:
    """Regularized lower incomplete gamma, 1 - gamma_q(s, x), without cancellation."""
    if not s > 0 or not x >= 0:
        raise DomainError(f"gamma_p requires s > 0, x >= 0, got ({s!r}, {x!r})")
    return float(special.gammainc(s, x))


def _e1_series(t: float) -> float:
    # E1(t) = -γ - ln t - Σ_{k>=1} (-t)^k / (k k!)
    total = 0.0
    term = 1.0
    k = 1
    while True:
        term *= -t / k
        contrib = term / k
        total += contrib
        if abs(contrib) < 1e-17 * abs(total) or k > 200:
            break
        k += 1
    return -EULER_GAMMA - math.log(t) - total


def _exp_e1_cf(t: float) -> float:
    """e^t E1(t) by the modified Lentz continued fraction, t > 0."""
    tiny = 1e-300
    b = t + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -float(i * i)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise AccuracyError("continued fraction for E1 did not converge", estimate=abs(delta - 1.0))


def exp_e1(t: float) -> float:
    """e^t E1(t) for t > 0; finite for arbitrarily large t."""
    if not t > 0:
        raise DomainError(f"exp_e1 requires t > 0, got {t!r}")
    if t <= E1_SERIES_LIMIT:
        return math.exp(t) * _e1_series(t)
    return _exp_e1_cf(t)


def _e1(t: float) -> float:
    if t <= E1_SERIES_LIMIT:
        return _e1_series(t)
    if t > 745.0:
        return 0.0
    return math.exp(-t) * _exp_e1_cf(t)


def exp_integral_ei(x: float) -> float:
    """Exponential integral Ei(x) (principal value for x > 0).

    Negative arguments are evaluated as -E1(-x): series up to 1, continued
    fraction beyond.  Positive arguments use the power series up to
    ``EI_SERIES_LIMIT`` and the asymptotic expansion past it.
    """
    if x == 0:
        raise DomainError("Ei has a logarithmic singularity at 0")
    if x != x:
        raise DomainError("Ei of NaN")
    if x < 0:
        return -_e1(-x)
    if x <= EI_SERIES_LIMIT:
        total = 0.0
        term = 1.0
        k = 1
        while True:
            term *= x / k
            contrib = term / k
            total += contrib
            if contrib < 1e-17 * total or k > 500:
                break
            k += 1
        return EULER_GAMMA + math.log(x) + total
    if x > 709.0:
        return math.inf
    # asymptotic series, truncated at its smallest term
    total = 1.0
    term = 1.0
    for k in range(1, int(x) + 1):
        nxt = term * k / x
        if nxt > term:
            break
        term = nxt
        total += term
        if term < 1e-17 * total:
            break
    return math.exp(x) / x * total


def shi_chi_diff(x: float) -> float:
    """Shi(x) - Chi(x) for x > 0.

    Both functions grow like e^x/(2x), so the difference is taken through the
    identity Shi - Chi = E1 = -Ei(-x) instead of subtracting.
    """
    if not x > 0:
        raise DomainError(f"shi_chi_diff requires x > 0, got {x!r}")
    return _e1(x)


# --------------------------------------------------------------------------
# Meijer G
# --------------------------------------------------------------------------

SUPPORTED_ORDERS = frozenset({(3, 2, 3, 3), (3, 1, 2, 3), (1, 2, 2, 2), (1, 1, 1, 1), (1, 0, 0, 1)})


@dataclass(frozen=True)
class MeijerGSpec:
    """G^{m,n}_{p,q}(z | a; b) with real parameters and z > 0."""

    m: int
    n: int
    p: int
    q: int
    a: tuple = field(default=())
    b: tuple = field(default=())
    z: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if len(self.a) != self.p or len(self.b) != self.q:
            raise ValueError(f"expected {self.p} a- and {self.q} b-parameters, got {len(self.a)} and {len(self.b)}")
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise ValueError(f"invalid orders m={self.m}, n={self.n}, p={self.p}, q={self.q}")
        if (self.m, self.n, self.p, self.q) not in SUPPORTED_ORDERS:
            raise UnsupportedOrderError(f"order class {(self.m, self.n, self.p, self.q)} is not supported")
        if not self.z > 0 or not math.isfinite(self.z):
            raise DomainError(f"Meijer-G argument must be positive and finite, got {self.z!r}")


def _log_integrand(spec: MeijerGSpec, s):
    """log of the Mellin-Barnes integrand at complex s (vectorized)."""
    s = np.asarray(s, dtype=complex)
    out = s * math.log(spec.z)
    m, n = spec.m, spec.n
    for bj in spec.b[:m]:
        out = out + special.loggamma(bj - s)
    for aj in spec.a[:n]:
        out = out + special.loggamma(1.0 - aj + s)
    for bj in spec.b[m:]:
        out = out - special.loggamma(1.0 - bj + s)
    for aj in spec.a[n:]:
        out = out - special.loggamma(aj - s)
    return out


def _contour_abscissa(spec: MeijerGSpec) -> float:
    """Real part of the vertical contour.

    Must sit strictly between the Γ(b_j - s) poles (right) and the
    Γ(1 - a_j + s) poles (left).  Inside that strip we take the minimum of
    |integrand| on the real axis, i.e. the saddle, which keeps the
    oscillatory cancellation along the contour small.
    """
    hi = min(spec.b[: spec.m])
    if spec.n:
        lo = max(spec.a[: spec.n]) - 1.0
    else:
        lo = hi - 2.0 * max(spec.z, 1.0) - 20.0
    if not lo < hi:
        raise ValueError("contour cannot separate the two pole families for these parameters")
    width = hi - lo
    res = minimize_scalar(
        lambda c: float(_log_integrand(spec, c).real),
        bounds=(lo + 1e-3 * width, hi - 1e-3 * width),
        method="bounded",
        options={"xatol": 1e-7 * width},
    )
    return float(res.x)


_GL_LO = np.polynomial.legendre.leggauss(10)
_GL_HI = np.polynomial.legendre.leggauss(20)


def _panel_sums(f, left, right):
    """Gauss-Legendre 10/20-point estimates on each panel (vectorized)."""
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    lo_nodes = mid[:, None] + half[:, None] * _GL_LO[0][None, :]
    hi_nodes = mid[:, None] + half[:, None] * _GL_HI[0][None, :]
    lo = half * (f(lo_nodes) @ _GL_LO[1])
    hi = half * (f(hi_nodes) @ _GL_HI[1])
    return hi, np.abs(hi - lo)


def _adaptive_panels(f, a, b, rel_tol, max_panels=4096):
    """Adaptive bisection of Gauss-Legendre panels on [a, b].

    Returns (value, error estimate).  Raises AccuracyError when the
    panel budget runs out.
    """
    edges = np.linspace(a, b, 17)
    left, right = edges[:-1], edges[1:]
    vals, errs = _panel_sums(f, left, right)
    while True:
        total = float(np.sum(vals))
        err = float(np.sum(errs))
        scale = max(abs(total), float(np.sum(np.abs(vals))) * 1e-3, 1e-300)
        if err <= rel_tol * scale:
            return total, err
        if left.size >= max_panels:
            raise AccuracyError(
                "Meijer-G contour integral did not converge",
                estimate=err / max(abs(total), 1e-300),
                value=total,
            )
        bad = errs > 0.5 * rel_tol * scale / left.size
        mids = 0.5 * (left[bad] + right[bad])
        new_left = np.concatenate([left[~bad], left[bad], mids])
        new_right = np.concatenate([right[~bad], mids, right[bad]])
        new_vals, new_errs = _panel_sums(f, left[bad], mids)
        v2, e2 = _panel_sums(f, mids, right[bad])
        vals = np.concatenate([vals[~bad], new_vals, v2])
        errs = np.concatenate([errs[~bad], new_errs, e2])
        left, right = new_left, new_right


def meijer_g(spec: MeijerGSpec, rel_tol: float = 1e-12) -> float:
    """Evaluate G^{m,n}_{p,q}(z) by integrating the Mellin-Barnes integrand.

    The contour is the vertical line Re(s) = c; the integrand is
    conjugate-symmetric for real parameters, so

        G = (1/π) ∫_0^∞ Re F(c + i t) dt.

    The line is truncated once |F| has dropped 45 e-folds below its value
    on the real axis.  Coincident parameters need no special handling
    since no residues are taken.
    """
    c = _contour_abscissa(spec)
    log_peak = float(_log_integrand(spec, c).real)

    t_max = 1.0
    while float(_log_integrand(spec, c + 1j * t_max).real) - log_peak > -45.0:
        t_max *= 1.5
        if t_max > 1e6:
            raise AccuracyError("Meijer-G integrand does not decay along the contour")

    def integrand(t):
        return np.exp(_log_integrand(spec, c + 1j * t) - log_peak).real

    value, err = _adaptive_panels(integrand, 0.0, t_max, rel_tol)
    if value == 0.0:
        return 0.0
    log_abs = log_peak + math.log(abs(value)) - math.log(math.pi)
    if log_abs < -745.0:
        return 0.0
    return math.copysign(math.exp(log_abs), value)


def meijer_g33(order: float, z: float) -> float:
    """G^{3,2}_{3,3}(z | -M, -M, 1-M; 0, -M, -M), the pattern in the ICSI sum-rate."""
    return meijer_g(MeijerGSpec(3, 2, 3, 3, (-order, -order, 1 - order), (0.0, -order, -order), z))


def meijer_g23(order: float, z: float) -> float:
    """G^{3,1}_{2,3}(z | -M, 1-M; 0, -M, -M), the pattern in the fixed-power sum-rate."""
    return meijer_g(MeijerGSpec(3, 1, 2, 3, (-order, 1 - order), (0.0, -order, -order), z))
