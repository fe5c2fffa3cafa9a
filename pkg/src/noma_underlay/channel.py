"""Link statistics: Rayleigh fading with MRC at the secondary users.

Densities, CDFs and CCDFs of the channel gains and of the gain ratios
X_u = g_u/g_p, plus seeded samplers for the Monte Carlo engine.  Noise
variance is fixed to one, so every power below is an SNR-like linear
quantity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError


@dataclass(frozen=True)
class LinkParams:
    """Geometry of the ST→PR, ST→U_n and ST→U_f links."""

    d_p: float
    d_n: float
    d_f: float
    alpha: float

    def __post_init__(self):
        for name in ("d_p", "d_n", "d_f"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive distance, got {v!r}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not (self.d_n < self.d_f < self.d_p):
            warnings.warn(
                f"expected d_n < d_f < d_p, got d_n={self.d_n}, d_f={self.d_f}, d_p={self.d_p}",
                stacklevel=2,
            )

    @property
    def omega_p(self) -> float:
        return self.d_p ** (-self.alpha)

    @property
    def omega_n(self) -> float:
        return self.d_n ** (-self.alpha)

    @property
    def omega_f(self) -> float:
        return self.d_f ** (-self.alpha)

    @property
    def omega_harm(self) -> float:
        """Ω = Ω_n Ω_f / (Ω_n + Ω_f), the mean of min(g_n, g_f) for N_n = N_f = 1."""
        on, of = self.omega_n, self.omega_f
        return on * of / (on + of)

    def omega(self, u: str) -> float:
        if u == "n":
            return self.omega_n
        if u == "f":
            return self.omega_f
        if u == "p":
            return self.omega_p
        raise ValueError(f"unknown link tag {u!r}")

    def with_omega_f_scaled(self, factor: float) -> "LinkParams":
        """Copy whose far-user mean gain is scaled by ``factor``.

        Moves d_f accordingly; used to inject a deliberate inconsistency
        when checking that the validation suite catches it.
        """
        return LinkParams(self.d_p, self.d_n, self.d_f * factor ** (-1.0 / self.alpha), self.alpha)


@dataclass(frozen=True)
class AntennaConfig:
    n_n: int = 1
    n_f: int = 1

    def __post_init__(self):
        for name in ("n_n", "n_f"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {v!r}")
            object.__setattr__(self, name, int(v))

    def count(self, u: str) -> int:
        if u == "n":
            return self.n_n
        if u == "f":
            return self.n_f
        raise ValueError(f"unknown user tag {u!r}")


@dataclass(frozen=True)
class GainSample:
    """Channel gains for a batch of trials (arrays of equal length)."""

    g_p: np.ndarray
    g_n: np.ndarray
    g_f: np.ndarray


def _check_nonneg(x, what="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr >= 0)):
        raise DomainError(f"{what} must be nonnegative")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


# ---- g_u ~ Gamma(N_u, Ω_u) ----------------------------------------------


def pdf_gain(u: str, x, params: LinkParams, antennas: AntennaConfig):
    x = _check_nonneg(x)
    n = antennas.count(u)
    om = params.omega(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        logpdf = (n - 1) * np.log(x) - x / om - math.lgamma(n) - n * math.log(om)
    val = np.exp(logpdf)
    if n == 1:
        val = np.where(x == 0, 1.0 / om, val)
    return _out(val)


def cdf_gain(u: str, x, params: LinkParams, antennas: AntennaConfig):
    """1 - e^{-x/Ω_u} Σ_{k<N_u} (x/Ω_u)^k / k!, evaluated without cancellation."""
    x = _check_nonneg(x)
    return _out(special.gammainc(antennas.count(u), x / params.omega(u)))


def ccdf_gain(u: str, x, params: LinkParams, antennas: AntennaConfig):
    x = _check_nonneg(x)
    return _out(special.gammaincc(antennas.count(u), x / params.omega(u)))


def pdf_gp(x, params: LinkParams):
    x = _check_nonneg(x)
    return _out(np.exp(-x / params.omega_p) / params.omega_p)


# ---- g_min = min(g_n, g_f) ---------------------------------------------


def _gmin_terms(params: LinkParams, antennas: AntennaConfig):
    """(coefficient, power) pairs: f_gmin(x) = Σ coef · x^(power-1) · e^{-x/Ω}."""
    nn, nf = antennas.n_n, antennas.n_f
    on, of = params.omega_n, params.omega_f
    terms = []
    for k in range(nf):
        coef = math.exp(-math.lgamma(nn) - nn * math.log(on) - math.lgamma(k + 1) - k * math.log(of))
        terms.append((coef, nn + k))
    for l in range(nn):
        coef = math.exp(-math.lgamma(nf) - nf * math.log(of) - math.lgamma(l + 1) - l * math.log(on))
        terms.append((coef, nf + l))
    return terms


def pdf_gmin(x, params: LinkParams, antennas: AntennaConfig):
    x = _check_nonneg(x)
    om = params.omega_harm
    total = np.zeros_like(x)
    for coef, power in _gmin_terms(params, antennas):
        total = total + coef * x ** (power - 1)
    return _out(total * np.exp(-x / om))


# ---- ratios X_u = g_u/g_p and X_min = g_min/g_p -------------------------


def pdf_ratio_xu(u: str, x, params: LinkParams, antennas: AntennaConfig):
    x = _check_nonneg(x)
    n = antennas.count(u)
    ou, op = params.omega(u), params.omega_p
    # N x^(N-1) / (Ω_u^N Ω_p) · (x/Ω_u + 1/Ω_p)^-(N+1), rearranged to stay finite
    r = op / ou
    val = n * r * (r * x) ** (n - 1) / (1.0 + r * x) ** (n + 1)
    return _out(val)


def pdf_ratio_xmin(x, params: LinkParams, antennas: AntennaConfig):
    x = _check_nonneg(x)
    om, op = params.omega_harm, params.omega_p
    total = np.zeros_like(x)
    for coef, power in _gmin_terms(params, antennas):
        # coef · Γ(power+1) / Ω_p · x^(power-1) (x/Ω + 1/Ω_p)^-(power+1)
        scale = coef * math.exp(math.lgamma(power + 1)) / op * op ** (power + 1)
        total = total + scale * x ** (power - 1) / (1.0 + op * x / om) ** (power + 1)
    return _out(total)


def cdf_ratio_xu(u: str, t, params: LinkParams, antennas: AntennaConfig):
    """Pr(X_u < t) = (Ω_p t / (Ω_u + Ω_p t))^N_u."""
    t = _check_nonneg(t, "t")
    n = antennas.count(u)
    ou, op = params.omega(u), params.omega_p
    return _out((op * t / (ou + op * t)) ** n)


def ccdf_ratio_xu(u: str, t, params: LinkParams, antennas: AntennaConfig):
    """Pr(X_u >= t) = 1 - (Ω_p t / (Ω_u + Ω_p t))^N_u."""
    t = _check_nonneg(t, "t")
    n = antennas.count(u)
    ou, op = params.omega(u), params.omega_p
    w = op * t / (ou + op * t)
    # 1 - w^n = -expm1(n log w); accurate when w is close to 1
    with np.errstate(divide="ignore"):
        val = -np.expm1(n * np.log(w))
    return _out(np.where(np.isinf(t), 0.0, val))


# ---- sampling -----------------------------------------------------------


def sample_gains(rng: np.random.Generator, params: LinkParams, antennas: AntennaConfig, size: int) -> GainSample:
    """Draw ``size`` independent (g_p, g_n, g_f) triples.

    g_p is exponential with mean Ω_p; each MRC gain is a sum of N_u unit
    exponentials scaled by Ω_u.  The draw order is fixed (g_p, then the
    N_n near-user branches, then the N_f far-user branches), so a given
    generator state always yields the same sample.
    """
    g_p = rng.standard_exponential(size) * params.omega_p
    g_n = rng.standard_exponential((antennas.n_n, size)).sum(axis=0) * params.omega_n
    g_f = rng.standard_exponential((antennas.n_f, size)).sum(axis=0) * params.omega_f
    return GainSample(g_p, g_n, g_f)
