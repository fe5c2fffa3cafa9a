"""Transmit-power policies and the NOMA decoding thresholds.

Five regimes differ in what the secondary transmitter knows about its
link to the primary receiver and whether it has a peak-power budget:

    IntICSI       interference limit only, instantaneous g_p
    IntSCSI       interference limit only, statistics of g_p
    PowIntICSI    interference limit + power budget, instantaneous g_p
    PowIntSCSI    interference limit + power budget, statistics of g_p
    PowIntOneBit  interference limit + power budget, one feedback bit
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import AntennaConfig, LinkParams


class ScenarioKind(str, enum.Enum):
    INT_ICSI = "IntICSI"
    INT_SCSI = "IntSCSI"
    POWINT_ICSI = "PowIntICSI"
    POWINT_SCSI = "PowIntSCSI"
    POWINT_ONEBIT = "PowIntOneBit"

    def __str__(self):
        return self.value

    @property
    def uses_delta(self) -> bool:
        return self in (ScenarioKind.INT_SCSI, ScenarioKind.POWINT_SCSI)

    @property
    def uses_p_peak(self) -> bool:
        return self in (ScenarioKind.POWINT_ICSI, ScenarioKind.POWINT_SCSI, ScenarioKind.POWINT_ONEBIT)

    @property
    def interference_only(self) -> bool:
        return self in (ScenarioKind.INT_ICSI, ScenarioKind.INT_SCSI)


DEFAULT_POWER_CAP = 1e12


def db_to_linear(db: float) -> float:
    """dB relative to unit noise power -> linear."""
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class Scenario:
    """One of the five regimes with its constraint parameters (linear units).

    ``power_cap`` only affects IntICSI, whose optimal power I/g_p diverges
    as g_p -> 0; simulations clip there.
    """

    kind: ScenarioKind
    i_peak: float
    delta: float | None = None
    p_peak: float | None = None
    power_cap: float = DEFAULT_POWER_CAP

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        if not (self.i_peak > 0 and math.isfinite(self.i_peak)):
            raise ValueError(f"peak interference I must be positive, got {self.i_peak!r}")
        if self.kind.uses_delta:
            if self.delta is None or not (0 < self.delta < 1):
                raise ValueError(f"{self.kind} needs delta in (0, 1), got {self.delta!r}")
        elif self.delta is not None:
            raise ValueError(f"{self.kind} does not use delta")
        if self.kind.uses_p_peak:
            if self.p_peak is None or not (self.p_peak > 0 and math.isfinite(self.p_peak)):
                raise ValueError(f"{self.kind} needs a positive p_peak, got {self.p_peak!r}")
        elif self.p_peak is not None:
            raise ValueError(f"{self.kind} does not use p_peak")
        if not self.power_cap > 0:
            raise ValueError("power_cap must be positive")

    @classmethod
    def build(cls, kind, i_peak, delta=None, p_peak=None, **kw) -> "Scenario":
        """Construct, silently dropping parameters the kind does not use."""
        kind = ScenarioKind(kind)
        return cls(
            kind,
            i_peak,
            delta=delta if kind.uses_delta else None,
            p_peak=p_peak if kind.uses_p_peak else None,
            **kw,
        )

    @property
    def tau(self) -> float:
        """One-bit feedback threshold on g_p (also the PowIntICSI policy switch)."""
        if self.p_peak is None:
            raise ValueError(f"{self.kind} has no power budget")
        return self.i_peak / self.p_peak


@dataclass(frozen=True)
class PowerSplit:
    """NOMA power split; a_f is always 1 - a_n."""

    a_n: float

    def __post_init__(self):
        if not (0 < self.a_n < 0.5):
            raise ValueError(f"a_n must lie in (0, 0.5) so that a_n < a_f, got {self.a_n!r}")

    @property
    def a_f(self) -> float:
        return 1.0 - self.a_n


@dataclass(frozen=True)
class Thresholds:
    r_target: float
    theta: float
    theta_oma: float
    xi_n: float
    xi_f: float
    feasible: bool


def feasible_an_bound(theta: float) -> float:
    """a_n must stay below 1/(1+θ) or the far-user symbol is never decodable."""
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta!r}")
    return 1.0 / (1.0 + theta)


def weak_branch_bound(theta: float) -> float:
    """Above 1/(2+θ) the SIC stage, not the near user's own symbol, sets ξ_n."""
    return 1.0 / (2.0 + theta)


def make_thresholds(r_target: float, split: PowerSplit) -> Thresholds:
    if not r_target > 0:
        raise ValueError(f"r_target must be positive, got {r_target!r}")
    theta = 2.0**r_target - 1.0
    theta_oma = 2.0 ** (2.0 * r_target) - 1.0
    a_n, a_f = split.a_n, split.a_f
    if a_n >= feasible_an_bound(theta):
        return Thresholds(r_target, theta, theta_oma, math.inf, math.inf, False)
    xi_f = theta / (a_f - a_n * theta)
    xi_n = theta * max(1.0 / (a_f - a_n * theta), 1.0 / a_n)
    return Thresholds(r_target, theta, theta_oma, xi_n, xi_f, True)


def fixed_power(scenario: Scenario, params: LinkParams) -> float:
    """The g_p-independent power of the statistical-CSI regimes."""
    if scenario.kind is ScenarioKind.INT_SCSI:
        return -scenario.i_peak / (params.omega_p * math.log(scenario.delta))
    if scenario.kind is ScenarioKind.POWINT_SCSI:
        return min(scenario.p_peak, -scenario.i_peak / (params.omega_p * math.log(scenario.delta)))
    raise ValueError(f"{scenario.kind} has no fixed transmit power")


def transmit_power(scenario: Scenario, g_p, params: LinkParams):
    """Optimal P_t* for the given interference-link gain(s).

    Works elementwise on arrays.  IntICSI at g_p -> 0 is clipped at
    ``scenario.power_cap``.
    """
    g = np.asarray(g_p, dtype=float)
    if np.any(~(g >= 0)):
        raise ValueError("g_p must be nonnegative")
    kind = scenario.kind
    if kind is ScenarioKind.INT_ICSI:
        with np.errstate(divide="ignore"):
            out = np.minimum(scenario.i_peak / g, scenario.power_cap)
    elif kind is ScenarioKind.POWINT_ICSI:
        with np.errstate(divide="ignore"):
            out = np.minimum(scenario.p_peak, scenario.i_peak / g)
    elif kind in (ScenarioKind.INT_SCSI, ScenarioKind.POWINT_SCSI):
        out = np.full_like(g, fixed_power(scenario, params))
    elif kind is ScenarioKind.POWINT_ONEBIT:
        out = np.where(g <= scenario.tau, scenario.p_peak, 0.0)
    else:  # pragma: no cover
        raise ValueError(kind)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MetricRequest:
    """Everything a metric evaluator needs."""

    scenario: Scenario
    params: LinkParams
    antennas: AntennaConfig
    split: PowerSplit
    thresholds: Thresholds = field(default=None)

    def __post_init__(self):
        if self.thresholds is None:
            raise ValueError("thresholds are required (see make_request)")
        expected = make_thresholds(self.thresholds.r_target, self.split)
        if expected != self.thresholds:
            raise ValueError("thresholds were built for a different power split")


def make_request(scenario: Scenario, params: LinkParams, antennas: AntennaConfig, a_n: float, r_target: float) -> MetricRequest:
    split = PowerSplit(a_n)
    return MetricRequest(scenario, params, antennas, split, make_thresholds(r_target, split))
