"""Trial-level simulation of the downlink under each power policy.

Trials are cut into fixed-size blocks; block b draws from its own
generator ``PCG64(SeedSequence(seed, spawn_key=(b,)))``.  A batch is just a
run of consecutive blocks handed to one worker, and the per-block sums
are merged in block order with exact summation.  The estimate therefore
depends on (seed, trials) only: neither the batch size nor the worker
count changes a single bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import sample_gains
from .policy import MetricRequest, db_to_linear, make_request, transmit_power

BLOCK_TRIALS = 1 << 14
METRICS = ("sumrate", "outage")
SCHEMES = ("noma", "oma")


@dataclass(frozen=True)
class McConfig:
    trials: int = 1_000_000
    seed: int = 0
    batch_size: int = 1 << 18
    workers: int = 1

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials!r}")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ValueError(f"batch_size must be a positive integer, got {self.batch_size!r}")
        if self.batch_size > self.trials:
            object.__setattr__(self, "batch_size", int(self.trials))
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int
    seed: int
    scenario: str
    scheme: str
    metric: str


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def trial_values(metric: str, scheme: str, req: MetricRequest, g_p, g_n, g_f) -> np.ndarray:
    """Per-trial rate (bits/s/Hz) or outage indicator (0/1)."""
    p_t = transmit_power(req.scenario, g_p, req.params)
    p_t = np.broadcast_to(p_t, np.shape(g_p))
    a_n, a_f = req.split.a_n, req.split.a_f
    th = req.thresholds
    if metric == "sumrate":
        if scheme == "noma":
            g_min = np.minimum(g_n, g_f)
            s_min = g_min * p_t
            return np.log2(1.0 + a_n * g_n * p_t) + np.log2(1.0 + a_f * s_min / (a_n * s_min + 1.0))
        if scheme == "oma":
            return 0.5 * (np.log2(1.0 + g_n * p_t) + np.log2(1.0 + g_f * p_t))
    elif metric == "outage":
        if scheme == "noma":
            sn, sf = g_n * p_t, g_f * p_t
            ok = (a_f * sn / (a_n * sn + 1.0) >= th.theta) & (a_n * sn >= th.theta) & (a_f * sf / (a_n * sf + 1.0) >= th.theta)
            return (~ok).astype(float)
        if scheme == "oma":
            big = th.theta_oma
            ok = (g_n * p_t >= big) & (g_f * p_t >= big)
            return (~ok).astype(float)
    raise ValueError(f"unknown metric/scheme {metric!r}/{scheme!r}")


def _run_blocks(metric, scheme, req, seed, trials, first, last):
    """(count, sum, M2) for each block in [first, last)."""
    out = np.empty((last - first, 3))
    for i, b in enumerate(range(first, last)):
        size = min(BLOCK_TRIALS, trials - b * BLOCK_TRIALS)
        g = sample_gains(_block_rng(seed, b), req.params, req.antennas, size)
        v = trial_values(metric, scheme, req, g.g_p, g.g_n, g.g_f)
        s = math.fsum(v)
        m = s / size
        out[i] = size, s, math.fsum((v - m) ** 2)
    return out


def _merge(blocks: np.ndarray):
    """Combine block accumulators (Chan et al.); exact sums keep it order-free."""
    n = blocks[:, 0]
    total = n.sum()
    mean = math.fsum(blocks[:, 1]) / total
    m2 = math.fsum(blocks[:, 2]) + math.fsum(n * (blocks[:, 1] / n - mean) ** 2)
    return int(total), mean, m2


def simulate(metric: str, scheme: str, req: MetricRequest, mc: McConfig) -> McEstimate:
    """Monte Carlo estimate of one metric.

    Sum-rate standard error is the sample standard deviation over √n;
    outage uses the binomial √(p(1-p)/n).
    """
    if metric not in METRICS or scheme not in SCHEMES:
        raise ValueError(f"unknown metric/scheme {metric!r}/{scheme!r}")
    n_blocks = -(-mc.trials // BLOCK_TRIALS)
    per_batch = max(1, mc.batch_size // BLOCK_TRIALS)
    ranges = [(b, min(b + per_batch, n_blocks)) for b in range(0, n_blocks, per_batch)]
    args = [(metric, scheme, req, mc.seed, mc.trials, lo, hi) for lo, hi in ranges]
    if mc.workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=mc.workers) as ex:
            parts = list(ex.map(_run_blocks, *zip(*args)))
    else:
        parts = [_run_blocks(*a) for a in args]
    n, mean, m2 = _merge(np.concatenate(parts))
    if metric == "outage":
        se = math.sqrt(max(mean * (1.0 - mean), 0.0) / n)
    else:
        se = math.sqrt(m2 / (n - 1) / n) if n > 1 else math.inf
    return McEstimate(mean, se, n, mc.seed, str(req.scenario.kind), scheme, metric)


def point_seed(master: int, *key: int) -> int:
    """Seed for the sweep point identified by the integer ``key``, derived from the master seed."""
    return int(np.random.SeedSequence(master, spawn_key=tuple(key)).generate_state(1, np.uint64)[0])


def request_at(template: MetricRequest, i_db: float) -> MetricRequest:
    """``template`` with its peak interference replaced (I given in dB)."""
    sc = replace(template.scenario, i_peak=db_to_linear(i_db))
    return make_request(sc, template.params, template.antennas, template.split.a_n, template.thresholds.r_target)


def simulate_sweep(metric: str, scheme: str, template: MetricRequest, i_grid_db, mc: McConfig) -> list[McEstimate]:
    grid = [float(x) for x in i_grid_db]
    if not grid:
        raise ValueError("empty interference grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("interference grid must be ascending")
    out = []
    for idx, i_db in enumerate(grid):
        cfg = replace(mc, seed=point_seed(mc.seed, idx))
        out.append(simulate(metric, scheme, request_at(template, i_db), cfg))
    return out


def within_sigmas(est: McEstimate, reference: float, k: float = 3.0) -> bool:
    """|mean - reference| <= k·SE.

    For outage the SE is floored at the binomial SE under the reference
    value, so an estimate of exactly zero events is still judged sensibly.
    """
    se = est.std_error
    if est.metric == "outage":
        p0 = min(max(reference, 0.0), 1.0)
        se = max(se, math.sqrt(p0 * (1.0 - p0) / est.trials))
    return abs(est.mean - reference) <= k * se


__all__ = [
    "BLOCK_TRIALS",
    "McConfig",
    "McEstimate",
    "point_seed",
    "request_at",
    "simulate",
    "simulate_sweep",
    "trial_values",
    "within_sigmas",
]
