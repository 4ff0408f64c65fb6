"""Event-driven simulation of the M_t/M/n queue with a tagged virtual customer.

Arrivals are an NHPP sampled by thinning against ``arrival.upper_bound``.
Departures use memorylessness: between events the busy servers complete
at total rate mu * (number busy), so each step draws a single exponential
for the superposition of candidate arrivals and departures, then one
uniform to pick the event type (and to thin the arrival).  Only the tagged
customer carries an explicit service clock.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .fluid import HorizonError, Trajectory
from .model import ConfigError, QueueModel, RateFunction
from .rng import Stream

DEFAULT_REPLICATIONS = 10_000


@dataclass(frozen=True)
class SimConfig:
    tau: float
    horizon: float
    replications: int = DEFAULT_REPLICATIONS
    master_seed: int = 0
    count_self: bool = False
    eta: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not 0 <= self.tau < self.horizon:
            raise ConfigError(f"need 0 <= tau < horizon, got tau={self.tau}, horizon={self.horizon}")
        if self.eta < 1:
            raise ConfigError("eta must be >= 1")


@dataclass(frozen=True)
class SimSample:
    replication_index: int
    overlap: float
    sojourn: float
    wait: float
    service: float
    system_size_at_tau: int
    # overlap accrued while waiting (same counting convention as ``overlap``)
    wait_overlap: float = 0.0


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    def to_text(self) -> str:
        lines = ["bin_left,bin_right,count"]
        for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts):
            lines.append(f"{lo:.17g},{hi:.17g},{int(c)}")
        return "\n".join(lines) + "\n"

    def to_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())


@dataclass
class SimAggregate:
    mean: float
    variance: float
    stderr: float
    sample_count: int
    samples: list[SimSample] = field(default_factory=list, repr=False)

    @property
    def overlaps(self) -> np.ndarray:
        return np.array([s.overlap for s in self.samples])

    @classmethod
    def from_samples(cls, samples: list[SimSample], keep: bool = True) -> "SimAggregate":
        values = np.array([s.overlap for s in samples])
        count = len(values)
        mean = float(values.mean())
        variance = float(values.var(ddof=1)) if count > 1 else 0.0
        return cls(mean, variance, math.sqrt(variance / count), count, samples if keep else [])

    def histogram(self, bins: int | None = None) -> Histogram:
        return histogram(self.overlaps, bins)

    def samples_text(self) -> str:
        lines = ["replication,O_tau,wait,service,X_at_tau"]
        for s in self.samples:
            lines.append(f"{s.replication_index},{s.overlap:.17g},{s.wait:.17g},"
                         f"{s.service:.17g},{s.system_size_at_tau}")
        return "\n".join(lines) + "\n"

    def write_samples(self, path: str | Path) -> None:
        Path(path).write_text(self.samples_text())


def _initial_count(model: QueueModel) -> int:
    x0 = model.initial_count
    if x0 != int(x0):
        raise ConfigError(f"simulation needs an integer initial_count, got {x0}")
    return int(x0)


def simulate_path(model: QueueModel, cfg: SimConfig, stream: Stream, index: int = 0) -> SimSample:
    """One replication: run to tau, inject the tagged customer, follow her to departure."""
    lam = model.arrival
    bound = lam.upper_bound
    mu = model.mu
    n = model.servers
    tau, horizon = cfg.tau, cfg.horizon
    exp, unif = stream.exponential, stream.uniform
    X = _initial_count(model)
    t = 0.0

    while True:
        R = bound + mu * (X if X < n else n)
        if R <= 0.0:
            break
        t += exp() / R
        if t >= tau:
            break
        v = unif() * R
        if v < bound:
            if v < lam(t):
                X += 1
        else:
            X -= 1

    t = tau
    x_at_tau = X
    ahead = X
    area = 0.0
    wait_area = 0.0
    wait = 0.0
    if ahead < n:
        service = exp() / mu
        in_service = True
        leave = tau + service
    else:
        service = 0.0
        in_service = False
        leave = math.inf

    while True:
        if in_service:
            busy = X if X < n - 1 else n - 1
        else:
            busy = n
        R = bound + mu * busy
        dt = exp() / R if R > 0.0 else math.inf
        if t + dt >= leave:
            area += X * (leave - t)
            t = leave
            break
        area += X * dt
        t += dt
        if t > horizon:
            raise HorizonError(
                f"replication {index}: tagged customer still in system at T={horizon} "
                f"(waiting, {ahead} customers ahead, {X} others present)")
        v = unif() * R
        if v < bound:
            if v < lam(t):
                X += 1
        else:
            X -= 1
            if not in_service:
                ahead -= 1
                if ahead <= n - 1:
                    wait = t - tau
                    wait_area = area
                    service = exp() / mu
                    in_service = True
                    leave = t + service
                    if leave > horizon:
                        raise HorizonError(
                            f"replication {index}: tagged customer departs at {leave:.6g} > T={horizon}",
                            leave)
    if leave > horizon:
        raise HorizonError(f"replication {index}: tagged customer departs at {leave:.6g} > T={horizon}",
                           leave)

    sojourn = wait + service
    if cfg.count_self:
        area += sojourn
        wait_area += wait
    return SimSample(index, area, sojourn, wait, service, x_at_tau, wait_area)


def _replication_batch(args) -> list[SimSample]:
    model, cfg, indices = args
    return [simulate_path(model, cfg, Stream.for_replication(cfg.master_seed, i), i) for i in indices]


def run_replications(model: QueueModel, cfg: SimConfig, workers: int = 1,
                     keep_samples: bool = True) -> SimAggregate:
    """Independent replications reduced in index order (bit-identical for any ``workers``)."""
    indices = range(cfg.replications)
    if workers <= 1:
        samples = _replication_batch((model, cfg, indices))
    else:
        chunk = math.ceil(cfg.replications / workers)
        batches = [(model, cfg, indices[i:i + chunk]) for i in range(0, cfg.replications, chunk)]
        with ProcessPoolExecutor(workers) as pool:
            samples = [s for part in pool.map(_replication_batch, batches) for s in part]
    return SimAggregate.from_samples(samples, keep_samples)


def sample_counts(model: QueueModel, grid: np.ndarray, stream: Stream) -> tuple[np.ndarray, float]:
    """Number in system X(t) at each grid time, and int X dt over [grid[0], grid[-1]].

    No tagged customer; the path starts at t = 0 from ``initial_count``.
    """
    lam = model.arrival
    bound = lam.upper_bound
    mu = model.mu
    n = model.servers
    exp, unif = stream.exponential, stream.uniform
    g = grid.tolist()
    G = len(g)
    g_lo, g_hi = g[0], g[-1]
    out = [0] * G
    gi = 0
    X = _initial_count(model)
    t = 0.0
    area = 0.0
    while True:
        R = bound + mu * (X if X < n else n)
        tn = t + exp() / R if R > 0.0 else math.inf
        while gi < G and g[gi] < tn:
            out[gi] = X
            gi += 1
        lo = t if t > g_lo else g_lo
        hi = tn if tn < g_hi else g_hi
        if hi > lo:
            area += X * (hi - lo)
        if gi >= G:
            break
        t = tn
        v = unif() * R
        if v < bound:
            if v < lam(t):
                X += 1
        else:
            X -= 1
    return np.array(out, dtype=float), area


def mean_counts(model: QueueModel, grid: np.ndarray, replications: int,
                master_seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Replication mean of X(t) on ``grid`` and its standard error."""
    acc = np.zeros(len(grid))
    acc2 = np.zeros(len(grid))
    for i in range(replications):
        x, _ = sample_counts(model, grid, Stream.for_replication(master_seed, i))
        acc += x
        acc2 += x * x
    mean = acc / replications
    var = (acc2 - replications * mean ** 2) / max(replications - 1, 1)
    return mean, np.sqrt(np.maximum(var, 0.0) / replications)


def thinning_arrivals(rate: RateFunction, horizon: float, stream: Stream) -> np.ndarray:
    """NHPP arrival epochs on [0, horizon] by thinning a rate-``upper_bound`` Poisson stream."""
    bound = rate.upper_bound
    times = []
    if bound <= 0:
        return np.array(times)
    t = 0.0
    while True:
        t += stream.exponential() / bound
        if t > horizon:
            break
        if stream.uniform() * bound < rate(t):
            times.append(t)
    return np.array(times)


@dataclass
class AccelerationReport:
    eta: int
    mean_sup_error: float
    stderr: float
    sup_errors: np.ndarray = field(repr=False)
    mean_t0: float = math.nan
    t0_samples: np.ndarray = field(default=None, repr=False)


def _z_first_passage(z0: int, servers: float, mu: float, stream: Stream) -> float:
    """inf{t : Z(t) <= servers - 1} for the pure-death Z-process started at z0."""
    z = z0
    t = 0.0
    threshold = servers - 1
    while z > threshold:
        t += stream.exponential() / (mu * (z if z < servers else servers))
        z -= 1
    return t


def simulate_accelerated(model: QueueModel, cfg: SimConfig, fluid: Trajectory) -> AccelerationReport:
    """Distance between X^eta / eta and the fluid trajectory under uniform acceleration.

    The eta-scaled system has arrival rate eta lambda(t), eta n servers and
    round(eta x0) initial customers.  For each replication we record
    sup_t |X^eta(t)/eta - x(t)| over the fluid grid and the scaled first
    passage t0^eta = inf{t : Z^eta(tau, t) <= eta (n - 1)}.
    """
    eta = cfg.eta
    scaled = model.accelerated(eta)
    grid = fluid.grid
    tau_idx = None
    sample_grid = grid
    if not model.infinite:
        sample_grid = np.union1d(grid, [cfg.tau])
        tau_idx = int(np.searchsorted(sample_grid, cfg.tau))
        keep = np.ones(len(sample_grid), bool)
        if not np.any(grid == cfg.tau):
            keep[tau_idx] = False
    errors = np.empty(cfg.replications)
    t0s = np.full(cfg.replications, math.nan)
    for i in range(cfg.replications):
        stream = Stream.for_replication(cfg.master_seed, i)
        counts, _ = sample_counts(scaled, sample_grid, stream)
        if tau_idx is not None:
            t0s[i] = _z_first_passage(int(counts[tau_idx]), scaled.servers, model.mu, stream)
            counts = counts[keep]
        errors[i] = np.max(np.abs(counts / eta - fluid["x"]))
    var = errors.var(ddof=1) if len(errors) > 1 else 0.0
    return AccelerationReport(eta, float(errors.mean()), math.sqrt(var / len(errors)), errors,
                              float(np.nanmean(t0s)) if tau_idx is not None else math.nan, t0s)


def histogram(samples: Sequence[float], bins: int | None = None) -> Histogram:
    """Histogram of overlap samples; Freedman-Diaconis bins unless ``bins`` is given."""
    data = np.asarray(samples, dtype=float)
    if data.size < 2:
        raise ValueError("histogram needs at least 2 samples")
    if bins is None:
        q75, q25 = np.percentile(data, [75, 25])
        if q75 - q25 > 0:
            edges = np.histogram_bin_edges(data, bins="fd")
        else:
            edges = np.histogram_bin_edges(data, bins=30)
    else:
        edges = np.histogram_bin_edges(data, bins=bins)
    counts, edges = np.histogram(data, bins=edges)
    return Histogram(edges, counts)
