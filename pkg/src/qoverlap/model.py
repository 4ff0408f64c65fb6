"""Queue model configuration, arrival-rate functions and departure-rate kernels.

Everything here is immutable and side-effect free, so model objects can be
shared freely between solvers and simulation workers.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

INF = math.inf
# below this variance the Gaussian smoothing is numerically indistinguishable from min(x, n)
VARIANCE_FLOOR = 1e-12

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class ConfigError(ValueError):
    """Invalid model or experiment configuration."""


@dataclass(frozen=True)
class RateFunction:
    """Time-varying arrival rate lambda(t).

    Two families are supported:

    * ``sinusoidal``: ``(beta * sin(alpha * t) + lam) * n * rho``
    * ``tabulated``: piecewise-linear through sorted ``(time, rate)``
      breakpoints, held constant outside the first/last breakpoint.

    Use the :meth:`sinusoidal` and :meth:`tabulated` constructors rather
    than building instances by hand.
    """

    kind: str
    alpha: float = 0.0
    beta: float = 0.0
    lam: float = 0.0
    n: float = 1.0
    rho: float = 1.0
    times: tuple[float, ...] = ()
    rates: tuple[float, ...] = ()
    upper_bound: float = 0.0

    @classmethod
    def sinusoidal(cls, alpha: float, beta: float, lam: float,
                   n: float = 1.0, rho: float = 1.0) -> "RateFunction":
        if n < 0 or rho < 0:
            raise ConfigError(f"scale factors must be nonnegative, got n={n}, rho={rho}")
        if lam < abs(beta):
            raise ConfigError(
                f"baseline lam={lam} < |beta|={abs(beta)} gives a negative arrival rate")
        bound = (lam + abs(beta)) * n * rho
        return cls("sinusoidal", alpha=float(alpha), beta=float(beta), lam=float(lam),
                   n=float(n), rho=float(rho), upper_bound=float(bound))

    @classmethod
    def constant(cls, rate: float) -> "RateFunction":
        return cls.sinusoidal(0.0, 0.0, rate)

    @classmethod
    def tabulated(cls, breakpoints: Sequence[Sequence[float]],
                  upper_bound: float | None = None) -> "RateFunction":
        if len(breakpoints) == 0:
            raise ConfigError("tabulated rate needs at least one breakpoint")
        times = tuple(float(b[0]) for b in breakpoints)
        rates = tuple(float(b[1]) for b in breakpoints)
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ConfigError("breakpoint times must be strictly increasing")
        if min(rates) < 0:
            raise ConfigError("breakpoint rates must be nonnegative")
        peak = max(rates)
        if upper_bound is None:
            upper_bound = peak
        elif upper_bound < peak:
            raise ConfigError(f"upper_bound={upper_bound} is below the peak rate {peak}")
        return cls("tabulated", times=times, rates=rates, upper_bound=float(upper_bound))

    def __call__(self, t: float) -> float:
        if self.kind == "sinusoidal":
            return (self.beta * math.sin(self.alpha * t) + self.lam) * self.n * self.rho
        times, rates = self.times, self.rates
        if t <= times[0]:
            return rates[0]
        if t >= times[-1]:
            return rates[-1]
        i = bisect.bisect_right(times, t)
        t0, t1 = times[i - 1], times[i]
        w = (t - t0) / (t1 - t0)
        return rates[i - 1] + w * (rates[i] - rates[i - 1])

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        """Vectorised rate over an array of times."""
        t = np.asarray(t, dtype=float)
        if self.kind == "sinusoidal":
            return (self.beta * np.sin(self.alpha * t) + self.lam) * self.n * self.rho
        return np.interp(t, self.times, self.rates)

    def scaled(self, factor: float) -> "RateFunction":
        """Rate multiplied by ``factor`` (uniform acceleration of arrivals)."""
        if factor < 0:
            raise ConfigError("scale factor must be nonnegative")
        if self.kind == "sinusoidal":
            return replace(self, rho=self.rho * factor, upper_bound=self.upper_bound * factor)
        return replace(self, rates=tuple(r * factor for r in self.rates),
                       upper_bound=self.upper_bound * factor)

    def to_dict(self) -> dict:
        if self.kind == "sinusoidal":
            return {"kind": "sinusoidal", "alpha": self.alpha, "beta": self.beta,
                    "lambda": self.lam, "rho": self.rho, "n": self.n}
        return {"kind": "tabulated", "breakpoints": [list(p) for p in zip(self.times, self.rates)],
                "upper_bound": self.upper_bound}


@dataclass(frozen=True)
class QueueModel:
    """An M_t/M/n (or M_t/M/inf when ``servers`` is ``math.inf``) queue."""

    servers: float
    mu: float
    arrival: RateFunction
    initial_count: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigError(f"service rate mu must be positive, got {self.mu}")
        if self.servers != INF and (self.servers < 1 or int(self.servers) != self.servers):
            raise ConfigError(f"servers must be a positive integer or inf, got {self.servers}")
        if self.initial_count < 0:
            raise ConfigError("initial_count must be nonnegative")

    @property
    def infinite(self) -> bool:
        return self.servers == INF

    def accelerated(self, eta: float) -> "QueueModel":
        """The eta-scaled system: arrivals and servers times eta, initial count round(eta*x0)."""
        servers = INF if self.infinite else int(round(eta * self.servers))
        return QueueModel(servers, self.mu, self.arrival.scaled(eta),
                          float(round(eta * self.initial_count)))

    def to_dict(self) -> dict:
        return {"servers": "inf" if self.infinite else int(self.servers), "mu": self.mu,
                "arrival": self.arrival.to_dict(), "initial_count": self.initial_count}


def sinusoidal_model(alpha: float, beta: float, lam: float = 1.0, n: int = 30,
                     rho: float = 0.8, mu: float = 1.0, initial_count: float = 0.0) -> QueueModel:
    """M_t/M/n model with the n- and rho-scaled sinusoidal arrival rate."""
    return QueueModel(n, mu, RateFunction.sinusoidal(alpha, beta, lam, n, rho), initial_count)


class GaussianParams(NamedTuple):
    point: float
    mean: float
    stddev: float


def gaussian_cdf(a: float, b: float, c: float) -> float:
    """P(N <= a) for N ~ Normal(mean=b, sd=c); a step function when c == 0."""
    if c < 0:
        raise ValueError(f"standard deviation must be nonnegative, got {c}")
    if c == 0:
        return 1.0 if a >= b else 0.0
    return 0.5 * math.erfc(-(a - b) / (c * _SQRT2))


def gaussian_pdf(a: float, b: float, c: float) -> float:
    """Normal(b, c) density at a; zero by convention when c == 0."""
    if c < 0:
        raise ValueError(f"standard deviation must be nonnegative, got {c}")
    if c == 0:
        return 0.0
    z = (a - b) / c
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z) / c


def rate_f2(x: float, model: QueueModel) -> float:
    """Plain fluid departure rate mu * min(x, n)."""
    if model.infinite:
        return model.mu * x
    return model.mu * min(x, model.servers)


def smoothed_min(x: float, u: float, n: float) -> tuple[float, float]:
    """(E[min(N, n)], P(N <= n)) for N ~ Normal(x, u), u > 0."""
    s = math.sqrt(u)
    z = (n - x) / s
    cdf = 0.5 * math.erfc(-z / _SQRT2)
    pdf = _INV_SQRT_2PI * math.exp(-0.5 * z * z) / s
    return n + (x - n) * cdf - u * pdf, cdf


def rate_g2(x: float, u: float, model: QueueModel) -> float:
    """Adjusted departure rate mu * E[min(N, n)] with N ~ Normal(x, u).

    Falls back to ``rate_f2`` when the variance is below ``VARIANCE_FLOOR``
    or the system has infinitely many servers.
    """
    if u < 0:
        raise ValueError(f"variance must be nonnegative, got {u}")
    if u < VARIANCE_FLOOR or model.infinite:
        return rate_f2(x, model)
    return model.mu * smoothed_min(x, u, model.servers)[0]


def variance_drift(x: float, u: float, inflow: float, outflow: float, model: QueueModel) -> float:
    """du/dt = -2 mu Phi(n, x, sqrt u) u + inflow + outflow.

    ``inflow`` is g1 (zero for the z-process), ``outflow`` is g2.
    """
    phi = 1.0 if model.infinite else gaussian_cdf(model.servers, x, math.sqrt(u))
    return -2.0 * model.mu * phi * u + inflow + outflow


# -- config files -----------------------------------------------------------

def _parse_servers(value) -> float:
    if value is None or (isinstance(value, str) and value.lower() in {"inf", "infinity", "infinite"}):
        return INF
    if isinstance(value, float) and math.isinf(value):
        return INF
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"servers must be an integer or 'inf', got {value!r}") from None
    if n != value:
        raise ConfigError(f"servers must be an integer or 'inf', got {value!r}")
    return n


def rate_from_dict(d: dict, servers: float = 1.0) -> RateFunction:
    try:
        kind = d["kind"]
    except KeyError:
        raise ConfigError("arrival config requires 'kind'") from None
    if kind == "sinusoidal":
        scale_n = d.get("n", 1.0 if servers == INF else servers)
        try:
            return RateFunction.sinusoidal(d.get("alpha", 0.0), d.get("beta", 0.0), d["lambda"],
                                           scale_n, d.get("rho", 1.0))
        except KeyError:
            raise ConfigError("sinusoidal arrival requires 'lambda'") from None
    if kind == "tabulated":
        if "breakpoints" not in d:
            raise ConfigError("tabulated arrival requires 'breakpoints'")
        return RateFunction.tabulated(d["breakpoints"], d.get("upper_bound"))
    raise ConfigError(f"unknown arrival kind {kind!r}")


def model_from_dict(d: dict) -> QueueModel:
    missing = [k for k in ("servers", "mu", "arrival") if k not in d]
    if missing:
        raise ConfigError(f"model config missing fields: {', '.join(missing)}")
    servers = _parse_servers(d["servers"])
    return QueueModel(servers, float(d["mu"]), rate_from_dict(d["arrival"], servers),
                      float(d.get("initial_count", 0.0)))


def load_model(path: str | Path) -> QueueModel:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return model_from_dict(data)
