"""Fluid and adjusted-fluid approximations of the expected overlapping time.

The plain fluid model integrates

    x' = lambda(t) - mu min(x, n)             z' = -mu min(z, n)

and the adjusted model replaces mu min(., n) by its Gaussian-smoothed
counterpart g2 while carrying a variance ODE alongside (u for the
queue, v for the population present at the tagged arrival).  The expected
overlap of a customer arriving at tau is the integral of x over
[tau, tau + t0 + 1/mu], where t0 is the first time z falls to n - 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import VARIANCE_FLOOR, ConfigError, QueueModel, smoothed_min
from .ode import FirstPassage, Trajectory, first_passage, rk4

DEFAULT_STEP = 1e-3


class HorizonError(RuntimeError):
    """The requested horizon is too short for the computation to finish."""

    def __init__(self, message: str, required: float | None = None):
        super().__init__(message)
        self.required = required


@dataclass
class OverlapResult:
    method: str
    tau: float
    expected_overlap: float
    first_passage: FirstPassage | None = None
    variance: float | None = None
    stderr: float | None = None
    replications: int | None = None
    samples: np.ndarray | None = field(default=None, repr=False)


def _departure_fn(model: QueueModel):
    mu, n = model.mu, model.servers
    if model.infinite:
        return lambda x: mu * x
    return lambda x: mu * (x if x < n else n)


def _adjusted_fns(model: QueueModel):
    """Closures returning (g2, mu * Phi(n, x, sqrt u)) for the adjusted systems."""
    mu, n = model.mu, model.servers
    if model.infinite:
        return lambda x, u: (mu * x, mu)

    def g2_and_phi(x, u):
        if u < VARIANCE_FLOOR:
            return mu * (x if x < n else n), (mu if x <= n else 0.0)
        m, cdf = smoothed_min(x, u, n)
        # the Gaussian surrogate can put mass below zero; a departure rate cannot
        return (mu * m if m > 0.0 else 0.0), mu * cdf

    return g2_and_phi


def solve_fluid(model: QueueModel, horizon: float, h: float = DEFAULT_STEP) -> Trajectory:
    """x' = lambda(t) - mu min(x, n) from x(0) = initial_count, plus cum_x = int_0^t x."""
    lam = model.arrival
    dep = _departure_fn(model)

    def rhs(t, y):
        x = y[0]
        return [lam(t) - dep(x), x]

    grid, ys = rk4(rhs, [model.initial_count, 0.0], 0.0, horizon, h)
    return Trajectory(grid, {"x": ys[:, 0], "cum_x": ys[:, 1]})


def solve_z(model: QueueModel, x_at_tau: float, horizon: float, h: float = DEFAULT_STEP) -> Trajectory:
    """z' = -mu min(z, n) from z(0) = x_at_tau; time measured from the tagged arrival."""
    if x_at_tau < 0:
        raise ConfigError(f"x_at_tau must be nonnegative, got {x_at_tau}")
    dep = _departure_fn(model)
    grid, ys = rk4(lambda t, y: [-dep(y[0])], [x_at_tau], 0.0, horizon, h)
    return Trajectory(grid, {"z": ys[:, 0]})


def solve_adjusted(model: QueueModel, horizon: float, h: float = DEFAULT_STEP,
                   u0: float = 0.0) -> Trajectory:
    """Coupled adjusted fluid mean x and variance u, plus cum_x.

        x' = lambda(t) - g2(x, u)
        u' = -2 mu Phi(n, x, sqrt u) u + lambda(t) + g2(x, u)
    """
    if u0 < 0:
        raise ConfigError("initial variance must be nonnegative")
    lam = model.arrival
    g2_phi = _adjusted_fns(model)

    def rhs(t, y):
        x, u, _ = y
        if u < 0.0:
            u = 0.0
        g1 = lam(t)
        g2, mphi = g2_phi(x, u)
        return [g1 - g2, -2.0 * mphi * u + g1 + g2, x]

    grid, ys = rk4(rhs, [model.initial_count, u0, 0.0], 0.0, horizon, h, clamp=(1,))
    return Trajectory(grid, {"x": ys[:, 0], "u": ys[:, 1], "cum_x": ys[:, 2]})


def solve_z_adjusted(model: QueueModel, x_at_tau: float, u_at_tau: float, horizon: float,
                     h: float = DEFAULT_STEP, freeze_variance: bool = False) -> Trajectory:
    """Adjusted z-process and its variance v, started from (x_a(tau), u(tau)).

        z' = -g2(z, v)
        v' = -2 mu Phi(n, z, sqrt v) v + g2(z, v)

    ``freeze_variance`` holds v at its initial value (a cross-check mode:
    with v = 0 it reproduces :func:`solve_z`).
    """
    if x_at_tau < 0 or u_at_tau < 0:
        raise ConfigError("x_at_tau and u_at_tau must be nonnegative")
    g2_phi = _adjusted_fns(model)

    def rhs(t, y):
        z, v = y
        if v < 0.0:
            v = 0.0
        g2, mphi = g2_phi(z, v)
        return [-g2, 0.0 if freeze_variance else -2.0 * mphi * v + g2]

    grid, ys = rk4(rhs, [x_at_tau, u_at_tau], 0.0, horizon, h, clamp=(1,))
    return Trajectory(grid, {"z": ys[:, 0], "v": ys[:, 1]})


def _check_tau(tau: float, horizon: float) -> None:
    if tau < 0:
        raise ConfigError(f"tau must be nonnegative, got {tau}")
    if tau >= horizon:
        raise HorizonError(f"tau={tau} is not inside the horizon T={horizon}; extend T", tau)


def _integrate(traj: Trajectory, start: float, end: float) -> float:
    if end > traj.end_time + 1e-12:
        raise HorizonError(
            f"overlap window ends at {end:.6g} but the horizon is {traj.end_time:.6g}; "
            f"extend T to at least {end:.6g}", end)
    a, b = traj.at("cum_x", [start, end])
    return float(b - a)


def overlap_from_trajectories(model: QueueModel, tau: float, traj: Trajectory,
                              z_traj: Trajectory | None, method: str) -> OverlapResult:
    """Integrate x over [tau, tau + t0 + 1/mu] given a solved x- and z-trajectory."""
    if z_traj is None:
        fp = None
        wait = 0.0
    else:
        fp = first_passage(z_traj, "z", model.servers - 1)
        if not fp.reached:
            raise HorizonError(
                f"z did not fall to n-1={model.servers - 1} within {z_traj.end_time:.6g} "
                f"time units after tau={tau}; extend T")
        wait = fp.time
    value = _integrate(traj, tau, tau + wait + 1.0 / model.mu)
    return OverlapResult(method, tau, value, fp)


def overlap_fluid(model: QueueModel, tau: float, horizon: float, h: float = DEFAULT_STEP,
                  traj: Trajectory | None = None) -> OverlapResult:
    """Fluid-limit estimate of E[O_tau]; ``traj`` may be a precomputed :func:`solve_fluid` result."""
    _check_tau(tau, horizon)
    if traj is None:
        traj = solve_fluid(model, horizon, h)
    if model.infinite:
        return overlap_from_trajectories(model, tau, traj, None, "fluid")
    z_traj = solve_z(model, float(traj.at("x", tau)), horizon - tau, h)
    return overlap_from_trajectories(model, tau, traj, z_traj, "fluid")


def overlap_adjusted(model: QueueModel, tau: float, horizon: float, h: float = DEFAULT_STEP,
                     traj: Trajectory | None = None) -> OverlapResult:
    """Adjusted-fluid estimate of E[O_tau]; the z-system starts from (x_a(tau), u(tau))."""
    _check_tau(tau, horizon)
    if traj is None:
        traj = solve_adjusted(model, horizon, h)
    if model.infinite:
        return overlap_from_trajectories(model, tau, traj, None, "adjusted")
    x_tau = max(float(traj.at("x", tau)), 0.0)
    u_tau = max(float(traj.at("u", tau)), 0.0)
    z_traj = solve_z_adjusted(model, x_tau, u_tau, horizon - tau, h)
    return overlap_from_trajectories(model, tau, traj, z_traj, "adjusted")
