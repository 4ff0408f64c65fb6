"""Fixed-step classical RK4 and the trajectory container it produces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .model import ConfigError

Rhs = Callable[[float, list], list]


@dataclass
class Trajectory:
    """Named value channels on a uniform time grid."""

    grid: np.ndarray
    channels: dict[str, np.ndarray]
    start_time: float = 0.0

    def __post_init__(self):
        for name, values in self.channels.items():
            if len(values) != len(self.grid):
                raise ValueError(f"channel {name!r} has {len(values)} points, grid has {len(self.grid)}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    def __contains__(self, name: str) -> bool:
        return name in self.channels

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0]) if len(self.grid) > 1 else 0.0

    @property
    def end_time(self) -> float:
        return float(self.grid[-1])

    def at(self, name: str, t):
        """Linear interpolation of a channel at time(s) t."""
        return np.interp(t, self.grid, self.channels[name])

    def to_csv(self, path: str | Path, names: Sequence[str] | None = None) -> None:
        names = list(names or self.channels)
        cols = [self.grid] + [self.channels[c] for c in names]
        with open(path, "w") as fh:
            fh.write(",".join(["t", *names]) + "\n")
            for row in zip(*cols):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def make_grid(start: float, horizon: float, h: float) -> np.ndarray:
    """Uniform grid start, start+h, ... covering [start, start+horizon].

    When horizon is not a multiple of h the last point overshoots by < h.
    """
    if not horizon > 0:
        raise ConfigError(f"horizon must be positive, got {horizon}")
    if not (0 < h <= horizon):
        raise ConfigError(f"step must satisfy 0 < h <= horizon, got h={h}, horizon={horizon}")
    steps = math.ceil(horizon / h - 1e-9)
    return start + h * np.arange(steps + 1)


def rk4(rhs: Rhs, y0: Sequence[float], start: float, horizon: float, h: float,
        clamp: Sequence[int] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Integrate y' = rhs(t, y) with classical RK4.

    ``rhs`` works on plain lists of floats; a scalar-state loop is much
    faster than numpy for the 2-3 dimensional systems solved here.
    Components listed in ``clamp`` are floored at zero after every step.

    Returns ``(grid, states)`` with ``states.shape == (len(grid), len(y0))``.
    """
    grid = make_grid(start, horizon, h)
    dim = len(y0)
    idx = range(dim)
    y = [float(v) for v in y0]
    out = [y]
    half = 0.5 * h
    sixth = h / 6.0
    for k in range(len(grid) - 1):
        t = start + k * h
        k1 = rhs(t, y)
        k2 = rhs(t + half, [y[i] + half * k1[i] for i in idx])
        k3 = rhs(t + half, [y[i] + half * k2[i] for i in idx])
        k4 = rhs(t + h, [y[i] + h * k3[i] for i in idx])
        y = [y[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in idx]
        for i in clamp:
            if y[i] < 0.0:
                y[i] = 0.0
        out.append(y)
    return grid, np.asarray(out, dtype=float).reshape(len(grid), dim)


@dataclass(frozen=True)
class FirstPassage:
    """First time a channel drops to ``threshold`` or below.

    ``time`` is ``None`` when the threshold is not reached within the
    trajectory's horizon; ``0.0`` when the initial value already satisfies it.
    """

    threshold: float
    time: float | None

    @property
    def reached(self) -> bool:
        return self.time is not None

    @property
    def immediate(self) -> bool:
        return self.time == 0.0

    @property
    def status(self) -> str:
        if self.time is None:
            return "not-reached-within-horizon"
        return "immediate" if self.time == 0.0 else "reached"


def first_passage(traj: Trajectory, channel: str, threshold: float) -> FirstPassage:
    """Locate inf{t >= 0 : channel(t) <= threshold}, relative to the trajectory start."""
    values = traj[channel]
    hits = np.flatnonzero(values <= threshold)
    if hits.size == 0:
        return FirstPassage(threshold, None)
    i = int(hits[0])
    if i == 0:
        return FirstPassage(threshold, 0.0)
    t0, t1 = traj.grid[i - 1], traj.grid[i]
    v0, v1 = values[i - 1], values[i]
    t = t0 + (v0 - threshold) / (v0 - v1) * (t1 - t0)
    return FirstPassage(threshold, float(t - traj.grid[0]))
