import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qoverlap.model import ConfigError
from qoverlap.ode import FirstPassage, Trajectory, first_passage, make_grid, rk4


def test_rk4_exponential_fourth_order():
    errs = []
    for h in (0.1, 0.05):
        grid, ys = rk4(lambda t, y: [y[0]], [1.0], 0.0, 1.0, h)
        errs.append(abs(ys[-1, 0] - math.e))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.05)


def test_rk4_time_dependent_and_start():
    grid, ys = rk4(lambda t, y: [math.cos(t)], [0.0], 2.0, 1.0, 1e-2)
    assert grid[0] == 2.0 and grid[-1] == pytest.approx(3.0)
    assert ys[-1, 0] == pytest.approx(math.sin(3.0) - math.sin(2.0), abs=1e-10)


def test_rk4_clamp():
    _, ys = rk4(lambda t, y: [-5.0], [1.0], 0.0, 1.0, 0.1, clamp=(0,))
    assert ys.min() == 0.0


@pytest.mark.parametrize("horizon,h", [(0.0, 0.1), (1.0, 0.0), (1.0, 2.0), (-1.0, 0.1)])
def test_grid_errors(horizon, h):
    with pytest.raises(ConfigError):
        make_grid(0.0, horizon, h)


def test_grid_covers_horizon():
    g = make_grid(0.0, 1.05, 0.1)
    assert g[-1] >= 1.05 and g[-2] < 1.05
    assert len(make_grid(0.0, 1.0, 1e-3)) == 1001


def test_trajectory_channel_length_checked():
    with pytest.raises(ValueError):
        Trajectory(np.arange(3.0), {"x": np.zeros(2)})


def test_trajectory_csv(tmp_path):
    grid = np.array([0.0, 0.1, 0.2])
    traj = Trajectory(grid, {"x": np.array([1 / 3, 2 / 3, 1.0]), "u": np.zeros(3)})
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x,u"
    assert float(lines[1].split(",")[1]) == 1 / 3  # 17 significant digits round-trip
    assert traj.at("x", 0.05) == pytest.approx(0.5)
    assert traj.step == pytest.approx(0.1)


def _piecewise_z(t):
    # z(0)=45, n=30, mu=1: linear drain to 30 at t=0.5, then exponential decay
    return np.where(t <= 0.5, 45 - 30 * t, 30 * np.exp(-(t - 0.5)))


def test_first_passage_interpolates():
    grid = np.linspace(0, 2, 2001)
    traj = Trajectory(grid, {"z": _piecewise_z(grid)})
    fp = first_passage(traj, "z", 29)
    assert fp.status == "reached"
    assert fp.time == pytest.approx(0.5 + math.log(30 / 29), abs=1e-6)


def test_first_passage_immediate_and_not_reached():
    grid = np.linspace(0, 1, 11)
    assert first_passage(Trajectory(grid, {"z": np.full(11, 20.0)}), "z", 29) == FirstPassage(29, 0.0)
    fp = first_passage(Trajectory(grid, {"z": np.full(11, 40.0)}), "z", 29)
    assert not fp.reached and fp.status == "not-reached-within-horizon"


def test_first_passage_relative_to_start():
    grid = 5.0 + np.linspace(0, 1, 11)
    fp = first_passage(Trajectory(grid, {"z": 10 - 10 * (grid - 5)}, 5.0), "z", 5.0)
    assert fp.time == pytest.approx(0.5)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.5, 3))
def test_rk4_exact_on_cubics(a, b, c, horizon):
    # RK4 integrates y' = p(t) exactly when p has degree <= 3 (Simpson's rule)
    grid, ys = rk4(lambda t, y: [a + b * t + c * t ** 3], [0.0], 0.0, horizon, 0.1)
    t = grid[-1]
    assert ys[-1, 0] == pytest.approx(a * t + b * t ** 2 / 2 + c * t ** 4 / 4, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(1, 50), st.floats(0.1, 10), st.floats(0.05, 0.95))
def test_first_passage_linear_decay(z0, slope, frac):
    # linear interpolation is exact for a linear channel
    threshold = z0 * (1 - frac)
    grid = make_grid(0.0, z0 / slope, 1e-2)
    traj = Trajectory(grid, {"z": z0 - slope * grid})
    fp = first_passage(traj, "z", threshold)
    assert fp.reached
    assert fp.time == pytest.approx((z0 - threshold) / slope, abs=1e-9)
