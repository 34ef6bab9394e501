import math
import os

import numpy as np
import pytest

from halfcav import exporters
from halfcav.dynamics import profile_from_gamma_z
from halfcav.errors import MirrorConversionError
from halfcav.memory_models import MemoryConfig, MirrorTrajectory, TimeGrid
from halfcav.mirror import (
    DEFAULT_GAMMA0_PER_S,
    DEFAULT_WAVELENGTH_M,
    decay_from_trajectory,
    feasibility_report,
    trajectory_from_decay,
)

cfg = MemoryConfig()


def _grid(t_start, t_end, dt):
    return TimeGrid.from_step(t_start, dt, int(round((t_end - t_start) / dt)) + 1)


def test_decay_to_trajectory_round_trip():
    grid = _grid(0.0, 20.0, 1e-2)
    t = grid.times
    gamma_z = 1 - np.cos(t) * np.cos(0.3 * t)
    gamma_z[:50] = 0.0
    gamma_z[-50:] = cfg.cap
    profile = profile_from_gamma_z(gamma_z, grid, cfg)
    trajectory = trajectory_from_decay(profile, cfg)
    assert np.all((trajectory.l >= 0) & (trajectory.l <= 0.25))
    assert np.all(trajectory.l[:50] == 0.0)
    assert np.all(trajectory.l[-50:] == 0.25)
    rebuilt = decay_from_trajectory(trajectory, cfg)
    assert np.max(np.abs(rebuilt.gamma_z - profile.gamma_z)) < 1e-9


def test_mirror_needs_a_lossless_atom():
    lossy = MemoryConfig(gamma_prime=0.1)
    grid = _grid(0.0, 1.0, 0.1)
    profile = profile_from_gamma_z(np.full(grid.n, 0.5), grid, lossy)
    with pytest.raises(MirrorConversionError):
        trajectory_from_decay(profile, lossy)


def test_zero_profile_parks_the_mirror_at_the_node():
    grid = _grid(0.0, 5.0, 0.01)
    trajectory = trajectory_from_decay(profile_from_gamma_z(np.zeros(grid.n), grid, cfg), cfg)
    assert np.all(trajectory.l == 0.0)
    assert trajectory.v_max == 0.0
    assert not feasibility_report(trajectory, cfg).demanding


def test_feasibility_of_a_linear_sweep():
    grid = _grid(0.0, 1.0, 1e-3)
    l = 0.25 * grid.times
    trajectory = MirrorTrajectory(grid=grid, l=l, velocity=np.gradient(l, grid.dt))
    report = feasibility_report(trajectory, cfg)
    assert abs(report.v_max - 0.25) < 1e-9
    assert not report.demanding
    assert abs(report.v_max_si - 0.25 * DEFAULT_WAVELENGTH_M * DEFAULT_GAMMA0_PER_S) < 1e-9 * report.v_max_si
    assert set(report.to_dict()) == {
        "v_max_lambda_gamma0", "v_max_m_per_s", "wavelength_m", "gamma0_per_s", "demanding"
    }


def test_quarter_wavelength_per_lifetime_is_the_demanding_edge():
    grid = _grid(0.0, 1.0, 1e-3)
    for slope, demanding in ((0.25 * (1 - 1e-6), False), (0.25, False), (0.25 * (1 + 1e-6), True)):
        l = slope * grid.times
        trajectory = MirrorTrajectory(grid=grid, l=l, velocity=np.gradient(l, grid.dt))
        assert feasibility_report(trajectory, cfg).demanding is demanding


def test_fast_sweep_is_demanding():
    grid = _grid(0.0, 0.1, 1e-4)
    l = 2.5 * grid.times
    trajectory = MirrorTrajectory(grid=grid, l=l, velocity=np.gradient(l, grid.dt))
    report = feasibility_report(trajectory, cfg, wavelength_m=780e-9, gamma0_per_s=2 * math.pi * 6e6)
    assert report.demanding
    assert abs(report.v_max_si - 2.5 * 780e-9 * 2 * math.pi * 6e6) < 1e-9 * report.v_max_si


def test_mirror_csv_round_trip(tmp_path):
    grid = _grid(-5.0, 5.0, 1e-2)
    gamma_z = cfg.cap * np.exp(-grid.times ** 2)
    profile = profile_from_gamma_z(gamma_z, grid, cfg)
    trajectory = trajectory_from_decay(profile, cfg)
    path = os.path.join(tmp_path, "mirror.csv")
    exporters.write_frame(exporters.mirror_frame(profile, trajectory), path)

    loaded, loaded_gamma_z = exporters.read_mirror_csv(path)
    assert loaded.grid.n == grid.n
    assert np.array_equal(loaded.l, trajectory.l)
    assert np.array_equal(loaded_gamma_z, gamma_z)
    rebuilt = decay_from_trajectory(loaded, cfg)
    assert np.max(np.abs(rebuilt.gamma_z - gamma_z)) < 1e-9
