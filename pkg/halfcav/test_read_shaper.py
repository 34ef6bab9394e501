import math

import numpy as np
import pytest

from halfcav.core import squared_norm
from halfcav.dynamics import profile_from_gamma_z
from halfcav.errors import EnvelopeError, ScenarioError
from halfcav.memory_models import MemoryConfig, TimeBinSpec, TimeGrid
from halfcav.pulses import fidelity, make_gaussian, make_time_bin
from halfcav.read_shaper import (
    dechirp,
    free_decay_read,
    output_envelope,
    read_efficiency,
    read_profile_for_target,
    total_efficiency,
)
from halfcav.scenario_service import random_oracle_pair
from halfcav.write_optimizer import optimal_write_profile

cfg = MemoryConfig()


def _grid(t_start, t_end, dt):
    return TimeGrid.from_step(t_start, dt, int(round((t_end - t_start) / dt)) + 1)


def test_free_decay_at_the_antinode():
    grid = _grid(0.0, 10.0, 1e-3)
    profile = profile_from_gamma_z(np.full(grid.n, cfg.cap), grid, cfg)
    xi_out = output_envelope(profile, 1.0, cfg)
    assert np.max(np.abs(xi_out.intensity - 2 * np.exp(-2 * grid.times))) < 1e-9
    assert abs(squared_norm(xi_out) - (1 - math.exp(-20.0))) < 1e-6


def test_free_decay_read():
    result = free_decay_read(1.0, cfg)
    assert abs(result.eta_r - (1 - 1e-6)) < 1e-6
    assert result.fidelity_vs_target is None
    assert result.capped


def test_emission_conserves_population():
    rng = np.random.default_rng(11)
    profile, _ = random_oracle_pair(rng, cfg)
    P0 = 0.8
    emitted = squared_norm(output_envelope(profile, P0, cfg))
    left = P0 * math.exp(-profile.Gamma_z[-1])
    assert abs(emitted + left - P0) < 1e-6
    assert abs(read_efficiency(profile) - emitted / P0) < 1e-6


def test_read_efficiency_does_not_depend_on_P0():
    grid = _grid(-40.0, 40.0, 5e-3)
    target = make_gaussian(0.2, 0.0, grid)
    low = read_profile_for_target(target, 0.3, cfg)
    high = read_profile_for_target(target, 0.9, cfg)
    assert np.array_equal(low.profile.gamma_z, high.profile.gamma_z)
    assert abs(low.eta_r - high.eta_r) < 1e-12


def test_read_reproduces_a_narrow_band_target():
    grid = _grid(-40.0, 40.0, 5e-3)
    target = make_gaussian(0.2, 0.0, grid)
    result = read_profile_for_target(target, 1.0, cfg)
    assert not result.capped
    assert result.eta_r >= 0.999
    assert result.fidelity_vs_target >= 0.999
    assert abs(result.fidelity_vs_target - fidelity(result.xi_out, target)) < 1e-15


def test_time_bin_read_profile_has_a_larger_second_hump():
    spec = TimeBinSpec(alpha=1 / math.sqrt(2), beta=1 / math.sqrt(2), phi=0.0, t1=0.0, t2=20.0, sigma=0.2)
    grid = _grid(-40.0, 60.0, 5e-3)
    result = read_profile_for_target(make_time_bin(spec, grid), 1.0, cfg)
    middle = grid.index_of(10.0)
    gamma_z = result.profile.gamma_z
    assert gamma_z[middle:].max() > gamma_z[:middle].max()


def test_read_is_the_time_reverse_of_write():
    # a single symmetric Gaussian, its centre on a grid point
    grid = _grid(-40.0, 40.0, 5e-3)
    xi = make_gaussian(0.2, 0.0, grid)
    write = optimal_write_profile(xi, cfg)
    read = read_profile_for_target(xi, 1.0, cfg)
    running = np.cumsum(xi.intensity) * grid.dt
    bulk = (running > 0.01) & (running < 0.99)
    mirrored = read.profile.gamma_z[::-1]
    assert np.max(np.abs(write.profile.gamma_z[bulk] - mirrored[bulk])) < 1e-6


def test_dechirp_leaves_a_constant_phase():
    grid = _grid(-40.0, 40.0, 5e-3)
    target = make_gaussian(0.2, 0.0, grid)
    raw = read_profile_for_target(target, 1.0, cfg, phase_compensation=False)
    fixed = dechirp(raw.profile, raw.xi_out)
    strong = fixed.intensity > 1e-12 * fixed.intensity.max()
    assert np.max(np.abs(np.angle(fixed.samples[strong]) - math.pi / 2)) < 1e-9
    assert raw.fidelity_vs_target < 0.999
    assert abs(squared_norm(fixed) - squared_norm(raw.xi_out)) < 1e-12


def test_read_rejects_bad_population():
    grid = _grid(-10.0, 10.0, 1e-2)
    target = make_gaussian(1.0, 0.0, grid)
    with pytest.raises(EnvelopeError):
        read_profile_for_target(target, 0.0, cfg)
    with pytest.raises(EnvelopeError):
        read_profile_for_target(target, 1.5, cfg)


def test_total_efficiency():
    grid = _grid(-40.0, 40.0, 5e-3)
    xi = make_gaussian(0.2, 0.0, grid)
    write = optimal_write_profile(xi, cfg)
    read = read_profile_for_target(xi, write.eta_w, cfg)
    assert abs(total_efficiency(write, read) - write.eta_w * read.eta_r) < 1e-15
    stale = read_profile_for_target(xi, 0.5, cfg)
    with pytest.raises(ScenarioError):
        total_efficiency(write, stale)
