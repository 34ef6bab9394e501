import math

import numpy as np
import pytest

from halfcav.core import cumtrapz, integrate, squared_norm, support_window
from halfcav.errors import EnvelopeError, GridError, MemoryConfigError
from halfcav.memory_models import ComplexEnvelope, MemoryConfig, TimeGrid


def test_cumtrapz_constant():
    grid = TimeGrid(0.0, 1.0, 101)
    running = cumtrapz(np.ones(101), grid)
    assert running[0] == 0.0
    assert abs(running[-1] - 1.0) < 1e-12


def test_cumtrapz_decaying_exponential():
    grid = TimeGrid(0.0, 10.0, 40001)
    t = grid.times
    running = cumtrapz(np.exp(-t), grid)
    assert np.max(np.abs(running - (1 - np.exp(-t)))) < 1e-8


def test_cumtrapz_is_linear():
    grid = TimeGrid(-2.0, 3.0, 501)
    t = grid.times
    a, b = np.sin(t), np.exp(1j * t) * t ** 2
    combined = cumtrapz(2 * a + 3 * b, grid)
    separate = 2 * cumtrapz(a, grid) + 3 * cumtrapz(b, grid)
    assert np.max(np.abs(combined - separate)) < 1e-12


def test_cumtrapz_rejects_length_mismatch():
    with pytest.raises(GridError):
        cumtrapz(np.ones(10), TimeGrid(0.0, 1.0, 11))


def test_squared_norm_of_gaussian():
    grid = TimeGrid(-10.0, 10.0, 2001)
    t = grid.times
    envelope = ComplexEnvelope(grid=grid, samples=np.exp(-t ** 2 / 2) / math.pi ** 0.25)
    assert abs(squared_norm(envelope) - 1.0) < 1e-12
    assert abs(integrate(np.ones(grid.n), grid) - 20.0) < 1e-12


def test_squared_norm_ignores_a_global_phase():
    grid = TimeGrid(-10.0, 10.0, 2001)
    t = grid.times
    samples = np.exp(-t ** 2 / 2 + 0.3j * t)
    plain = squared_norm(ComplexEnvelope(grid=grid, samples=samples))
    for phase in (0.4, math.pi, -2.2):
        rotated = ComplexEnvelope(grid=grid, samples=np.exp(1j * phase) * samples)
        assert abs(squared_norm(rotated) - plain) < 1e-14


def test_support_window():
    values = np.array([0.0, 1e-20, 1e-3, 1.0, 1e-3, 0.0])
    assert support_window(values) == (2, 4)
    with pytest.raises(EnvelopeError):
        support_window(np.zeros(5))


def test_time_grid_validation():
    with pytest.raises(GridError):
        TimeGrid(0.0, 1.0, 1)
    with pytest.raises(GridError):
        TimeGrid(1.0, 1.0, 10)

    grid = TimeGrid.from_step(-1.0, 0.25, 9)
    assert abs(grid.t_end - 1.0) < 1e-15
    assert grid.index_of(0.0) == 4
    assert grid.index_of(100.0) == 8
    sub = grid.sub_grid(2, 6)
    assert sub.n == 5 and abs(sub.t_start + 0.5) < 1e-15 and abs(sub.dt - 0.25) < 1e-15


def test_normalized_flag_is_checked():
    grid = TimeGrid(0.0, 1.0, 11)
    with pytest.raises(EnvelopeError):
        ComplexEnvelope(grid=grid, samples=2 * np.ones(11), normalized=True)
    with pytest.raises(EnvelopeError):
        ComplexEnvelope(grid=grid, samples=np.full(11, np.nan))


def test_envelope_samples_are_read_only():
    grid = TimeGrid(0.0, 1.0, 11)
    envelope = ComplexEnvelope(grid=grid, samples=np.ones(11))
    with pytest.raises(ValueError):
        envelope.samples[0] = 5.0


def test_memory_config_rounds_tau_to_a_node():
    cfg = MemoryConfig(tau=0.01)
    period = 2 * math.pi / cfg.omega_a
    assert abs(cfg.tau - period) < 1e-15
    assert abs(cfg.tau_adjustment - (period - 0.01)) < 1e-15
    assert cfg.round_trip_phase == 0.0
    assert cfg.gamma_p == 1.0
    assert cfg.cap == 2.0


def test_memory_config_rejects_bad_constants():
    with pytest.raises(MemoryConfigError):
        MemoryConfig(tau=1.0)
    with pytest.raises(MemoryConfigError):
        MemoryConfig(gamma_prime=0.2, gamma_p=0.9)
    with pytest.raises(MemoryConfigError):
        MemoryConfig(gamma0=-1.0)
    # memory mode: part of the decay goes to free space
    cfg = MemoryConfig(gamma_prime=0.25)
    assert abs(cfg.gamma_p - 0.75) < 1e-15
