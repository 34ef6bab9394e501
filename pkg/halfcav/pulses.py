"""Input pulse families and comparisons between envelopes."""
import logging
import math

import numpy as np

from halfcav.core import inner_product, require_same_grid, squared_norm
from halfcav.errors import EnvelopeError, GridError
from halfcav.memory_models import ComplexEnvelope, TimeBinSpec, TimeGrid

logger = logging.getLogger(__name__)

# Gaussian tails beyond this many 1/sigma are below e^-18 in amplitude
GAUSSIAN_HALF_WIDTH = 6.0


def _normalized(grid: TimeGrid, samples: np.ndarray) -> ComplexEnvelope:
    raw = ComplexEnvelope(grid=grid, samples=samples)
    norm = squared_norm(raw)
    if norm <= 0:
        raise EnvelopeError("pulse vanishes on this grid")
    return ComplexEnvelope(grid=grid, samples=raw.samples / math.sqrt(norm), normalized=True)


def _gaussian(times: np.ndarray, center: float, sigma: float) -> np.ndarray:
    return np.exp(-((times - center) ** 2) * sigma ** 2 / 2)


def _two_bins(times, alpha, beta, phi, t1, t2, sigma) -> np.ndarray:
    return alpha * _gaussian(times, t1, sigma) + beta * np.exp(1j * phi) * _gaussian(times, t2, sigma)


def make_time_bin(spec: TimeBinSpec, grid: TimeGrid) -> ComplexEnvelope:
    """alpha |early> + beta e^{i phi} |late>, normalized numerically on the grid."""
    need_from = spec.t1 - GAUSSIAN_HALF_WIDTH / spec.sigma
    need_to = spec.t2 + GAUSSIAN_HALF_WIDTH / spec.sigma
    if not grid.contains(need_from, need_to):
        raise GridError(
            f"grid [{grid.t_start}, {grid.t_end}] too narrow for the time-bin pulse; "
            f"need [{need_from}, {need_to}]"
        )
    samples = _two_bins(grid.times, spec.alpha, spec.beta, spec.phi, spec.t1, spec.t2, spec.sigma)
    return _normalized(grid, samples)


def make_gaussian(sigma: float, t0: float, grid: TimeGrid) -> ComplexEnvelope:
    if sigma <= 0:
        raise EnvelopeError(f"sigma must be positive, got {sigma}")
    need_from, need_to = t0 - GAUSSIAN_HALF_WIDTH / sigma, t0 + GAUSSIAN_HALF_WIDTH / sigma
    if not grid.contains(need_from, need_to):
        raise GridError(
            f"grid [{grid.t_start}, {grid.t_end}] too narrow for a Gaussian; need [{need_from}, {need_to}]"
        )
    samples = _two_bins(grid.times, 1.0, 0.0, 0.0, t0, t0, sigma)
    return _normalized(grid, samples)


def make_rectangular(t_on: float, duration: float, grid: TimeGrid) -> ComplexEnvelope:
    if duration <= 0:
        raise EnvelopeError(f"duration must be positive, got {duration}")
    times = grid.times
    slack = 1e-9 * grid.dt
    samples = ((times >= t_on - slack) & (times <= t_on + duration + slack)).astype(complex)
    return _normalized(grid, samples)


def make_rising_exponential(rate: float, t_end: float, grid: TimeGrid) -> ComplexEnvelope:
    """sqrt(rate) e^{rate (t - t_end) / 2} up to t_end, zero after.

    Unit norm only on (-inf, t_end]; the grid truncation is left as is.
    """
    if rate <= 0:
        raise EnvelopeError(f"rate must be positive, got {rate}")
    times = grid.times
    exponent = np.minimum(rate * (times - t_end) / 2, 0.0)
    samples = np.where(times <= t_end + 1e-9 * grid.dt, math.sqrt(rate) * np.exp(exponent), 0.0)
    return ComplexEnvelope(grid=grid, samples=samples)


def fidelity(a: ComplexEnvelope, b: ComplexEnvelope) -> float:
    """|<a, b>|^2 / (|a|^2 |b|^2), global phase insensitive."""
    require_same_grid(a.grid, b.grid, "envelopes")
    norm_a, norm_b = squared_norm(a), squared_norm(b)
    if norm_a <= 0 or norm_b <= 0:
        raise EnvelopeError("fidelity is undefined for a zero-norm envelope")
    value = abs(inner_product(a, b)) ** 2 / (norm_a * norm_b)
    return float(min(max(value, 0.0), 1.0))


def best_phase_distance(a: ComplexEnvelope, b: ComplexEnvelope) -> float:
    """min over phi of the L2 distance between a and e^{i phi} b."""
    require_same_grid(a.grid, b.grid, "envelopes")
    squared = squared_norm(a) + squared_norm(b) - 2 * abs(inner_product(a, b))
    return math.sqrt(max(squared, 0.0))


def shift(envelope: ComplexEnvelope, delay: float) -> ComplexEnvelope:
    """xi(t - delay) on the same grid, zero where the source is off the grid."""
    grid = envelope.grid
    dt = grid.dt
    samples = envelope.samples
    steps = delay / dt
    whole = int(round(steps))

    n = grid.n
    if abs(steps - whole) < 1e-9:
        moved = np.zeros(n, dtype=complex)
        lost_mask = np.zeros(n, dtype=bool)
        if whole >= 0:
            keep = max(n - whole, 0)
            moved[n - keep:] = samples[:keep]
            lost_mask[keep:] = True
        else:
            keep = max(n + whole, 0)
            moved[:keep] = samples[n - keep:]
            lost_mask[:n - keep] = True
    else:
        # band-limited shift: linear phase ramp on a zero-padded spectrum, unitary on the padded grid
        size = 2 * n
        ramp = np.exp(-2j * np.pi * np.fft.fftfreq(size) * steps)
        moved = np.fft.ifft(np.fft.fft(samples, size) * ramp)[:n]
        landing = grid.times + delay
        lost_mask = (landing < grid.t_start) | (landing > grid.t_end)

    # norm of the part of the source that lands outside the grid
    total = squared_norm(envelope)
    lost = float(np.sum(np.abs(samples[lost_mask]) ** 2) * dt)
    if lost > 1e-9 * max(total, 1e-300):
        raise GridError(
            f"shift by {delay} clips the pulse support: {lost / total:.3g} of the norm leaves the grid"
        )
    logger.debug(f"shifted envelope by {delay} ({steps:.3f} samples)")
    return ComplexEnvelope(grid=grid, samples=moved, carrier_phase=envelope.carrier_phase)


def fwhm(spec: TimeBinSpec) -> float:
    """2 sqrt(2 ln 2) sigma: spectral full width at half maximum of one bin, in units of gamma0."""
    return 2 * math.sqrt(2 * math.log(2)) * spec.sigma


def time_bin_overlap(a: TimeBinSpec, b: TimeBinSpec) -> complex:
    """Closed-form <a, b> for two time-bin qubits sharing t1, t2 and sigma."""
    if (a.t1, a.t2, a.sigma) != (b.t1, b.t2, b.sigma):
        raise EnvelopeError("closed-form overlap needs equal t1, t2 and sigma")
    bin_overlap = math.exp(-((a.t2 - a.t1) * a.sigma) ** 2 / 4)

    def norm_factor(s: TimeBinSpec) -> float:
        return 1.0 / (s.alpha ** 2 + s.beta ** 2 + 2 * s.alpha * s.beta * math.cos(s.phi) * bin_overlap)

    cross = (
        a.alpha * b.alpha
        + a.beta * b.beta * np.exp(1j * (b.phi - a.phi))
        + (a.alpha * b.beta * np.exp(1j * b.phi) + a.beta * b.alpha * np.exp(-1j * a.phi)) * bin_overlap
    )
    return complex(math.sqrt(norm_factor(a) * norm_factor(b)) * cross)
