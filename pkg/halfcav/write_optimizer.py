"""Decay profiles that absorb a known single-photon pulse."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from halfcav.core import cumtrapz, integrate, squared_norm, support_window
from halfcav.dynamics import absorption_probability, compensated_input, profile_from_gamma_z
from halfcav.errors import EnvelopeError, OptimizationError
from halfcav.memory_models import ComplexEnvelope, DecayProfile, MemoryConfig, TimeGrid, WriteResult

logger = logging.getLogger(__name__)

# target efficiencies live in [0, X_MAX]; x = 1 itself makes the write rate singular
X_MAX = 1.0 - 1e-9
NORM_SLACK = 1e-6


@dataclass(frozen=True)
class TargetChoice:
    x: float
    achieved: float
    capped_edge: Optional[float]
    iterations: int


def select_target(
    peak: Callable[[float], float],
    achieved: Callable[[float], float],
    cap: float,
    max_iterations: int = 200,
) -> TargetChoice:
    """Pick the target x of a capped rate family.

    Without capping the family reaches exactly x, so x -> X_MAX is optimal.
    Otherwise bisect for the edge x_c where the peak rate first touches the
    cap, then maximize the achieved efficiency on [x_c, X_MAX].
    """
    if peak(X_MAX) <= cap:
        return TargetChoice(x=X_MAX, achieved=achieved(X_MAX), capped_edge=None, iterations=1)

    edge, info = bisect(
        lambda x: peak(x) - cap, 0.0, X_MAX, xtol=1e-13, maxiter=max_iterations, full_output=True, disp=False
    )
    if not info.converged:
        raise OptimizationError(
            f"cap edge search did not converge in {info.iterations} steps; last estimate {edge}, bracket [0, {X_MAX}]"
        )

    found = minimize_scalar(
        lambda x: -achieved(x),
        bounds=(edge, X_MAX),
        method="bounded",
        options={"xatol": 1e-10, "maxiter": max_iterations},
    )
    candidates = [(edge, achieved(edge)), (float(found.x), -float(found.fun)), (X_MAX, achieved(X_MAX))]
    x, value = max(candidates, key=lambda item: item[1])
    return TargetChoice(x=x, achieved=value, capped_edge=edge, iterations=info.iterations + found.nfev + 2)


def _check_normalized(xi_in: ComplexEnvelope) -> None:
    norm = squared_norm(xi_in)
    if abs(norm - 1.0) > NORM_SLACK:
        raise EnvelopeError(f"input pulse must be normalized, squared norm is {norm:.9f}")


class _WriteWindow:
    """The input restricted to its support, where the write rate is non-zero."""

    def __init__(self, xi_in: ComplexEnvelope, cfg: MemoryConfig, phase_compensation: bool):
        self.first, self.last = support_window(xi_in.intensity)
        self.grid = xi_in.grid.sub_grid(self.first, self.last)
        self.samples = np.asarray(xi_in.samples[self.first:self.last + 1])
        self.intensity = np.abs(self.samples) ** 2
        self.running = cumtrapz(self.intensity, self.grid)
        self.cfg = cfg
        self.phase_compensation = phase_compensation

    def rate(self, x: float) -> np.ndarray:
        return np.minimum(x * self.intensity / ((1 - x) + x * self.running), self.cfg.cap)

    def peak(self, x: float) -> float:
        return float(np.max(x * self.intensity / ((1 - x) + x * self.running)))

    def achieved(self, x: float) -> float:
        return absorbed_fraction(self.rate(x), self.grid, self.samples, self.cfg, self.phase_compensation)


def absorbed_fraction(
    gamma_z: np.ndarray, grid: TimeGrid, samples: np.ndarray, cfg: MemoryConfig, phase_compensation: bool
) -> float:
    """P at the end of a window driven by samples under the rate gamma_z."""
    profile = profile_from_gamma_z(gamma_z, grid, cfg)
    envelope = ComplexEnvelope(grid=grid, samples=samples)
    if phase_compensation:
        envelope = compensated_input(profile, envelope)
    return float(absorption_probability(profile, envelope).P[-1])


def optimal_write_profile(
    xi_in: ComplexEnvelope,
    cfg: MemoryConfig,
    phase_compensation: bool = True,
    max_iterations: int = 200,
) -> WriteResult:
    """gamma_z_w(t) = min(x |xi|^2 / ((1 - x) + x I(t)), 2 gamma0) with the best reachable x."""
    _check_normalized(xi_in)
    window = _WriteWindow(xi_in, cfg, phase_compensation)
    choice = select_target(window.peak, window.achieved, cfg.cap, max_iterations)

    gamma_z = np.zeros(xi_in.grid.n)
    gamma_z[window.first:window.last + 1] = window.rate(choice.x)
    profile = profile_from_gamma_z(gamma_z, xi_in.grid, cfg)
    xi_effective = compensated_input(profile, xi_in) if phase_compensation else xi_in
    trace = absorption_probability(profile, xi_effective)
    times = xi_in.grid.times
    t_w0 = float(times[window.last])
    eta_w = trace.at(t_w0)
    capped = bool(gamma_z.max() >= cfg.cap - 1e-12)

    logger.info(
        f"write profile: x={choice.x:.12f}, eta_w={eta_w:.9f}, capped={capped}, iterations={choice.iterations}"
    )
    return WriteResult(
        profile=profile,
        eta_w=eta_w,
        trace=trace,
        capped=capped,
        iterations=choice.iterations,
        target=choice.x,
        t_w=float(times[window.first]),
        t_w0=t_w0,
        xi_effective=xi_effective,
    )


def write_efficiency(profile: DecayProfile) -> float:
    """1 - e^{-Gamma_z} at the end of the profile: the best any input can do."""
    return float(-np.expm1(-profile.Gamma_z[-1]))


def optimal_input_for_profile(profile: DecayProfile, eta_w: float) -> ComplexEnvelope:
    """Pulse absorbed with efficiency eta_w by a given profile.

    |xi(t)| = g(t) e^{-(Gamma_z(end) - Gamma_z(t)) / 2} / sqrt(eta_w) with phase -Im Gamma(t),
    renormalized on the grid.
    """
    total = float(profile.Gamma_z[-1])
    ceiling = -math.expm1(-total)
    if not (0.0 < eta_w <= ceiling + 1e-12):
        raise OptimizationError(f"eta_w = {eta_w} is not reachable; this profile allows (0, {ceiling:.9g}]")
    magnitude = profile.g * np.exp(-(total - profile.Gamma_z) / 2) / math.sqrt(eta_w)
    samples = magnitude * np.exp(-1j * profile.Gamma.imag)
    norm = float(integrate(np.abs(samples) ** 2, profile.grid))
    return ComplexEnvelope(grid=profile.grid, samples=samples / math.sqrt(norm), normalized=True)


def piecewise_profile_search(
    xi_in: ComplexEnvelope,
    cfg: MemoryConfig,
    segments: int = 8,
    levels: int = 17,
    sweeps: int = 3,
    seed: int = 0,
    phase_compensation: bool = True,
) -> Tuple[float, np.ndarray]:
    """Brute-force baseline: best piecewise-constant gamma_z over the input support.

    Coordinate sweeps over a lattice of levels in [0, cap], then a bounded
    refinement of each segment. Returns (efficiency, segment levels).
    """
    _check_normalized(xi_in)
    window = _WriteWindow(xi_in, cfg, phase_compensation)
    bounds = np.linspace(0, window.grid.n, segments + 1).astype(int)
    lattice = np.linspace(0.0, cfg.cap, levels)
    rng = np.random.default_rng(seed)
    values = rng.choice(lattice, size=segments)

    def evaluate(candidate: np.ndarray) -> float:
        gamma_z = np.repeat(candidate, np.diff(bounds))
        return absorbed_fraction(gamma_z, window.grid, window.samples, cfg, phase_compensation)

    best = evaluate(values)
    for _ in range(sweeps):
        for segment in rng.permutation(segments):
            for level in lattice:
                trial = values.copy()
                trial[segment] = level
                score = evaluate(trial)
                if score > best:
                    best, values = score, trial

    step = lattice[1] - lattice[0]
    for segment in range(segments):
        def negative(level, segment=segment):
            trial = values.copy()
            trial[segment] = level
            return -evaluate(trial)

        low, high = max(0.0, values[segment] - step), min(cfg.cap, values[segment] + step)
        found = minimize_scalar(negative, bounds=(low, high), method="bounded", options={"xatol": 1e-6})
        if -found.fun > best:
            best = -float(found.fun)
            values = values.copy()
            values[segment] = found.x

    logger.info(f"piecewise search: {segments} segments, eta_w={best:.9f}")
    return best, values
