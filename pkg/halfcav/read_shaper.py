"""Release of a stored excitation into a chosen output mode."""
import logging
import math
from typing import Optional

import numpy as np

from halfcav.core import cumtrapz, integrate, squared_norm, support_window
from halfcav.dynamics import profile_from_gamma_z
from halfcav.errors import EnvelopeError, ScenarioError
from halfcav.memory_models import ComplexEnvelope, DecayProfile, MemoryConfig, ReadResult, TimeGrid, WriteResult
from halfcav.pulses import fidelity
from halfcav.write_optimizer import select_target

logger = logging.getLogger(__name__)


def output_envelope(
    profile: DecayProfile,
    P0: float,
    cfg: MemoryConfig,
    observation_delay: Optional[float] = None,
) -> ComplexEnvelope:
    """xi_out = i sqrt(2 P0 / gamma0) gamma_r(t) e^{-Gamma_r(t)}.

    observation_delay is D / c, the travel time to the observer; it only sets
    the constant carrier phase omega_a (D / c - tau / 2) kept as metadata.
    """
    if observation_delay is None:
        observation_delay = cfg.tau / 2
    samples = 1j * math.sqrt(2 * P0 / cfg.gamma0) * profile.gamma_complex * np.exp(-profile.Gamma)
    carrier = math.remainder(cfg.omega_a * (observation_delay - cfg.tau / 2), 2 * math.pi)
    return ComplexEnvelope(grid=profile.grid, samples=samples, carrier_phase=carrier)


def dechirp(profile: DecayProfile, xi_out: ComplexEnvelope) -> ComplexEnvelope:
    """Strip the phase arg(gamma_r) - Im Gamma_r the mirror writes onto the output."""
    phase = np.where(np.abs(profile.gamma_complex) > 0, np.angle(profile.gamma_complex), 0.0)
    samples = xi_out.samples * np.exp(-1j * (phase - profile.Gamma.imag))
    return ComplexEnvelope(grid=xi_out.grid, samples=samples, carrier_phase=xi_out.carrier_phase)


def read_efficiency(profile: DecayProfile) -> float:
    return float(-np.expm1(-profile.Gamma_z[-1]))


def _check_population(P0: float) -> None:
    if not (0.0 < P0 <= 1.0):
        raise EnvelopeError(f"stored population must lie in (0, 1], got {P0}")


def read_profile_for_target(
    target: ComplexEnvelope,
    P0: float,
    cfg: MemoryConfig,
    phase_compensation: bool = True,
    max_iterations: int = 200,
    observation_delay: Optional[float] = None,
) -> ReadResult:
    """gamma_z_r(t) = min(x f_t / (1 - x I_t(t)), 2 gamma0) from the start of the target's support.

    f_t is the target intensity normalized to unit area and I_t its running
    integral; the read efficiency does not depend on P0.
    """
    _check_population(P0)
    norm = squared_norm(target)
    if norm <= 0:
        raise EnvelopeError("target envelope has zero norm")
    intensity = target.intensity / norm
    first, _ = support_window(intensity)
    grid = target.grid
    window = grid.sub_grid(first, grid.n - 1)
    shape = intensity[first:]
    running = cumtrapz(shape, window)

    def rate(x: float) -> np.ndarray:
        return np.minimum(x * shape / (1 - x * running), cfg.cap)

    def peak(x: float) -> float:
        return float(np.max(x * shape / (1 - x * running)))

    def achieved(x: float) -> float:
        return -math.expm1(-float(integrate(rate(x), window)))

    choice = select_target(peak, achieved, cfg.cap, max_iterations)

    gamma_z = np.zeros(grid.n)
    gamma_z[first:] = rate(choice.x)
    profile = profile_from_gamma_z(gamma_z, grid, cfg)
    xi_out = output_envelope(profile, P0, cfg, observation_delay)
    if phase_compensation:
        xi_out = dechirp(profile, xi_out)
    eta_r = squared_norm(xi_out) / P0
    capped = bool(gamma_z.max() >= cfg.cap - 1e-12)
    match = fidelity(xi_out, target)

    logger.info(
        f"read profile: x={choice.x:.12f}, eta_r={eta_r:.9f}, F={match:.9f}, capped={capped}, "
        f"iterations={choice.iterations}"
    )
    return ReadResult(
        profile=profile,
        eta_r=eta_r,
        xi_out=xi_out,
        fidelity_vs_target=match,
        capped=capped,
        iterations=choice.iterations,
        P0=P0,
        t_r0=float(grid.times[first]),
        target=target,
    )


def free_decay_read(
    P0: float,
    cfg: MemoryConfig,
    t_r0: float = 0.0,
    dt: float = 1e-3,
    residual: float = 1e-6,
) -> ReadResult:
    """Unshaped release: the mirror jumps to the antinode and stays there.

    The grid runs until the remaining population falls below residual * P0.
    """
    _check_population(P0)
    duration = math.log(1.0 / residual) / cfg.cap
    grid = TimeGrid.from_step(t_r0, dt, int(math.ceil(duration / dt)) + 1)
    profile = profile_from_gamma_z(np.full(grid.n, cfg.cap), grid, cfg)
    xi_out = output_envelope(profile, P0, cfg)
    eta_r = squared_norm(xi_out) / P0
    logger.info(f"free decay read: eta_r={eta_r:.9f} over {grid.n} samples")
    return ReadResult(
        profile=profile,
        eta_r=eta_r,
        xi_out=xi_out,
        fidelity_vs_target=None,
        capped=True,
        iterations=0,
        P0=P0,
        t_r0=t_r0,
    )


def total_efficiency(write: WriteResult, read: ReadResult, survival: float = 1.0) -> float:
    """eta_w * survival * eta_r; survival is the storage loss e^{-gamma' T}."""
    stored = write.eta_w * survival
    if abs(read.P0 - stored) > 1e-12:
        raise ScenarioError(f"read started from P0={read.P0} but the write left {stored} after storage")
    return stored * read.eta_r
