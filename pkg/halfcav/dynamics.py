"""Atom dynamics in front of the mirror.

Two independent evaluations of the excitation probability are kept side by
side: a closed-form quadrature of the amplitude equation and a fixed-step
RK4 integration of the Bloch equations, used as an oracle for the first.
"""
import logging
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid

from halfcav.core import cumtrapz, require_same_grid
from halfcav.errors import GridError, MemoryConfigError, OdeInstabilityError
from halfcav.memory_models import (
    ComplexEnvelope,
    DecayProfile,
    ExcitationTrace,
    MemoryConfig,
    MirrorTrajectory,
    TimeGrid,
)

logger = logging.getLogger(__name__)

HOLD_THRESHOLD = 1e-12
# largest growth of Re(Gamma) inside one quadrature block; keeps e^{+Re Gamma} finite
_BLOCK_SPAN = 300.0


def build_profile(grid: TimeGrid, gamma_complex: np.ndarray, cfg: MemoryConfig) -> DecayProfile:
    gamma_complex = np.asarray(gamma_complex, dtype=complex)
    if gamma_complex.shape != (grid.n,):
        raise GridError(f"rate series of shape {gamma_complex.shape} does not match grid with n={grid.n}")
    gamma_z = 2.0 * gamma_complex.real
    return DecayProfile(
        grid=grid,
        gamma_complex=gamma_complex,
        gamma_z=gamma_z,
        Gamma=cumtrapz(gamma_complex, grid),
        Gamma_z=cumtrapz(gamma_z, grid),
        g=np.sqrt(np.clip(gamma_z, 0.0, None)),
        cap=cfg.cap,
    )


def decay_from_mirror(trajectory: MirrorTrajectory, cfg: MemoryConfig) -> DecayProfile:
    """gamma = gamma'/2 + (gamma_p/2)(1 - e^{i theta}), theta = omega_a tau - 4 pi l / lambda."""
    theta = cfg.round_trip_phase - 4 * math.pi * trajectory.l
    gamma = cfg.gamma_prime / 2 + (cfg.gamma_p / 2) * (1 - np.exp(1j * theta))
    return build_profile(trajectory.grid, gamma, cfg)


def profile_from_gamma_z(gamma_z, grid: TimeGrid, cfg: MemoryConfig) -> DecayProfile:
    """Complex profile for a population decay rate, taking the branch l in [0, lambda/4].

    On that branch Im gamma = (1/2) sqrt((gamma_z - gamma')(2 gamma_p - gamma_z + gamma')) >= 0.
    """
    gamma_z = np.asarray(gamma_z, dtype=float)
    slack = 1e-9 * cfg.cap
    if gamma_z.size and (gamma_z.min() < -slack or gamma_z.max() > cfg.cap + slack):
        raise MemoryConfigError(
            f"gamma_z range [{gamma_z.min():.6g}, {gamma_z.max():.6g}] leaves [0, {cfg.cap}]"
        )
    gamma_z = np.clip(gamma_z, 0.0, cfg.cap)
    excess = gamma_z - cfg.gamma_prime
    imag = 0.5 * np.sqrt(np.clip(excess * (2 * cfg.gamma_p - excess), 0.0, None))
    return build_profile(grid, gamma_z / 2 + 1j * imag, cfg)


def combine_profiles(first: DecayProfile, second: DecayProfile, cfg: MemoryConfig) -> DecayProfile:
    """Profile whose rate is the sum of two profiles with disjoint support."""
    require_same_grid(first.grid, second.grid, "profiles")
    return build_profile(first.grid, first.gamma_complex + second.gamma_complex, cfg)


def restrict_profile(profile: DecayProfile, first: int, last: int, cfg: MemoryConfig) -> DecayProfile:
    """Samples first..last on their own grid; running integrals restart at zero."""
    return build_profile(profile.grid.sub_grid(first, last), profile.gamma_complex[first:last + 1], cfg)


def _block_edges(growth: np.ndarray):
    edges = [0]
    n = growth.size
    while edges[-1] < n - 1:
        start = edges[-1]
        stop = int(np.searchsorted(growth, growth[start] + _BLOCK_SPAN, side="right")) - 1
        edges.append(min(max(stop, start + 1), n - 1))
    return edges


def _driven_amplitude(Gamma: np.ndarray, drive: np.ndarray, dt: float) -> np.ndarray:
    """a(t) = integral_0^t e^{-(Gamma(t) - Gamma(t'))} drive(t') dt' by the trapezoid rule.

    The grid is cut into blocks over which Re(Gamma) grows by at most
    _BLOCK_SPAN; inside a block the integral is referenced to the block start
    and the amplitude at the block boundary is carried over.
    """
    amplitude = np.zeros(drive.size, dtype=complex)
    if drive.size < 2:
        return amplitude
    edges = _block_edges(Gamma.real)
    for start, stop in zip(edges[:-1], edges[1:]):
        relative = Gamma[start:stop + 1] - Gamma[start]
        weighted = np.exp(relative) * drive[start:stop + 1]
        running = cumulative_trapezoid(weighted, dx=dt, initial=0)
        amplitude[start:stop + 1] = np.exp(-relative) * (amplitude[start] + running)
    return amplitude


def absorption_probability(profile: DecayProfile, xi_in: ComplexEnvelope) -> ExcitationTrace:
    """P(t) = |e^{-Gamma(t)} integral e^{Gamma} g xi dt'|^2 for a fully ground-state start."""
    require_same_grid(profile.grid, xi_in.grid, "profile and input")
    amplitude = _driven_amplitude(profile.Gamma, profile.g * xi_in.samples, profile.grid.dt)
    return ExcitationTrace(grid=profile.grid, P=np.abs(amplitude) ** 2, amplitude=amplitude)


def _midpoints(values: np.ndarray) -> np.ndarray:
    """Cubic interpolation at the centre of each grid interval."""
    n = values.size
    if n < 4:
        return (values[:-1] + values[1:]) / 2
    mid = np.empty(n - 1, dtype=values.dtype)
    mid[1:n - 2] = (-values[:n - 3] + 9 * values[1:n - 2] + 9 * values[2:n - 1] - values[3:]) / 16
    mid[0] = (5 * values[0] + 15 * values[1] - 5 * values[2] + values[3]) / 16
    mid[n - 2] = (values[n - 4] - 5 * values[n - 3] + 15 * values[n - 2] + 5 * values[n - 1]) / 16
    return mid


def _bloch_rhs(gamma, gamma_z, drive, s1, s2, s3):
    """ds/dt = M s + b with

        M = [[-gamma_z, -2 g xi, -2 g xi*],      b = [-gamma_z,
             [0,        -gamma*,  0      ],           -g xi*,
             [0,         0,      -gamma  ]]           -g xi]

    and drive = g xi.
    """
    drive_c = drive.conjugate()
    return (
        -gamma_z * s1 - 2 * drive * s2 - 2 * drive_c * s3 - gamma_z,
        -gamma.conjugate() * s2 - drive_c,
        -gamma * s3 - drive,
    )


def bloch_ode_oracle(profile: DecayProfile, xi_in: ComplexEnvelope) -> ExcitationTrace:
    """RK4 integration of the Bloch vector from (-1, 0, 0); P = (1 + Re s1) / 2."""
    require_same_grid(profile.grid, xi_in.grid, "profile and input")
    grid = profile.grid
    dt = grid.dt
    drive = profile.g * xi_in.samples
    gamma = profile.gamma_complex
    gamma_z = profile.gamma_z.astype(complex)

    nodes = [(complex(a), complex(b), complex(c)) for a, b, c in zip(gamma, gamma_z, drive)]
    mids = [
        (complex(a), complex(b), complex(c))
        for a, b, c in zip(_midpoints(gamma), _midpoints(gamma_z), _midpoints(drive))
    ]

    P = np.empty(grid.n)
    amplitude = np.empty(grid.n, dtype=complex)
    s1, s2, s3 = -1.0 + 0j, 0j, 0j
    P[0], amplitude[0] = 0.0, 0j
    half = dt / 2
    limit = 1.0 + 1e-6
    for k in range(grid.n - 1):
        c0, cm, c1 = nodes[k], mids[k], nodes[k + 1]
        a1, a2, a3 = _bloch_rhs(*c0, s1, s2, s3)
        b1, b2, b3 = _bloch_rhs(*cm, s1 + half * a1, s2 + half * a2, s3 + half * a3)
        d1, d2, d3 = _bloch_rhs(*cm, s1 + half * b1, s2 + half * b2, s3 + half * b3)
        e1, e2, e3 = _bloch_rhs(*c1, s1 + dt * d1, s2 + dt * d2, s3 + dt * d3)
        s1 += dt / 6 * (a1 + 2 * b1 + 2 * d1 + e1)
        s2 += dt / 6 * (a2 + 2 * b2 + 2 * d2 + e2)
        s3 += dt / 6 * (a3 + 2 * b3 + 2 * d3 + e3)
        if abs(s1) > limit:
            raise OdeInstabilityError(
                f"|s1| = {abs(s1):.9f} at t = {grid.t_start + (k + 1) * dt:.6g}; refine the grid (dt = {dt:.3g})"
            )
        P[k + 1] = (1 + s1.real) / 2
        amplitude[k + 1] = -s3
    return ExcitationTrace(grid=grid, P=P, amplitude=amplitude)


def hold(profile: DecayProfile, t_a: float, t_b: float) -> bool:
    """True when gamma_z vanishes on [t_a, t_b]: the mirror sits at a node."""
    grid = profile.grid
    if not t_b >= t_a:
        raise GridError(f"hold window end {t_b} precedes its start {t_a}")
    if not grid.contains(t_a, t_b):
        raise GridError(f"hold window [{t_a}, {t_b}] leaves the grid [{grid.t_start}, {grid.t_end}]")
    window = profile.gamma_z[grid.index_of(t_a):grid.index_of(t_b) + 1]
    return bool(np.all(window < HOLD_THRESHOLD))


def storage_survival(cfg: MemoryConfig, duration: float) -> float:
    """Fraction of excitation left after holding for duration with the atom's free-space channel open."""
    if duration < 0:
        raise GridError(f"storage duration must be non-negative, got {duration}")
    return math.exp(-cfg.gamma_prime * duration)


def compensated_input(profile: DecayProfile, xi_in: ComplexEnvelope) -> ComplexEnvelope:
    """xi e^{-i Im Gamma}: the input pre-chirped against the phase the moving mirror imprints on absorption."""
    require_same_grid(profile.grid, xi_in.grid, "profile and input")
    samples = xi_in.samples * np.exp(-1j * profile.Gamma.imag)
    return ComplexEnvelope(grid=xi_in.grid, samples=samples, carrier_phase=xi_in.carrier_phase)
