import logging
import math

import numpy as np

from halfcav.dynamics import decay_from_mirror
from halfcav.errors import MirrorConversionError
from halfcav.memory_models import DecayProfile, FeasibilityReport, MemoryConfig, MirrorTrajectory

logger = logging.getLogger(__name__)

DEFAULT_WAVELENGTH_M = 493e-9
DEFAULT_GAMMA0_PER_S = 2 * math.pi * 15e6
# a quarter wavelength per radiative lifetime
DEMANDING_SPEED = 0.25


def trajectory_from_decay(profile: DecayProfile, cfg: MemoryConfig) -> MirrorTrajectory:
    """l / lambda = arccos(1 - gamma_z / gamma_p) / (4 pi) on the branch l in [0, lambda/4]."""
    if cfg.gamma_prime > 0:
        raise MirrorConversionError(
            f"mirror mapping needs gamma_prime = 0; with gamma_prime = {cfg.gamma_prime} "
            "gamma_z cannot reach zero and no node exists"
        )
    gamma_z = profile.gamma_z
    slack = 1e-9 * cfg.cap
    if gamma_z.min() < -slack or gamma_z.max() > cfg.cap + slack:
        raise MirrorConversionError(
            f"gamma_z range [{gamma_z.min():.6g}, {gamma_z.max():.6g}] leaves [0, {cfg.cap}]"
        )
    cosine = np.clip(1.0 - np.clip(gamma_z, 0.0, cfg.cap) / cfg.gamma_p, -1.0, 1.0)
    l = np.arccos(cosine) / (4 * math.pi)
    velocity = np.gradient(l, profile.grid.dt) if profile.grid.n > 1 else np.zeros_like(l)
    return MirrorTrajectory(grid=profile.grid, l=l, velocity=velocity)


def decay_from_trajectory(trajectory: MirrorTrajectory, cfg: MemoryConfig) -> DecayProfile:
    return decay_from_mirror(trajectory, cfg)


def feasibility_report(
    trajectory: MirrorTrajectory,
    cfg: MemoryConfig,
    wavelength_m: float = DEFAULT_WAVELENGTH_M,
    gamma0_per_s: float = DEFAULT_GAMMA0_PER_S,
) -> FeasibilityReport:
    """Peak mirror speed, in lambda * gamma0 and in m/s.

    Flagged demanding when the mirror would cover more than a quarter
    wavelength within one radiative lifetime.
    """
    v_max = trajectory.v_max / cfg.gamma0
    report = FeasibilityReport(
        v_max=v_max,
        v_max_si=v_max * wavelength_m * gamma0_per_s,
        wavelength_si=wavelength_m,
        gamma0_si=gamma0_per_s,
        demanding=v_max > DEMANDING_SPEED * (1 + 1e-9),
    )
    if report.demanding:
        logger.warning(f"mirror trajectory is demanding: v_max = {v_max:.4g} lambda*gamma0 ({report.v_max_si:.4g} m/s)")
    else:
        logger.info(f"mirror v_max = {v_max:.4g} lambda*gamma0 ({report.v_max_si:.4g} m/s)")
    return report
