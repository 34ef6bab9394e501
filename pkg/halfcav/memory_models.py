import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from halfcav.errors import EnvelopeError, GridError, MemoryConfigError

NORM_TOLERANCE = 1e-9


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class MemoryConfig:
    """Atom-mirror constants in units where gamma0 = 1 and lengths are in wavelengths.

    tau is rounded to the nearest value with omega_a * tau a multiple of 2*pi;
    the signed change is kept in tau_adjustment.
    """
    gamma0: float = 1.0
    gamma_prime: float = 0.0
    gamma_p: Optional[float] = None
    omega_a: float = 500.0
    tau: float = 0.01
    markov_limit: float = 0.1
    tau_adjustment: float = field(default=0.0, init=False)

    def __post_init__(self):
        if self.gamma0 <= 0:
            raise MemoryConfigError(f"gamma0 must be positive, got {self.gamma0}")
        if self.gamma_prime < 0:
            raise MemoryConfigError(f"gamma_prime must be non-negative, got {self.gamma_prime}")
        if self.omega_a <= 0:
            raise MemoryConfigError(f"omega_a must be positive, got {self.omega_a}")
        if self.tau < 0:
            raise MemoryConfigError(f"tau must be non-negative, got {self.tau}")

        gamma_p = self.gamma0 - self.gamma_prime if self.gamma_p is None else self.gamma_p
        if gamma_p < 0 or abs(self.gamma_prime + gamma_p - self.gamma0) > 1e-12 * max(1.0, self.gamma0):
            raise MemoryConfigError(
                f"gamma_prime + gamma_p must equal gamma0: {self.gamma_prime} + {gamma_p} != {self.gamma0}"
            )
        object.__setattr__(self, "gamma_p", gamma_p)

        period = 2 * math.pi / self.omega_a
        commensurate = round(self.tau / period) * period
        object.__setattr__(self, "tau_adjustment", commensurate - self.tau)
        object.__setattr__(self, "tau", commensurate)

        if self.gamma0 * self.tau > self.markov_limit:
            raise MemoryConfigError(
                f"gamma0 * tau = {self.gamma0 * self.tau:.4g} exceeds the Markov limit {self.markov_limit}"
            )

    @property
    def cap(self) -> float:
        # largest decay rate the mirror can reach (antinode)
        return 2.0 * self.gamma0

    @property
    def round_trip_phase(self) -> float:
        # omega_a * tau reduced mod 2*pi; zero up to rounding after the constructor
        residue = math.remainder(self.omega_a * self.tau, 2 * math.pi)
        return 0.0 if abs(residue) < 1e-9 else residue


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise GridError(f"grid needs at least 2 points, got n={self.n}")
        if not self.t_end > self.t_start:
            raise GridError(f"grid end {self.t_end} must exceed start {self.t_start}")

    @classmethod
    def from_step(cls, t_start: float, dt: float, n: int) -> "TimeGrid":
        return cls(t_start=t_start, t_end=t_start + (n - 1) * dt, n=n)

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / (self.n - 1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n)

    def index_of(self, t: float) -> int:
        """Nearest sample index, clamped to the grid."""
        k = int(round((t - self.t_start) / self.dt))
        return min(max(k, 0), self.n - 1)

    def contains(self, t_a: float, t_b: float) -> bool:
        slack = 1e-9 * self.dt
        return self.t_start - slack <= t_a and t_b <= self.t_end + slack

    def sub_grid(self, first: int, last: int) -> "TimeGrid":
        """Grid covering samples first..last inclusive."""
        return TimeGrid.from_step(self.t_start + first * self.dt, self.dt, last - first + 1)

    def same_as(self, other: "TimeGrid") -> bool:
        scale = max(1.0, abs(self.t_start), abs(self.t_end))
        return (
            self.n == other.n
            and abs(self.t_start - other.t_start) <= 1e-12 * scale
            and abs(self.t_end - other.t_end) <= 1e-12 * scale
        )


@dataclass(frozen=True)
class ComplexEnvelope:
    """Slowly varying photon amplitude on a grid. |samples|^2 is a rate."""
    grid: TimeGrid
    samples: np.ndarray
    normalized: bool = False
    carrier_phase: float = 0.0

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex)
        if samples.shape != (self.grid.n,):
            raise GridError(f"envelope has {samples.shape} samples for a grid of {self.grid.n}")
        if not np.all(np.isfinite(samples)):
            raise EnvelopeError("envelope contains non-finite samples")
        if self.normalized:
            norm = trapezoid(np.abs(samples) ** 2, dx=self.grid.dt)
            if abs(norm - 1.0) > NORM_TOLERANCE:
                raise EnvelopeError(f"envelope flagged normalized but has squared norm {norm:.12f}")
        object.__setattr__(self, "samples", _frozen(samples))

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2


@dataclass(frozen=True)
class DecayProfile:
    """Complex decay rate gamma(t) with its running integrals.

    gamma_z = 2 Re gamma is the population decay rate, g = sqrt(gamma_z) the
    coupling, Gamma and Gamma_z the cumulative trapezoid integrals from grid start.
    """
    grid: TimeGrid
    gamma_complex: np.ndarray
    gamma_z: np.ndarray
    Gamma: np.ndarray
    Gamma_z: np.ndarray
    g: np.ndarray
    cap: float

    def __post_init__(self):
        for name in ("gamma_complex", "gamma_z", "Gamma", "Gamma_z", "g"):
            values = getattr(self, name)
            if values.shape != (self.grid.n,):
                raise GridError(f"{name} has shape {values.shape}, grid has {self.grid.n} points")
            object.__setattr__(self, name, _frozen(values))
        slack = 1e-9 * self.cap
        if self.gamma_z.min() < -slack or self.gamma_z.max() > self.cap + slack:
            raise MemoryConfigError(
                f"gamma_z range [{self.gamma_z.min():.6g}, {self.gamma_z.max():.6g}] leaves [0, {self.cap}]"
            )


@dataclass(frozen=True)
class ExcitationTrace:
    grid: TimeGrid
    P: np.ndarray
    amplitude: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.P.shape != (self.grid.n,):
            raise GridError(f"trace has {self.P.shape} points for a grid of {self.grid.n}")
        if self.P.min() < -1e-9 or self.P.max() > 1.0 + 1e-6:
            raise EnvelopeError(
                f"excitation probability range [{self.P.min():.3g}, {self.P.max():.9f}] leaves [0, 1]; "
                "is the input norm above 1?"
            )
        object.__setattr__(self, "P", _frozen(self.P))
        if self.amplitude is not None:
            object.__setattr__(self, "amplitude", _frozen(self.amplitude))

    def at(self, t: float) -> float:
        return float(self.P[self.grid.index_of(t)])


@dataclass(frozen=True)
class MirrorTrajectory:
    """Mirror displacement in wavelengths, l in [0, 1/4]; velocity in wavelengths * gamma0."""
    grid: TimeGrid
    l: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        if self.l.min() < -1e-12 or self.l.max() > 0.25 + 1e-12:
            raise GridError(f"displacement range [{self.l.min()}, {self.l.max()}] leaves [0, 1/4]")
        object.__setattr__(self, "l", _frozen(self.l))
        object.__setattr__(self, "velocity", _frozen(self.velocity))

    @property
    def v_max(self) -> float:
        return float(np.abs(self.velocity).max())


@dataclass(frozen=True)
class TimeBinSpec:
    alpha: float
    beta: float
    phi: float
    t1: float
    t2: float
    sigma: float

    def __post_init__(self):
        if abs(self.alpha ** 2 + self.beta ** 2 - 1.0) > 1e-9:
            raise EnvelopeError(f"alpha^2 + beta^2 must be 1, got {self.alpha ** 2 + self.beta ** 2}")
        if not self.t2 > self.t1:
            raise EnvelopeError(f"t2 ({self.t2}) must be later than t1 ({self.t1})")
        if self.sigma <= 0:
            raise EnvelopeError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class WriteResult:
    profile: DecayProfile
    eta_w: float
    trace: ExcitationTrace
    capped: bool
    iterations: int
    target: float
    t_w: float
    t_w0: float
    xi_effective: ComplexEnvelope


@dataclass(frozen=True)
class ReadResult:
    profile: DecayProfile
    eta_r: float
    xi_out: ComplexEnvelope
    fidelity_vs_target: Optional[float]
    capped: bool
    iterations: int
    P0: float
    t_r0: float
    target: Optional[ComplexEnvelope] = None


@dataclass(frozen=True)
class FeasibilityReport:
    v_max: float
    v_max_si: float
    wavelength_si: float
    gamma0_si: float
    demanding: bool

    def to_dict(self) -> dict:
        return {
            "v_max_lambda_gamma0": self.v_max,
            "v_max_m_per_s": self.v_max_si,
            "wavelength_m": self.wavelength_si,
            "gamma0_per_s": self.gamma0_si,
            "demanding": self.demanding,
        }
