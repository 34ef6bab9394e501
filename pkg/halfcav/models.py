# models.py
import math
from typing import Dict, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from halfcav.memory_models import MemoryConfig, TimeBinSpec


# Atom-mirror constants
class MemoryBlock(BaseModel):
    gamma0: float = Field(1.0, gt=0)
    gamma_prime: float = Field(0.0, ge=0)
    gamma_p: Optional[float] = None  # None: gamma0 - gamma_prime
    omega_a: float = Field(500.0, gt=0)
    tau: float = Field(0.01, ge=0)
    markov_limit: float = Field(0.1, gt=0)

    def to_memory_config(self) -> MemoryConfig:
        return MemoryConfig(
            gamma0=self.gamma0,
            gamma_prime=self.gamma_prime,
            gamma_p=self.gamma_p,
            omega_a=self.omega_a,
            tau=self.tau,
            markov_limit=self.markov_limit,
        )


# Input time-bin qubit
class PulseBlock(BaseModel):
    alpha: float = 1 / math.sqrt(2)
    beta: float = 1 / math.sqrt(2)
    phi: float = 0.0
    t1: float = 0.0
    t2: float = 20.0
    sigma: float = Field(0.2, gt=0)

    @model_validator(mode="after")
    def check_qubit(self):
        if abs(self.alpha ** 2 + self.beta ** 2 - 1.0) > 1e-9:
            raise ValueError(f"alpha^2 + beta^2 must be 1, got {self.alpha ** 2 + self.beta ** 2}")
        if not self.t2 > self.t1:
            raise ValueError(f"t2 ({self.t2}) must be later than t1 ({self.t1})")
        return self

    def to_spec(self) -> TimeBinSpec:
        return TimeBinSpec(
            alpha=self.alpha, beta=self.beta, phi=self.phi, t1=self.t1, t2=self.t2, sigma=self.sigma
        )


class GridBlock(BaseModel):
    points_per_unit: float = Field(200.0, ge=50)
    padding: float = Field(8.0, ge=6.0)
    n: Optional[int] = Field(None, ge=2)


class SweepBlock(BaseModel):
    sigma_min: float = Field(0.05, gt=0)
    sigma_max: float = Field(5.0, gt=0)
    n_points: int = Field(40, ge=2)
    log_spacing: bool = False

    @model_validator(mode="after")
    def check_range(self):
        if not self.sigma_max > self.sigma_min:
            raise ValueError(f"sigma_max ({self.sigma_max}) must exceed sigma_min ({self.sigma_min})")
        return self


class ScenarioConfig(BaseModel):
    memory: MemoryBlock = MemoryBlock()
    pulse: PulseBlock = PulseBlock()
    storage_T: float = Field(30.0, ge=0)
    grid: GridBlock = GridBlock()
    phase_compensation: bool = True
    observation_delay: Optional[float] = None  # D / c; None: tau / 2
    sweep: Optional[SweepBlock] = None

    def with_sigma(self, sigma: float) -> "ScenarioConfig":
        return self.model_copy(update={"pulse": self.pulse.model_copy(update={"sigma": sigma})})


# Summary of one store run, written as run.json
class RunRecord(BaseModel):
    config: dict
    seed: int = 0
    eta_w: float
    eta_r: float
    eta: float
    F: float
    capped_w: bool
    capped_r: bool
    tau: float
    tau_adjustment: float
    survival: float = 1.0
    landmarks: Dict[str, float] = {}
    files: Dict[str, str] = {}

    @field_validator("eta_w", "eta_r", "eta", "F")
    @classmethod
    def check_unit_interval(cls, value: float) -> float:
        if not (-1e-9 <= value <= 1.0 + 1e-9):
            raise ValueError(f"efficiencies and fidelities lie in [0, 1], got {value}")
        return value

    @model_validator(mode="after")
    def check_product(self):
        expected = self.eta_w * self.survival * self.eta_r
        if abs(self.eta - expected) > 1e-10:
            raise ValueError(f"eta ({self.eta}) must equal eta_w * survival * eta_r ({expected})")
        return self
