import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from halfcav.errors import EnvelopeError, GridError
from halfcav.memory_models import ComplexEnvelope, TimeGrid


def require_same_grid(a: TimeGrid, b: TimeGrid, what: str = "operands") -> None:
    if not a.same_as(b):
        raise GridError(
            f"{what} live on different grids: "
            f"[{a.t_start}, {a.t_end}] n={a.n} vs [{b.t_start}, {b.t_end}] n={b.n}"
        )


def _check_length(values: np.ndarray, grid: TimeGrid) -> np.ndarray:
    values = np.asarray(values)
    if values.shape != (grid.n,):
        raise GridError(f"series of shape {values.shape} does not match grid with n={grid.n}")
    return values


def cumtrapz(values, grid: TimeGrid) -> np.ndarray:
    """Running trapezoid integral; entry 0 is exactly 0."""
    values = _check_length(values, grid)
    return cumulative_trapezoid(values, dx=grid.dt, initial=0)


def integrate(values, grid: TimeGrid):
    values = _check_length(values, grid)
    return trapezoid(values, dx=grid.dt)


def squared_norm(envelope: ComplexEnvelope) -> float:
    return float(integrate(envelope.intensity, envelope.grid))


def inner_product(a: ComplexEnvelope, b: ComplexEnvelope) -> complex:
    """<a, b> = integral of conj(a) * b."""
    require_same_grid(a.grid, b.grid, "envelopes")
    return complex(integrate(np.conj(a.samples) * b.samples, a.grid))


def support_window(intensity: np.ndarray, threshold: float = 1e-12):
    """First and last index where intensity exceeds threshold * max."""
    peak = float(np.max(intensity))
    if peak <= 0:
        raise EnvelopeError("cannot locate the support of an all-zero series")
    above = np.flatnonzero(intensity > threshold * peak)
    return int(above[0]), int(above[-1])
