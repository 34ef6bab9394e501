# errors.py
class HalfCavityError(Exception):
    """Base class for every error raised by the halfcav package."""


class MemoryConfigError(HalfCavityError, ValueError):
    """Physical constants of the atom-mirror system are inconsistent."""


class GridError(HalfCavityError, ValueError):
    """Time grids differ, are too narrow, or a shifted support was clipped."""


class EnvelopeError(HalfCavityError, ValueError):
    """Envelope has zero norm, is not normalized, or drives P outside [0, 1]."""


class ScenarioError(HalfCavityError, ValueError):
    """Pipeline stages were combined inconsistently."""


class MirrorConversionError(HalfCavityError, ValueError):
    """Decay profile cannot be mapped onto a mirror displacement."""


class OptimizationError(HalfCavityError, RuntimeError):
    """Profile optimizer found no admissible efficiency."""


class OdeInstabilityError(HalfCavityError, RuntimeError):
    """Fixed-step oracle left the Bloch sphere; the grid is too coarse."""
