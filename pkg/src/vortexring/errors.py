"""Exception types shared across the package."""


class VortexRingError(Exception):
    """Base class for all library errors."""


class DomainError(VortexRingError, ValueError):
    """An argument is non-finite or outside the mathematical domain."""


class RegimeError(VortexRingError, ValueError):
    """Parameter combination does not define a usable rotation regime."""


class NoHoleError(RegimeError):
    """The Thomas-Fermi profile has no central hole (eps*Omega <= 2/sqrt(pi))."""


class GeometryError(VortexRingError, ValueError):
    """A radius ordering required by the annulus construction is violated."""


class SolverError(VortexRingError, RuntimeError):
    """An iterative solver failed to converge; carries its residual history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class SearchError(VortexRingError, RuntimeError):
    """A discrete search (winding scan) could not bracket its minimum."""


class NoRingError(VortexRingError, ValueError):
    """No interior minimum of the cost function exists (Omega_1 <= 0)."""


class ConfigurationError(VortexRingError, ValueError):
    """A vortex configuration or experiment configuration is inconsistent."""


class ResolutionError(VortexRingError, ValueError):
    """The grid does not resolve a required length scale."""


class PhaseError(VortexRingError, RuntimeError):
    """Circulation quantization of a constructed phase failed its audit."""
