"""Exception hierarchy shared by the solver modules."""


class FracflowError(Exception):
    """Base class for all package errors."""


class DomainError(FracflowError, ValueError):
    """Coordinates outside a patch domain."""


class DegenerateSurfaceError(FracflowError):
    """The surface parametrisation is not an immersion at some point."""


class MetricDegeneracyError(FracflowError):
    """det G <= 0 inside the fracture, i.e. the offset crosses a focal point."""

    def __init__(self, u, v, lam, detG):
        self.u, self.v, self.lam, self.detG = u, v, lam, detG
        super().__init__(
            f"metric degenerates at (u={u:.6g}, v={v:.6g}, lambda={lam:.6g}): detG={detG:.3e}"
        )


class AssemblyError(FracflowError):
    """Non-positive diffusion coefficient met during assembly."""


class ConvergenceError(FracflowError):
    """Picard iteration did not reach the requested tolerance."""

    def __init__(self, message, history):
        self.history = list(history)
        super().__init__(f"{message} (last update {self.history[-1]:.3e})" if self.history else message)


class MeshError(FracflowError):
    """Mesh generation failed or produced an invalid mesh."""


class ConfigError(FracflowError):
    """Malformed or schema-invalid run configuration."""
