"""Darcy-Forchheimer flow in fractures described as normal offsets of a surface."""
from .errors import (
    AssemblyError,
    ConfigError,
    ConvergenceError,
    DegenerateSurfaceError,
    DomainError,
    FracflowError,
    MeshError,
    MetricDegeneracyError,
)
from .flowlaw import FluidParams, f_beta, monotonicity_gap, velocity
from .geometry import (
    SurfacePatch,
    ThicknessProfile,
    detG_quartic,
    fundamental_forms,
    grad_norm_G,
    metric_at,
    normal_frame,
    surface_jet,
)

__version__ = "0.1.0"
