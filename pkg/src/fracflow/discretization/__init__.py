from .assembly import (
    BoundaryConditions,
    NeumannLoad,
    PressureField,
    SparseSystem,
    assemble_weighted_diffusion,
    lp_gradient_norm,
)
from .grids import BoundaryQuadrature, Grid1D, Grid2D, Quadrature, TriMesh, gauss_legendre
from .picard import PicardConfig, picard_iterate, picard_solve

__all__ = [
    "BoundaryConditions",
    "BoundaryQuadrature",
    "Grid1D",
    "Grid2D",
    "NeumannLoad",
    "PicardConfig",
    "PressureField",
    "Quadrature",
    "SparseSystem",
    "TriMesh",
    "assemble_weighted_diffusion",
    "gauss_legendre",
    "lp_gradient_norm",
    "picard_iterate",
    "picard_solve",
]
