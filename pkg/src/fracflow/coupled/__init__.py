from .mesh import CoupledMesh, StripLayout, build_coupled_mesh
from .scenario import (
    RESERVOIRS,
    FractureDescriptor,
    MeshControls,
    ReservoirScenario,
    coupled_ex6,
    coupled_ex6_orthogonal,
    coupled_ex7,
    radial_annulus,
    sine_fracture,
)
from .solver import (
    CoupledSolution,
    PIReport,
    PssPressure,
    PssState,
    coupled_difference_study,
    diffusive_capacity,
    porous_gradient_difference,
    pss_reconstruct,
    solve_coupled_original,
    solve_coupled_reduced,
)
