"""Lowest-order virtual element solver for the planar elasticity
eigenproblem on polygonal meshes with arbitrarily small edges."""

__version__ = "0.1.0"

from .material import Material, lame_from_young_poisson, material_from_young_poisson
from .mesh import (
    PolygonalMesh,
    generate_lshape_mesh,
    generate_square_mesh,
    quality_report,
    read_mesh,
    retag_boundary,
    tag_bottom_dirichlet,
    validate_mesh,
    write_mesh,
)
from .local import ElementGeometry, LocalOperators, element_geometry, local_matrices, projector
from .assembly import BcSpec, DofMap, GlobalSystem, assemble, build_dof_map, write_matrix_market
from .eigsolve import Spectrum, solve_smallest
from .study import (
    ConvergenceFit,
    ConvergenceTable,
    SpuriousReport,
    StudyConfig,
    convergence_study,
    fit_order,
    solve_case,
    spurious_scan,
)
from .vtkio import write_modes_vtk

__all__ = [
    "__version__",
    "Material", "lame_from_young_poisson", "material_from_young_poisson",
    "PolygonalMesh", "generate_square_mesh", "generate_lshape_mesh",
    "quality_report", "read_mesh", "write_mesh", "validate_mesh",
    "retag_boundary", "tag_bottom_dirichlet",
    "ElementGeometry", "LocalOperators", "element_geometry",
    "local_matrices", "projector",
    "BcSpec", "DofMap", "GlobalSystem", "assemble", "build_dof_map",
    "write_matrix_market",
    "Spectrum", "solve_smallest",
    "ConvergenceFit", "ConvergenceTable", "SpuriousReport", "StudyConfig",
    "convergence_study", "fit_order", "solve_case", "spurious_scan",
    "write_modes_vtk",
]
