"""Second-type Nedelec edge-element solver for the time-harmonic Maxwell
equations with impedance boundary condition on the unit cube, plus the
convergence / pollution study harness."""

from .analysis import (
    ErrorReport,
    FieldCoefficients,
    error_norms,
    eval_field,
    interpolate,
    stability_ratio,
)
from .assembly import AssembledSystem, assemble, write_matrix_market
from .fe_basis import (
    DofMap,
    FeSpace,
    ReferenceBasis,
    build_dof_map,
    build_reference_basis,
    dof_count,
    push_forward,
)
from .linsolve import LinearSolveError, SolveReport, solve
from .manufactured import BesselWaveSolution, PolynomialSolution, ProblemParams
from .mesh import Mesh, build_cube_mesh, classify_boundary_face, write_vtk
from .quadrature import (
    QuadraturePolicy,
    QuadratureRule,
    interval_rule,
    tet_rule,
    tri_rule,
)
from .study import (
    StudyConfig,
    StudyRecord,
    choose_M_for_target_nlambda,
    fit_rate,
    nlambda,
    run_convergence_study,
    run_pollution_study,
    run_single,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledSystem",
    "BesselWaveSolution",
    "DofMap",
    "ErrorReport",
    "FeSpace",
    "FieldCoefficients",
    "LinearSolveError",
    "Mesh",
    "PolynomialSolution",
    "ProblemParams",
    "QuadraturePolicy",
    "QuadratureRule",
    "ReferenceBasis",
    "SolveReport",
    "StudyConfig",
    "StudyRecord",
    "assemble",
    "build_cube_mesh",
    "build_dof_map",
    "build_reference_basis",
    "choose_M_for_target_nlambda",
    "classify_boundary_face",
    "dof_count",
    "error_norms",
    "eval_field",
    "fit_rate",
    "interpolate",
    "interval_rule",
    "nlambda",
    "push_forward",
    "run_convergence_study",
    "run_pollution_study",
    "run_single",
    "solve",
    "stability_ratio",
    "tet_rule",
    "tri_rule",
    "write_matrix_market",
    "write_vtk",
]
