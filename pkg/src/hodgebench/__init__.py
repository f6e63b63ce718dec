"""Mixed Hodge-Laplace solvers on simplicial meshes.

Assembles the saddle-point form of the Hodge-Laplace problem at any degree
of the discrete de Rham complex (lowest-order Whitney forms), solves it
with MINRES behind an alpha-robust block-diagonal preconditioner applied by
exact sparse LDLt solves, and verifies the underlying stability constants
with dense spectral oracles.  The ``hodge-bench`` CLI drives parameter
sweeps and report generation.
"""

from .errors import BreakdownError, DenseSizeError, MeshParseError, NotSPDError
from .kernels import BACKEND as KERNEL_BACKEND
from .mesh import SimplicialMesh, build_structured_mesh, mesh_size, read_gmsh
from .sparse import (DENSE_CAP, SparseMatrix, SymmetricFactorization, analyze,
                     dense_generalized_eigpairs, dense_generalized_eigs,
                     ldlt_factorize, min_degree_ordering)
from .quadrature import simplex_quadrature
from .derham import (DeRhamComplex, ExactnessReport, build_complex,
                     check_exactness, coboundary, mass_matrix,
                     whitney_basis_values)
from .saddle import (SaddleSystem, assemble_load_vector, assemble_rhs,
                     assemble_system, standard_load, system_blocks)
from .precond import (BlockPreconditioner, build_preconditioner,
                      preconditioner_matrices)
from .minres import SolveReport, minres_solve
from .spectral import (NormMatrices, SpectralReport, build_norm_matrices,
                       flipped_inf_sup_constant, flipped_q_norm_matrix,
                       hodge_decompose, inf_sup_constant,
                       norm_equivalence_constants, poincare_constant,
                       preconditioned_condition_number, projection_matrix,
                       spectral_report)
from .bench import (SweepConfig, SweepResult, SweepRow, emit_table,
                    kernel_benchmark, parse_csv, run_oracle_report, run_sweep)

__version__ = "0.1.0"

__all__ = [
    "BreakdownError", "DenseSizeError", "MeshParseError",
    "NotSPDError", "KERNEL_BACKEND", "SimplicialMesh",
    "build_structured_mesh", "mesh_size", "read_gmsh", "DENSE_CAP",
    "SparseMatrix", "SymmetricFactorization", "analyze",
    "dense_generalized_eigpairs", "dense_generalized_eigs", "ldlt_factorize",
    "min_degree_ordering", "simplex_quadrature", "DeRhamComplex",
    "ExactnessReport", "build_complex", "check_exactness", "coboundary",
    "mass_matrix", "whitney_basis_values", "SaddleSystem",
    "assemble_load_vector", "assemble_rhs", "assemble_system",
    "standard_load", "system_blocks", "BlockPreconditioner",
    "build_preconditioner", "preconditioner_matrices", "SolveReport",
    "minres_solve", "NormMatrices", "SpectralReport", "build_norm_matrices",
    "flipped_inf_sup_constant", "flipped_q_norm_matrix", "hodge_decompose",
    "inf_sup_constant", "norm_equivalence_constants", "poincare_constant",
    "preconditioned_condition_number", "projection_matrix", "spectral_report",
    "SweepConfig", "SweepResult", "SweepRow", "emit_table",
    "kernel_benchmark", "parse_csv", "run_oracle_report", "run_sweep",
    "__version__",
]
