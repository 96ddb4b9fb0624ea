# FEM Package
from .fields import NodalField, field_values
from .sources import (SourceTerm, SourceManager, LinearXSource, LinearYSource, ProductSource,
                      SaddleSource, BumpSource, ConstantSource, parse_source, polynomial_sources)
from .inclusions import (InclusionSpec, CoefficientField, classify_elements, inclusion_separation,
                         DEFAULT_K_IN, DEFAULT_MIN_SEPARATION)
from .assembly import (assemble_stiffness, assemble_mass, lumped_mass, assemble_reaction_linearized,
                       assemble_load, assemble_nonlinear_residual, assemble_boundary_load,
                       boundary_mass_matrix, boundary_l2_squared, boundary_to_nodal)
from .linear_solver import solve_sparse, constant_defect, WEAK_KERNEL_RTOL

__all__ = [
    'NodalField', 'field_values',
    'SourceTerm', 'SourceManager', 'LinearXSource', 'LinearYSource', 'ProductSource',
    'SaddleSource', 'BumpSource', 'ConstantSource', 'parse_source', 'polynomial_sources',
    'InclusionSpec', 'CoefficientField', 'classify_elements', 'inclusion_separation',
    'DEFAULT_K_IN', 'DEFAULT_MIN_SEPARATION',
    'assemble_stiffness', 'assemble_mass', 'lumped_mass', 'assemble_reaction_linearized',
    'assemble_load', 'assemble_nonlinear_residual', 'assemble_boundary_load',
    'boundary_mass_matrix', 'boundary_l2_squared', 'boundary_to_nodal',
    'solve_sparse', 'constant_defect', 'WEAK_KERNEL_RTOL',
]
