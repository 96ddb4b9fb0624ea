# Solvers Package
from .newton import NewtonConfig, ForwardSolution, solve_forward, solve_unperturbed
from .adjoint import BoundaryTrace, boundary_trace, solve_adjoint

__all__ = [
    'NewtonConfig', 'ForwardSolution', 'solve_forward', 'solve_unperturbed',
    'BoundaryTrace', 'boundary_trace', 'solve_adjoint',
]
