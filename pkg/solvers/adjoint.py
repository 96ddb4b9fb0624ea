"""
Adjoint state W of the boundary misfit:

    -ΔW + 3U²W = 0 in Ω,   ∂_ν W = (U − u_meas) χ_Γ on ∂Ω.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from exceptions import LinearSolverError, RegularizationWarning
from fem import (WEAK_KERNEL_RTOL, NodalField, assemble_boundary_load, assemble_reaction_linearized,
                 assemble_stiffness, classify_elements, constant_defect, field_values, lumped_mass,
                 solve_sparse)
from meshing import BoundaryPartition, Mesh

_LOGGER = logging.getLogger(__name__)

ADJOINT_REG = 1e-8


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Nodal values on ∂Ω in boundary-cycle order, with the polar angle of each node."""

    angles: NDArray
    values: NDArray
    mesh_id: str

    def __len__(self) -> int:
        return len(self.values)


def boundary_trace(mesh: Mesh, u) -> BoundaryTrace:
    """Restriction of a nodal field to the boundary nodes."""
    values = np.array(field_values(mesh, u)[mesh.boundary_nodes])
    return BoundaryTrace(mesh.boundary_angles, values, mesh.mesh_id)


def solve_adjoint(mesh: Mesh, U, boundary_residual, mask: Optional[BoundaryPartition] = None) -> NodalField:
    """
    Solve the adjoint problem posed on Ω without inclusion.

    Args:
        mesh: the mesh
        U: unperturbed state (NodalField)
        boundary_residual: U − u_meas per boundary node, in cycle order
        mask: restricts the Neumann datum to the arcs of a partition

    Returns:
        W as a NodalField
    """
    u_values = field_values(mesh, U)
    load = assemble_boundary_load(mesh, boundary_residual, mask)
    if not np.any(load.values):
        return NodalField.zeros(mesh)

    coeff = classify_elements(mesh, None)
    operator = assemble_stiffness(mesh, coeff) + assemble_reaction_linearized(mesh, coeff, u_values, 3.0)
    lumped = lumped_mass(mesh)
    if constant_defect(operator) >= WEAK_KERNEL_RTOL:
        try:
            return NodalField(solve_sparse(operator, load), mesh.mesh_id)
        except LinearSolverError as e:
            _LOGGER.debug("Unregularised adjoint solve failed: %s", e)
    message = f"unperturbed state is nearly zero; adjoint operator regularised with {ADJOINT_REG:g}"
    _LOGGER.warning(message)
    warnings.warn(message, RegularizationWarning)
    W = solve_sparse(operator, load, reg=ADJOINT_REG, lumped_mass=lumped)
    return NodalField(W, mesh.mesh_id)
