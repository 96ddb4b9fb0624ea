"""
Topological gradient field

    G(z) = (1 − k) ∇U(z)ᵀ m ∇W(z) + U(z)³ W(z)

evaluated at the mesh nodes, and the search for its interior minimiser.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from exceptions import FieldMismatchError, PreconditionError
from fem import NodalField, field_values
from fem.assembly import basis_gradients
from meshing import Mesh
from .polarization import PolarizationTensor

_LOGGER = logging.getLogger(__name__)

DEFAULT_MARGIN = 0.05


@dataclass(frozen=True, eq=False)
class GradientField:
    """
    Nodal values of G with the minimum over the nodes at distance >= margin from ∂Ω.

    Ties in the minimum go to the lowest node index.
    """

    g: NodalField
    min_node: int
    min_value: float
    margin: float = DEFAULT_MARGIN

    @property
    def values(self) -> NDArray:
        return self.g.values

    def scaled(self, factor: float) -> "GradientField":
        return GradientField(NodalField(factor * self.g.values, self.g.mesh_id),
                             self.min_node, factor * self.min_value, self.margin)


@dataclass(frozen=True)
class Detection:
    """Outcome of the interior minimiser search."""

    point: Tuple[float, float]
    node: int
    value: float
    unrestricted_node: int
    boundary_violation: bool
    flat: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            'point': list(self.point),
            'node': self.node,
            'value': self.value,
            'unrestricted_node': self.unrestricted_node,
            'boundary_violation': self.boundary_violation,
            'flat': self.flat,
        }


def recover_nodal_gradient(mesh: Mesh, u) -> NDArray:
    """
    Nodal gradients as the area-weighted average of the constant element gradients.

    Returns:
        (n_nodes, 2) array
    """
    values = field_values(mesh, u)
    element_grad = np.einsum("ta,tad->td", values[mesh.triangles], basis_gradients(mesh))
    tris = mesh.triangles.ravel()
    weights = np.repeat(mesh.element_areas, 3)
    patch_area = np.bincount(tris, weights=weights, minlength=mesh.n_nodes)
    nodal = np.empty((mesh.n_nodes, 2))
    for d in range(2):
        nodal[:, d] = np.bincount(tris, weights=weights * np.repeat(element_grad[:, d], 3),
                                  minlength=mesh.n_nodes) / patch_area
    return nodal


def interior_nodes(mesh: Mesh, margin: float) -> NDArray:
    """Indices of the nodes at distance >= margin from the boundary."""
    if margin < 0.0:
        raise PreconditionError(f"margin must be non-negative, got {margin}")
    if margin == 0.0:
        return np.arange(mesh.n_nodes)
    return np.flatnonzero(mesh.distance_to_boundary(mesh.nodes) >= margin)


def _restricted_argmin(values: NDArray, candidates: NDArray) -> int:
    if candidates.size == 0:
        raise PreconditionError("no mesh node lies at the requested distance from the boundary")
    return int(candidates[np.argmin(values[candidates])])


def gradient_field(mesh: Mesh, values, margin: float = DEFAULT_MARGIN) -> GradientField:
    """Wrap nodal G values, locating the minimum over the interior nodes."""
    values = field_values(mesh, values)
    node = _restricted_argmin(values, interior_nodes(mesh, margin))
    return GradientField(NodalField(values, mesh.mesh_id), node, float(values[node]), margin)


def topological_gradient(mesh: Mesh, U, W, k: float, tensor: PolarizationTensor,
                         margin: float = DEFAULT_MARGIN) -> GradientField:
    """
    Evaluate G at every node.

    Args:
        mesh: the mesh
        U: unperturbed state
        W: adjoint state
        k: conductivity ratio k_in / k_out
        tensor: polarization tensor (area convention folded in)
        margin: minimum distance to ∂Ω for the recorded minimum
    """
    u_values = field_values(mesh, U)
    w_values = field_values(mesh, W)
    grad_u = recover_nodal_gradient(mesh, u_values)
    grad_w = recover_nodal_gradient(mesh, w_values)
    m = tensor.m
    if tensor.is_isotropic:
        dot = grad_u[:, 0] * grad_w[:, 0] + grad_u[:, 1] * grad_w[:, 1]
        first = (1.0 - k) * m[0, 0] * dot
    else:
        first = (1.0 - k) * np.einsum("ni,ij,nj->n", grad_u, m, grad_w)
    g = first + u_values ** 3 * w_values
    return gradient_field(mesh, g, margin)


def argmin_interior(field: GradientField, mesh: Mesh, margin: Optional[float] = None,
                    flat: bool = False) -> Detection:
    """
    Node minimising G among those at distance >= margin from ∂Ω.

    Args:
        field: nodal G values
        mesh: the mesh the field lives on
        margin: exclusion band width, defaults to the field's margin
        flat: the caller found no inclusion signature in the data; an
            identically zero field is flat regardless

    Returns:
        Detection with the boundary_violation flag set when the unrestricted
        minimiser lies inside the exclusion band
    """
    field.g.check_mesh(mesh)
    margin = field.margin if margin is None else margin
    values = field.values
    node = _restricted_argmin(values, interior_nodes(mesh, margin))
    unrestricted = int(np.argmin(values))
    violation = bool(mesh.distance_to_boundary(mesh.nodes[unrestricted])[0] < margin)

    peak = float(np.max(np.abs(values))) if len(values) else 0.0
    flat = flat or peak == 0.0
    if flat:
        _LOGGER.warning("Topological gradient is flat (max |G| = %.3e)", peak)
    elif violation:
        _LOGGER.warning("Unrestricted minimum of G lies within %.3g of the boundary (node %d)",
                        margin, unrestricted)
    x, y = mesh.nodes[node]
    return Detection((float(x), float(y)), node, float(values[node]), unrestricted, violation, flat)


def evaluate_at(field, mesh: Mesh, point) -> float:
    """P1 interpolation of a nodal field (GradientField, NodalField or array) at a point."""
    values = field.values if isinstance(field, (GradientField, NodalField)) else np.asarray(field)
    if len(values) != mesh.n_nodes:
        raise FieldMismatchError("field and mesh sizes differ")
    return mesh.interpolate(values, point)
