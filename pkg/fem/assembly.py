"""
Vectorised P1 assembly on triangles.

Element matrices are computed for all triangles at once and summed into CSR
matrices; every matrix is symmetrised as 0.5 (A + Aᵀ) so that it is exactly
symmetric regardless of the duplicate-summation order.

Nonlinear and solution-dependent terms use the three-point edge-midpoint rule
(weights |T|/3), exact for quadratics.
"""
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray

from exceptions import FieldMismatchError
from meshing import BoundaryPartition, Mesh
from .fields import NodalField, field_values
from .inclusions import CoefficientField
from .sources import SourceTerm

# basis values at the edge midpoints (0,1), (1,2), (2,0)
_MIDPOINT_PHI = np.array([[0.5, 0.5, 0.0],
                          [0.0, 0.5, 0.5],
                          [0.5, 0.0, 0.5]])
_LOCAL_MASS = np.array([[2.0, 1.0, 1.0],
                        [1.0, 2.0, 1.0],
                        [1.0, 1.0, 2.0]]) / 12.0
_EDGE_MASS = np.array([[2.0, 1.0],
                       [1.0, 2.0]]) / 6.0


def basis_gradients(mesh: Mesh) -> NDArray:
    """(n_triangles, 3, 2) constant gradients of the three local basis functions."""
    p = mesh.nodes[mesh.triangles]
    two_area = 2.0 * mesh.element_areas
    grads = np.empty((mesh.n_triangles, 3, 2))
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        grads[:, a, 0] = (p[:, b, 1] - p[:, c, 1]) / two_area
        grads[:, a, 1] = (p[:, c, 0] - p[:, b, 0]) / two_area
    return grads


def _scatter(mesh: Mesh, local: NDArray) -> sp.csr_matrix:
    n = mesh.n_nodes
    tris = mesh.triangles
    rows = np.broadcast_to(tris[:, :, None], local.shape).ravel()
    cols = np.broadcast_to(tris[:, None, :], local.shape).ravel()
    matrix = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return _symmetrize(matrix)


def _symmetrize(matrix: sp.spmatrix) -> sp.csr_matrix:
    sym = (0.5 * (matrix + matrix.T)).tocsr()
    sym.sort_indices()
    return sym


def _check_coeff(mesh: Mesh, coeff: CoefficientField) -> None:
    if coeff.mesh_id != mesh.mesh_id or len(coeff.conductivity) != mesh.n_triangles:
        raise FieldMismatchError(f"coefficient field of mesh {coeff.mesh_id} used with mesh {mesh.mesh_id}")


def _midpoint_values(mesh: Mesh, values: NDArray) -> NDArray:
    """(n_triangles, 3) P1 values at the edge midpoints."""
    return values[mesh.triangles] @ _MIDPOINT_PHI.T


def _midpoint_coordinates(mesh: Mesh) -> Tuple[NDArray, NDArray]:
    p = mesh.nodes[mesh.triangles]
    return p[:, :, 0] @ _MIDPOINT_PHI.T, p[:, :, 1] @ _MIDPOINT_PHI.T


def _midpoint_integral(mesh: Mesh, integrand: NDArray) -> NDArray:
    """∫ g φ_i for g sampled at the edge midpoints, accumulated per node."""
    weights = (mesh.element_areas / 3.0)[:, None] * integrand
    local = weights @ _MIDPOINT_PHI
    return np.bincount(mesh.triangles.ravel(), weights=local.ravel(), minlength=mesh.n_nodes)


def assemble_stiffness(mesh: Mesh, coeff: CoefficientField) -> sp.csr_matrix:
    """Stiffness matrix of ∫ k ∇u·∇v with piecewise constant k."""
    _check_coeff(mesh, coeff)
    grads = basis_gradients(mesh)
    scale = coeff.conductivity * mesh.element_areas
    local = scale[:, None, None] * np.einsum("tad,tbd->tab", grads, grads)
    return _scatter(mesh, local)


def assemble_mass(mesh: Mesh) -> sp.csr_matrix:
    """Consistent P1 mass matrix."""
    local = mesh.element_areas[:, None, None] * _LOCAL_MASS[None, :, :]
    return _scatter(mesh, local)


def lumped_mass(mesh: Mesh) -> NDArray:
    """Row sums of the mass matrix: |T|/3 from every adjacent triangle."""
    return np.bincount(mesh.triangles.ravel(), weights=np.repeat(mesh.element_areas / 3.0, 3),
                       minlength=mesh.n_nodes)


def assemble_reaction_linearized(mesh: Mesh, coeff: CoefficientField, U, factor: float) -> sp.csr_matrix:
    """
    Matrix of ∫ χ · factor · U² u v with U² evaluated at the edge midpoints.

    Args:
        mesh: the mesh
        coeff: supplies the reaction mask χ
        U: NodalField (or nodal array) of the linearisation point
        factor: 3 for the Newton Jacobian and the adjoint operator

    Returns:
        Symmetric positive-semidefinite CSR matrix
    """
    _check_coeff(mesh, coeff)
    u_q = _midpoint_values(mesh, field_values(mesh, U))
    weight = (factor * coeff.reaction_mask * mesh.element_areas / 3.0)[:, None] * u_q ** 2
    local = np.einsum("tq,qa,qb->tab", weight, _MIDPOINT_PHI, _MIDPOINT_PHI)
    return _scatter(mesh, local)


def assemble_cubic_term(mesh: Mesh, coeff: CoefficientField, u: NDArray) -> NDArray:
    """∫ χ u³ φ_i with u cubed at the edge midpoints."""
    u_q = _midpoint_values(mesh, u)
    return _midpoint_integral(mesh, coeff.reaction_mask[:, None] * u_q ** 3)


def assemble_load(mesh: Mesh, f: SourceTerm) -> NDArray:
    """Load vector ∫ f φ_i."""
    x_q, y_q = _midpoint_coordinates(mesh)
    return _midpoint_integral(mesh, f.evaluate(x_q, y_q))


def nonlinear_residual(stiffness: sp.csr_matrix, mesh: Mesh, coeff: CoefficientField,
                       u: NDArray, load: NDArray) -> NDArray:
    """K u + ∫ χ u³ φ_i − F with precomputed stiffness and load."""
    return stiffness @ u + assemble_cubic_term(mesh, coeff, u) - load


def assemble_nonlinear_residual(mesh: Mesh, coeff: CoefficientField, u, f: SourceTerm) -> NodalField:
    """Residual ∫ k ∇u·∇φ_i + ∫ χ u³ φ_i − ∫ f φ_i of the forward problem."""
    values = field_values(mesh, u)
    residual = nonlinear_residual(assemble_stiffness(mesh, coeff), mesh, coeff, values, assemble_load(mesh, f))
    return NodalField(residual, mesh.mesh_id)


def _edge_weights(mesh: Mesh, mask: Optional[BoundaryPartition]) -> NDArray:
    if mask is None:
        return mesh.edge_lengths
    return np.where(mask.edge_mask(mesh), mesh.edge_lengths, 0.0)


def boundary_to_nodal(mesh: Mesh, g) -> NDArray:
    """Spread per-boundary-node values (cycle order) onto a nodal array."""
    g = np.asarray(g, dtype=np.float64).reshape(-1)
    if len(g) != len(mesh.boundary_nodes):
        raise FieldMismatchError(
            f"boundary data has {len(g)} values, mesh {mesh.mesh_id} has {len(mesh.boundary_nodes)} boundary nodes")
    nodal = np.zeros(mesh.n_nodes)
    nodal[mesh.boundary_nodes] = g
    return nodal


def assemble_boundary_load(mesh: Mesh, g, mask: Optional[BoundaryPartition] = None) -> NodalField:
    """
    ∫_{∂Ω ∩ mask} g φ_i dσ for a P1 boundary trace g, exact on every edge.

    An edge belongs to the mask when its midpoint angle does.
    """
    nodal = boundary_to_nodal(mesh, g)
    a, b = mesh.boundary_edges[:, 0], mesh.boundary_edges[:, 1]
    weights = _edge_weights(mesh, mask) / 6.0
    load_a = weights * (2.0 * nodal[a] + nodal[b])
    load_b = weights * (nodal[a] + 2.0 * nodal[b])
    load = np.bincount(np.concatenate([a, b]), weights=np.concatenate([load_a, load_b]),
                       minlength=mesh.n_nodes)
    return NodalField(load, mesh.mesh_id)


def boundary_mass_matrix(mesh: Mesh, mask: Optional[BoundaryPartition] = None) -> sp.csr_matrix:
    """Matrix of ∫_{∂Ω ∩ mask} u v dσ."""
    n = mesh.n_nodes
    edges = mesh.boundary_edges
    local = _edge_weights(mesh, mask)[:, None, None] * _EDGE_MASS[None, :, :]
    rows = np.broadcast_to(edges[:, :, None], local.shape).ravel()
    cols = np.broadcast_to(edges[:, None, :], local.shape).ravel()
    return _symmetrize(sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)))


def boundary_l2_squared(mesh: Mesh, d, mask: Optional[BoundaryPartition] = None) -> float:
    """∫_{∂Ω ∩ mask} d² dσ for a P1 boundary trace d given per boundary node."""
    nodal = boundary_to_nodal(mesh, d)
    da = nodal[mesh.boundary_edges[:, 0]]
    db = nodal[mesh.boundary_edges[:, 1]]
    return float(np.sum(_edge_weights(mesh, mask) / 3.0 * (da * da + da * db + db * db)))
