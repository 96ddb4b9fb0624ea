"""
Synthetic boundary data from a planted inclusion.

Data are computed on a generator mesh and transferred to the reconstruction mesh by
periodic linear interpolation in the boundary angle.
"""
import logging
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from fem import DEFAULT_MIN_SEPARATION, InclusionSpec, SourceTerm, classify_elements
from meshing import BoundaryPartition, Mesh
from reconstruction import Measurement
from solvers import NewtonConfig, boundary_trace, solve_forward
from .noise import NoiseSpec, apply_noise

_LOGGER = logging.getLogger(__name__)


def transfer_trace(src_angles, src_values, dst_angles) -> NDArray:
    """Interpolate boundary values periodically from one set of angles to another."""
    return np.interp(np.asarray(dst_angles, dtype=np.float64), np.asarray(src_angles, dtype=np.float64),
                     np.asarray(src_values, dtype=np.float64), period=2.0 * np.pi)


def clean_boundary_data(true_inclusion: Optional[InclusionSpec], f: SourceTerm, gen_mesh: Mesh,
                        recon_mesh: Mesh, newton: Optional[NewtonConfig] = None,
                        min_separation: float = DEFAULT_MIN_SEPARATION) -> NDArray:
    """
    Trace of the forward solution with the planted inclusion on the reconstruction boundary.

    When both meshes coincide the nodal trace is returned without interpolation.
    """
    coeff = classify_elements(gen_mesh, true_inclusion, min_separation)
    solution = solve_forward(gen_mesh, coeff, f, newton)
    trace = boundary_trace(gen_mesh, solution.u)
    if gen_mesh.mesh_id == recon_mesh.mesh_id:
        return trace.values
    _LOGGER.debug("Transferring %d boundary values onto %d nodes", len(trace), len(recon_mesh.boundary_nodes))
    return transfer_trace(trace.angles, trace.values, recon_mesh.boundary_angles)


def generate_measurement(true_inclusion: Optional[InclusionSpec], f: SourceTerm, gen_mesh: Mesh,
                         recon_mesh: Mesh, mask: Optional[BoundaryPartition] = None,
                         noise: Optional[NoiseSpec] = None, newton: Optional[NewtonConfig] = None,
                         min_separation: float = DEFAULT_MIN_SEPARATION) -> Measurement:
    """
    Simulate u_meas for a planted inclusion.

    Args:
        true_inclusion: planted inclusion (None for the unperturbed domain)
        f: source term
        gen_mesh: mesh the forward problem is solved on
        recon_mesh: mesh whose boundary nodes receive the data
        mask: arcs the data is restricted to
        noise: optional multiplicative noise
        newton: forward solver settings
        min_separation: required distance of the inclusion from ∂Ω

    Returns:
        Measurement on recon_mesh
    """
    data = clean_boundary_data(true_inclusion, f, gen_mesh, recon_mesh, newton, min_separation)
    if noise is not None:
        data = apply_noise(data, noise)
    return Measurement(f, data, mask)
