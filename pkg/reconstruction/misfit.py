"""
Boundary misfit j(0) = ∫_Γ (U − u_meas)² dσ.
"""
import numpy as np

from exceptions import FieldMismatchError
from fem import boundary_l2_squared
from meshing import Mesh
from .result import Measurement


def misfit(mesh: Mesh, U_trace, m: Measurement) -> float:
    """
    Squared L² distance between the unperturbed trace and the data over the mask.

    Args:
        mesh: reconstruction mesh
        U_trace: BoundaryTrace or per-boundary-node values in cycle order
        m: measurement

    Returns:
        Non-negative misfit
    """
    trace = np.asarray(getattr(U_trace, "values", U_trace), dtype=np.float64)
    if len(trace) != len(m.boundary_data):
        raise FieldMismatchError(
            f"trace has {len(trace)} boundary values, measurement '{m.label}' has {len(m.boundary_data)}")
    return boundary_l2_squared(mesh, trace - m.boundary_data, m.mask)
