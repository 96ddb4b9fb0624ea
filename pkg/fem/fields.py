"""
Nodal fields tied to the mesh they were computed on.
"""
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from exceptions import FieldMismatchError, PreconditionError
from meshing import Mesh


@dataclass(frozen=True, eq=False)
class NodalField:
    """P1 coefficients u_h = Σ u_i φ_i, one value per node of the owning mesh."""

    values: NDArray
    mesh_id: str

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise PreconditionError("nodal field contains non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def on(cls, mesh: Mesh, values) -> "NodalField":
        """Wrap values for a mesh, checking the length."""
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if len(values) != mesh.n_nodes:
            raise FieldMismatchError(
                f"field has {len(values)} values but mesh {mesh.mesh_id} has {mesh.n_nodes} nodes")
        return cls(values, mesh.mesh_id)

    @classmethod
    def zeros(cls, mesh: Mesh) -> "NodalField":
        return cls(np.zeros(mesh.n_nodes), mesh.mesh_id)

    def __len__(self) -> int:
        return len(self.values)

    def check_mesh(self, mesh: Mesh) -> None:
        """Raise FieldMismatchError unless the field belongs to mesh."""
        if self.mesh_id != mesh.mesh_id or len(self.values) != mesh.n_nodes:
            raise FieldMismatchError(
                f"field of mesh {self.mesh_id} used with mesh {mesh.mesh_id}")

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.values) else 0.0


def field_values(mesh: Mesh, field) -> NDArray:
    """Values of a NodalField (checked against mesh) or of a plain nodal array."""
    if isinstance(field, NodalField):
        field.check_mesh(mesh)
        return field.values
    values = np.asarray(field, dtype=np.float64).reshape(-1)
    if len(values) != mesh.n_nodes:
        raise FieldMismatchError(
            f"array has {len(values)} values but mesh {mesh.mesh_id} has {mesh.n_nodes} nodes")
    return values
