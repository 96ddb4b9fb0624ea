# Meshing Package
from .disk_mesh import Mesh, generate_disk_mesh
from .boundary_partition import BoundaryPartition, build_partition, partition_from_ell
from .mesh_io import load_mesh, save_mesh

__all__ = [
    "Mesh",
    "generate_disk_mesh",
    "BoundaryPartition",
    "build_partition",
    "partition_from_ell",
    "load_mesh",
    "save_mesh",
]
