"""
Plain-text mesh files.

Format: line 1 `N_nodes N_triangles N_boundary_edges`, then one `x y` line per node,
one `i j k` line per triangle (0-based, counterclockwise) and one `a b` line per
boundary edge. Boundary angles are recomputed on load.
"""
import logging
from pathlib import Path
from typing import List, Union

import numpy as np

from exceptions import MeshError, MeshParseError
from .disk_mesh import Mesh, cycle_defect, first_inverted_triangle

_LOGGER = logging.getLogger(__name__)


def save_mesh(mesh: Mesh, path: Union[str, Path]) -> Path:
    """Write a mesh; coordinates keep 17 significant digits."""
    path = Path(path)
    lines: List[str] = [f"{mesh.n_nodes} {mesh.n_triangles} {len(mesh.boundary_edges)}"]
    lines.extend(f"{x:.17g} {y:.17g}" for x, y in mesh.nodes)
    lines.extend(f"{i} {j} {k}" for i, j, k in mesh.triangles)
    lines.extend(f"{a} {b}" for a, b in mesh.boundary_edges)
    path.write_text("\n".join(lines) + "\n")
    return path


def _parse_row(line: str, line_no: int, width: int, kind: type) -> list:
    parts = line.split()
    if len(parts) != width:
        raise MeshParseError(f"expected {width} values, found {len(parts)}", line_no)
    try:
        return [kind(p) for p in parts]
    except ValueError as e:
        raise MeshParseError(f"cannot parse '{line.strip()}': {e}", line_no)


def load_mesh(path: Union[str, Path]) -> Mesh:
    """
    Read and validate a mesh file.

    Raises:
        MeshParseError: malformed counts, out-of-range indices, inverted triangles
            or an open boundary cycle, with the offending line number.
    """
    path = Path(path)
    raw = [line for line in path.read_text().splitlines()]
    if not raw:
        raise MeshParseError("empty mesh file", 1)
    n_nodes, n_tris, n_edges = _parse_row(raw[0], 1, 3, int)
    if min(n_nodes, n_tris, n_edges) < 0:
        raise MeshParseError("negative counts in header", 1)
    expected = 1 + n_nodes + n_tris + n_edges
    body = [line for line in raw[expected:] if line.strip()]
    if len(raw) < expected or body:
        raise MeshParseError(f"header announces {expected} lines, file has {len(raw)}",
                             min(len(raw), expected) or 1)

    first_tri = 1 + n_nodes
    first_edge = first_tri + n_tris
    nodes = np.array([_parse_row(raw[i], i + 1, 2, float) for i in range(1, first_tri)],
                     dtype=np.float64).reshape(-1, 2)
    triangles = np.array([_parse_row(raw[i], i + 1, 3, int) for i in range(first_tri, first_edge)],
                         dtype=np.int64).reshape(-1, 3)
    edges = np.array([_parse_row(raw[i], i + 1, 2, int) for i in range(first_edge, expected)],
                     dtype=np.int64).reshape(-1, 2)

    if not np.all(np.isfinite(nodes)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(nodes), axis=1))[0])
        raise MeshParseError(f"node {bad} has non-finite coordinates", 2 + bad)
    for t, tri in enumerate(triangles):
        if tri.min() < 0 or tri.max() >= n_nodes:
            raise MeshParseError(f"triangle {t} references a node out of range", first_tri + 1 + t)
    for e, edge in enumerate(edges):
        if edge.min() < 0 or edge.max() >= n_nodes:
            raise MeshParseError(f"boundary edge {e} references a node out of range", first_edge + 1 + e)

    bad = first_inverted_triangle(nodes, triangles)
    if bad is not None:
        raise MeshParseError(f"triangle {bad} is clockwise or degenerate", first_tri + 1 + bad)
    defect = cycle_defect(edges)
    if defect is not None:
        raise MeshParseError(defect[1], first_edge + 1 + defect[0])

    try:
        mesh = Mesh(nodes, triangles, edges)
    except MeshError as e:
        raise MeshParseError(str(e))
    _LOGGER.info("Loaded mesh %s from %s", mesh.mesh_id, path)
    return mesh
