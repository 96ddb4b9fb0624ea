"""
Conforming triangular meshes of the unit disk and general polygonal domains.

The disk generator builds a hexagonal ring structure: ring j (radius j/N) carries
6j nodes, consecutive rings are stitched sector by sector, and interior nodes get
one relaxed Laplacian smoothing pass. Boundary nodes sit exactly on the unit circle.
"""
from __future__ import annotations

import hashlib
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from matplotlib.path import Path as MplPath
from numpy.typing import NDArray
from scipy.spatial import cKDTree

from exceptions import MeshError, PreconditionError

_LOGGER = logging.getLogger(__name__)

DEFAULT_MAX_NODES = 2_000_000
# ring spacing is target_h / RING_SPACING_FACTOR; the longest stitched edge is ~1.45 spacings
RING_SPACING_FACTOR = 1.02
SMOOTHING_RELAXATION = 0.5
_GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)


def signed_areas(nodes: NDArray, triangles: NDArray) -> NDArray:
    """Signed area of every triangle (positive for counterclockwise ordering)."""
    p0 = nodes[triangles[:, 0]]
    p1 = nodes[triangles[:, 1]]
    p2 = nodes[triangles[:, 2]]
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))


def free_edges(triangles: NDArray) -> Tuple[NDArray, NDArray]:
    """
    Directed edges that belong to exactly one triangle.

    Returns:
        (edges, counts): the free edges oriented as in their triangle, and the
        number of triangles sharing every undirected edge of the mesh.
    """
    directed = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    undirected = np.sort(directed, axis=1)
    _, inverse, counts = np.unique(undirected, axis=0, return_inverse=True, return_counts=True)
    inverse = np.asarray(inverse).reshape(-1)
    return directed[counts[inverse] == 1], counts


def first_inverted_triangle(nodes: NDArray, triangles: NDArray) -> Optional[int]:
    """Index of the first triangle with non-positive signed area, or None."""
    bad = np.flatnonzero(signed_areas(nodes, triangles) <= 0.0)
    return int(bad[0]) if bad.size else None


def cycle_defect(edges: NDArray) -> Optional[Tuple[int, str]]:
    """
    Check that directed edges form one closed cycle visiting each node once.

    Returns:
        None for a valid cycle, otherwise (edge index, description).
    """
    if len(edges) < 3:
        return (0, "open boundary cycle: fewer than three boundary edges")
    successor: Dict[int, int] = {}
    for idx, (a, b) in enumerate(edges):
        if int(a) in successor:
            return (idx, f"open boundary cycle: node {int(a)} starts two boundary edges")
        successor[int(a)] = idx
    ends = set(int(b) for b in edges[:, 1])
    for idx, (a, b) in enumerate(edges):
        if int(b) not in successor:
            return (idx, f"open boundary cycle: dangling boundary edge ({int(a)}, {int(b)})")
        if int(a) not in ends:
            return (idx, f"open boundary cycle: node {int(a)} is never reached")
    visited = 0
    current = 0
    while True:
        visited += 1
        current = successor[int(edges[current, 1])]
        if current == 0:
            break
        if visited > len(edges):
            return (current, "open boundary cycle: edges do not close")
    if visited != len(edges):
        return (0, "open boundary cycle: boundary splits into several loops")
    return None


def order_cycle(edges: NDArray) -> NDArray:
    """Reorder directed boundary edges so consecutive edges share a node, starting at the lowest node."""
    successor = {int(a): i for i, (a, _) in enumerate(edges)}
    start = successor[int(edges[:, 0].min())]
    ordered = [start]
    while len(ordered) < len(edges):
        ordered.append(successor[int(edges[ordered[-1], 1])])
    return edges[ordered]


class Mesh:
    """
    Immutable conforming triangulation with boundary topology.

    Attributes:
        nodes: (n_nodes, 2) coordinates.
        triangles: (n_triangles, 3) counterclockwise node indices.
        boundary_edges: (n_edges, 2) directed edges forming the boundary cycle.
        arc_mid_angle: angle in [0, 2π) of every boundary edge midpoint.
        boundary_node_flags: per-node boolean.
        mesh_id: short digest identifying the geometry.
    """

    def __init__(self, nodes: NDArray, triangles: NDArray,
                 boundary_edges: Optional[NDArray] = None, validate: bool = True):
        self.nodes = np.ascontiguousarray(nodes, dtype=np.float64)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if boundary_edges is None:
            edges, _ = free_edges(self.triangles)
            boundary_edges = order_cycle(edges)
        self.boundary_edges = np.ascontiguousarray(boundary_edges, dtype=np.int64)
        if validate:
            self.validate()
            self.boundary_edges = order_cycle(self.boundary_edges)

        mid = 0.5 * (self.nodes[self.boundary_edges[:, 0]] + self.nodes[self.boundary_edges[:, 1]])
        self.arc_mid_angle = np.mod(np.arctan2(mid[:, 1], mid[:, 0]), 2.0 * np.pi)
        self.boundary_node_flags = np.zeros(len(self.nodes), dtype=bool)
        self.boundary_node_flags[self.boundary_edges.ravel()] = True

        areas = signed_areas(self.nodes, self.triangles)
        self.element_areas = areas
        self.centroids = self.nodes[self.triangles].mean(axis=1)
        edge_vec = self.nodes[self.boundary_edges[:, 1]] - self.nodes[self.boundary_edges[:, 0]]
        self.edge_lengths = np.hypot(edge_vec[:, 0], edge_vec[:, 1])

        digest = hashlib.md5()
        digest.update(self.nodes.tobytes())
        digest.update(self.triangles.tobytes())
        self.mesh_id = digest.hexdigest()[:12]

        for array in (self.nodes, self.triangles, self.boundary_edges, self.arc_mid_angle,
                      self.boundary_node_flags, self.element_areas, self.centroids, self.edge_lengths):
            array.flags.writeable = False
        self._boundary_tree: Optional[cKDTree] = None

    def __repr__(self) -> str:
        return (f"{self.__class__.__name__}(nodes={self.n_nodes}, triangles={self.n_triangles}, "
                f"boundary_edges={len(self.boundary_edges)}, id={self.mesh_id})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mesh):
            return NotImplemented
        return (np.array_equal(self.nodes, other.nodes)
                and np.array_equal(self.triangles, other.triangles)
                and np.array_equal(self.boundary_edges, other.boundary_edges))

    __hash__ = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def boundary_nodes(self) -> NDArray:
        """Boundary node indices in boundary-cycle order."""
        return self.boundary_edges[:, 0]

    @property
    def boundary_angles(self) -> NDArray:
        """Polar angle in [0, 2π) of every boundary node, in cycle order."""
        pts = self.nodes[self.boundary_nodes]
        return np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2.0 * np.pi)

    def validate(self) -> None:
        """Raise MeshError if any structural invariant is violated."""
        n = len(self.nodes)
        if not np.all(np.isfinite(self.nodes)):
            raise MeshError("node coordinates must be finite")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must be an (n, 3) array")
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= n):
            raise MeshError("triangle node index out of range")
        if self.boundary_edges.size and (self.boundary_edges.min() < 0 or self.boundary_edges.max() >= n):
            raise MeshError("boundary edge node index out of range")
        bad = first_inverted_triangle(self.nodes, self.triangles)
        if bad is not None:
            raise MeshError(f"triangle {bad} is not counterclockwise (non-positive area)")
        defect = cycle_defect(self.boundary_edges)
        if defect is not None:
            raise MeshError(defect[1])
        edges, counts = free_edges(self.triangles)
        if np.any(counts > 2):
            raise MeshError("non-manifold mesh: an edge is shared by more than two triangles")
        expected = {tuple(e) for e in np.sort(edges, axis=1).tolist()}
        given = {tuple(e) for e in np.sort(self.boundary_edges, axis=1).tolist()}
        if expected != given:
            raise MeshError("boundary edges do not match the free edges of the triangulation")

    def max_edge_length(self) -> float:
        """Longest edge over all triangles."""
        p = self.nodes[self.triangles]
        lengths = np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2)
        return float(lengths.max())

    def distance_to_boundary(self, points: NDArray) -> NDArray:
        """Euclidean distance from each point to the polygonal boundary."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if self._boundary_tree is None:
            self._boundary_tree = cKDTree(self.nodes[self.boundary_nodes])
        _, nearest = self._boundary_tree.query(points)
        n_edges = len(self.boundary_edges)
        best = np.full(len(points), np.inf)
        # the closest edge is incident to the closest boundary node (previous or next in the cycle)
        for candidate in (nearest, (nearest - 1) % n_edges):
            a = self.nodes[self.boundary_edges[candidate, 0]]
            b = self.nodes[self.boundary_edges[candidate, 1]]
            ab = b - a
            t = np.clip(np.einsum("ij,ij->i", points - a, ab) / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
            proj = a + t[:, None] * ab
            best = np.minimum(best, np.linalg.norm(points - proj, axis=1))
        return best

    def locate(self, point) -> Tuple[int, NDArray]:
        """
        Find the triangle containing a point.

        Returns:
            (triangle index, barycentric coordinates)

        Raises:
            MeshError: if the point lies outside the mesh.
        """
        x, y = float(point[0]), float(point[1])
        p = self.nodes[self.triangles]
        det = self.element_areas * 2.0
        l1 = ((p[:, 2, 0] - p[:, 0, 0]) * (p[:, 0, 1] - y) - (p[:, 0, 0] - x) * (p[:, 2, 1] - p[:, 0, 1])) / det
        l2 = ((p[:, 0, 0] - x) * (p[:, 1, 1] - p[:, 0, 1]) - (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 0, 1] - y)) / det
        l0 = 1.0 - l1 - l2
        lam = np.stack([l0, l1, l2], axis=1)
        inside = np.flatnonzero(np.all(lam >= -1e-12, axis=1))
        if inside.size == 0:
            raise MeshError(f"point ({x}, {y}) lies outside the mesh")
        tri = int(inside[0])
        return tri, lam[tri]

    def interpolate(self, values: NDArray, point) -> float:
        """Evaluate the P1 interpolant of nodal values at a point."""
        tri, lam = self.locate(point)
        return float(np.dot(lam, np.asarray(values)[self.triangles[tri]]))

    def contains_points(self, points: NDArray) -> NDArray:
        """Whether each point lies strictly inside the boundary polygon."""
        outline = MplPath(self.nodes[self.boundary_nodes])
        return outline.contains_points(np.atleast_2d(np.asarray(points, dtype=np.float64)))


def _seed_rotation(refinement_seed: int) -> float:
    """Rotation of the ring structure; seed 0 keeps the mesh symmetric about the x axis."""
    if refinement_seed == 0:
        return 0.0
    return float(np.mod(refinement_seed * _GOLDEN, 1.0) * np.pi / 3.0)


def _ring_start(j: int) -> int:
    return 1 + 3 * j * (j - 1)


def _disk_connectivity(n_rings: int) -> NDArray:
    """Triangles of the hexagonal ring structure with n_rings rings around the center node."""
    triangles: List[Tuple[int, int, int]] = []
    for m in range(6):
        triangles.append((0, _ring_start(1) + m, _ring_start(1) + (m + 1) % 6))
    for j in range(2, n_rings + 1):
        outer0, inner0 = _ring_start(j), _ring_start(j - 1)
        n_outer, n_inner = 6 * j, 6 * (j - 1)
        for sector in range(6):
            outer = [outer0 + (sector * j + k) % n_outer for k in range(j + 1)]
            inner = [inner0 + (sector * (j - 1) + k) % n_inner for k in range(j)]
            for k in range(j):
                triangles.append((outer[k], outer[k + 1], inner[k]))
            for k in range(j - 1):
                triangles.append((inner[k], outer[k + 1], inner[k + 1]))
    return np.asarray(triangles, dtype=np.int64)


def _laplacian_smooth(nodes: NDArray, triangles: NDArray, fixed: NDArray,
                      relaxation: float = SMOOTHING_RELAXATION) -> NDArray:
    """One relaxed Laplacian smoothing pass over the free nodes."""
    n = len(nodes)
    rows = np.concatenate([triangles[:, 0], triangles[:, 1], triangles[:, 2],
                           triangles[:, 1], triangles[:, 2], triangles[:, 0]])
    cols = np.concatenate([triangles[:, 1], triangles[:, 2], triangles[:, 0],
                           triangles[:, 0], triangles[:, 1], triangles[:, 2]])
    adjacency = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    adjacency.data[:] = 1.0
    degree = np.asarray(adjacency.sum(axis=1)).ravel()
    average = (adjacency @ nodes) / degree[:, None]
    smoothed = nodes + relaxation * (average - nodes)
    smoothed[fixed] = nodes[fixed]
    return smoothed


def generate_disk_mesh(target_h: float, refinement_seed: int = 0,
                       max_nodes: int = DEFAULT_MAX_NODES) -> Mesh:
    """
    Generate a mesh of the unit disk B(0,1).

    Args:
        target_h: target edge length, 0 < target_h < 1
        refinement_seed: selects the rotation of the ring structure
        max_nodes: node count cap

    Returns:
        Mesh whose longest edge is at most 1.5 * target_h
    """
    if not 0.0 < target_h < 1.0:
        raise PreconditionError(f"target_h must lie in (0, 1), got {target_h}")
    n_rings = max(1, int(np.ceil(1.0 / (RING_SPACING_FACTOR * target_h))))
    n_nodes = 1 + 3 * n_rings * (n_rings + 1)
    if n_nodes > max_nodes:
        raise MeshError(f"target_h={target_h} needs {n_nodes} nodes, above the cap of {max_nodes}")

    rotation = _seed_rotation(refinement_seed)
    nodes = np.zeros((n_nodes, 2))
    for j in range(1, n_rings + 1):
        radius = 1.0 if j == n_rings else j / n_rings
        theta = rotation + 2.0 * np.pi * np.arange(6 * j) / (6 * j)
        start = _ring_start(j)
        nodes[start:start + 6 * j, 0] = radius * np.cos(theta)
        nodes[start:start + 6 * j, 1] = radius * np.sin(theta)

    triangles = _disk_connectivity(n_rings)
    fixed = np.zeros(n_nodes, dtype=bool)
    fixed[_ring_start(n_rings):] = True
    nodes = _laplacian_smooth(nodes, triangles, fixed)

    mesh = Mesh(nodes, triangles)
    _LOGGER.info("Generated disk mesh: h=%.4g seed=%d rings=%d nodes=%d triangles=%d",
                 target_h, refinement_seed, n_rings, mesh.n_nodes, mesh.n_triangles)
    return mesh
