"""
Inclusion geometries ω = z + εD and the per-element coefficient fields they induce.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
from matplotlib.path import Path as MplPath
from numpy.typing import NDArray

from exceptions import PreconditionError, SeparationError
from meshing import Mesh

_LOGGER = logging.getLogger(__name__)

DEFAULT_K_IN = 0.1
DEFAULT_MIN_SEPARATION = 0.05
SHAPES = ("circle", "ellipse", "polygon")

# reference L-shape; the origin lies inside its thick corner
LSHAPE_VERTICES: Tuple[Tuple[float, float], ...] = (
    (-0.3, -0.3), (0.9, -0.3), (0.9, 0.1), (0.1, 0.1), (0.1, 0.9), (-0.3, 0.9))


@dataclass(frozen=True)
class InclusionSpec:
    """
    Small inclusion of conductivity k_in.

    Attributes:
        shape: circle, ellipse or polygon
        center: z
        scale: ε (circle radius, ellipse semi-axis along `axis`, polygon scale)
        k_in: conductivity inside ω
        axis: unit direction ν of the ellipse major axis
        ratio: ellipse semi-axis ratio r in (0, 1]
        vertices: polygon vertices of the reference shape D, counterclockwise
    """

    shape: str
    center: Tuple[float, float]
    scale: float
    k_in: float = DEFAULT_K_IN
    axis: Tuple[float, float] = (1.0, 0.0)
    ratio: float = 1.0
    vertices: Optional[Tuple[Tuple[float, float], ...]] = field(default=None)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise PreconditionError(f"unknown inclusion shape '{self.shape}', expected one of {SHAPES}")
        if not self.scale > 0.0:
            raise PreconditionError(f"inclusion size must be positive, got {self.scale}")
        if not self.k_in > 0.0:
            raise PreconditionError(f"k_in must be positive, got {self.k_in}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if self.shape == "ellipse":
            norm = float(np.hypot(*self.axis))
            if abs(norm - 1.0) > 1e-9:
                raise PreconditionError(f"ellipse axis must be a unit vector, |ν| = {norm}")
            if not 0.0 < self.ratio <= 1.0:
                raise PreconditionError(f"ellipse ratio must lie in (0, 1], got {self.ratio}")
        if self.shape == "polygon":
            if self.vertices is None or len(self.vertices) < 3:
                raise PreconditionError("a polygon inclusion needs at least three vertices")
            verts = tuple((float(x), float(y)) for x, y in self.vertices)
            object.__setattr__(self, "vertices", verts)
            if _shoelace(np.asarray(verts)) <= 0.0:
                raise PreconditionError("polygon vertices must be counterclockwise")

    @classmethod
    def circle(cls, center, radius: float, k_in: float = DEFAULT_K_IN) -> "InclusionSpec":
        return cls("circle", tuple(center), radius, k_in)

    @classmethod
    def ellipse(cls, center, semi_major: float, axis=(1.0, 0.0), ratio: float = 1.0,
                k_in: float = DEFAULT_K_IN) -> "InclusionSpec":
        return cls("ellipse", tuple(center), semi_major, k_in, tuple(axis), ratio)

    @classmethod
    def polygon(cls, center, scale: float, vertices, k_in: float = DEFAULT_K_IN) -> "InclusionSpec":
        return cls("polygon", tuple(center), scale, k_in, vertices=tuple(map(tuple, vertices)))

    @classmethod
    def lshape(cls, center, scale: float, k_in: float = DEFAULT_K_IN) -> "InclusionSpec":
        return cls.polygon(center, scale, LSHAPE_VERTICES, k_in)

    @property
    def reference_area(self) -> float:
        """|D| of the unit-scaled shape."""
        if self.shape == "circle":
            return float(np.pi)
        if self.shape == "ellipse":
            return float(np.pi * self.ratio)
        return _shoelace(np.asarray(self.vertices))

    @property
    def area(self) -> float:
        """|ω| = ε² |D|."""
        return self.scale ** 2 * self.reference_area

    def contains(self, points: NDArray) -> NDArray:
        """Whether each point lies inside z + εD."""
        p = np.atleast_2d(np.asarray(points, dtype=np.float64)) - np.asarray(self.center)
        if self.shape == "circle":
            return p[:, 0] ** 2 + p[:, 1] ** 2 < self.scale ** 2
        if self.shape == "ellipse":
            nx, ny = self.axis
            along = p[:, 0] * nx + p[:, 1] * ny
            across = -p[:, 0] * ny + p[:, 1] * nx
            return (along / self.scale) ** 2 + (across / (self.scale * self.ratio)) ** 2 < 1.0
        return MplPath(np.asarray(self.vertices) * self.scale).contains_points(p)

    def outline(self, n_points: int = 256) -> NDArray:
        """Points sampled along ∂ω."""
        center = np.asarray(self.center)
        if self.shape in ("circle", "ellipse"):
            t = 2.0 * np.pi * np.arange(n_points) / n_points
            local = np.column_stack([np.cos(t), self.ratio * np.sin(t)]) * self.scale
            if self.shape == "ellipse":
                nx, ny = self.axis
                rot = np.array([[nx, -ny], [ny, nx]])
                local = local @ rot.T
            return center + local
        verts = np.asarray(self.vertices) * self.scale
        per_edge = max(2, n_points // len(verts))
        s = np.arange(per_edge)[:, None] / per_edge
        pieces = [a + s * (b - a) for a, b in zip(verts, np.roll(verts, -1, axis=0))]
        return center + np.concatenate(pieces)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'shape': self.shape,
            'center': list(self.center),
            'scale': self.scale,
            'k_in': self.k_in,
            'area': self.area,
        }
        if self.shape == "ellipse":
            data.update({'axis': list(self.axis), 'ratio': self.ratio})
        if self.shape == "polygon":
            data['vertices'] = [list(v) for v in self.vertices]
        return data


def _shoelace(vertices: NDArray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def inclusion_separation(mesh: Mesh, inclusion: InclusionSpec) -> float:
    """dist(ω, ∂Ω), negative when part of ω lies outside the mesh."""
    outline = inclusion.outline()
    distances = mesh.distance_to_boundary(outline)
    inside = mesh.contains_points(outline)
    if not np.all(inside):
        return -float(distances[~inside].max())
    return float(distances.min())


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """
    Per-element conductivity k_e and reaction mask χ_e.

    χ_e = 0 exactly where k_e = k_in; unresolved is set when the mesh places no
    centroid inside the inclusion.
    """

    conductivity: NDArray
    reaction_mask: NDArray
    mesh_id: str
    k_in: float = DEFAULT_K_IN
    unresolved: bool = False
    inclusion_area: float = 0.0

    @property
    def n_inside(self) -> int:
        return int(np.count_nonzero(self.reaction_mask == 0.0))


def classify_elements(mesh: Mesh, inclusion: Optional[InclusionSpec],
                      min_separation: float = DEFAULT_MIN_SEPARATION) -> CoefficientField:
    """
    Classify elements by centroid: k_e = k_in, χ_e = 0 inside z + εD, else k_e = 1, χ_e = 1.

    Raises:
        SeparationError: if the inclusion comes closer than min_separation to ∂Ω
    """
    n = mesh.n_triangles
    if inclusion is None:
        return CoefficientField(np.ones(n), np.ones(n), mesh.mesh_id, k_in=1.0)

    separation = inclusion_separation(mesh, inclusion)
    if separation < min_separation:
        raise SeparationError(
            f"inclusion at {inclusion.center} is {separation:.4g} from the boundary, "
            f"minimum separation is {min_separation:g}")

    inside = inclusion.contains(mesh.centroids)
    conductivity = np.where(inside, inclusion.k_in, 1.0)
    reaction_mask = np.where(inside, 0.0, 1.0)
    area = float(mesh.element_areas[inside].sum())
    unresolved = not bool(inside.any())
    if unresolved:
        _LOGGER.warning("Inclusion at %s (size %g) contains no element centroid; mesh too coarse",
                        inclusion.center, inclusion.scale)
    else:
        _LOGGER.debug("Classified %d elements inside the inclusion, area %.4g (exact %.4g)",
                      int(inside.sum()), area, inclusion.area)
    for array in (conductivity, reaction_mask):
        array.flags.writeable = False
    return CoefficientField(conductivity, reaction_mask, mesh.mesh_id, inclusion.k_in, unresolved, area)
