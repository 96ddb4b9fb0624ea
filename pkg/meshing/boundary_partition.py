"""
Boundary partitions Γ = ∪ Γ_i of the unit circle into disjoint arcs.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from numpy.typing import NDArray

from exceptions import PartitionError
from .disk_mesh import Mesh

TWO_PI = 2.0 * np.pi
_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryPartition:
    """Disjoint arcs (theta_start, theta_end) with theta_start in [0, 2π), sorted by start."""

    arcs: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        if not self.arcs:
            raise PartitionError("a partition needs at least one arc")
        lengths = self.lengths()
        if np.any(lengths <= 0.0) or np.any(lengths > TWO_PI + _TOL):
            raise PartitionError("arc lengths must lie in (0, 2π]")
        if lengths.sum() > TWO_PI + 1e-9:
            raise PartitionError("arcs overlap: total length exceeds 2π")
        starts = [a[0] for a in self.arcs]
        if starts != sorted(starts):
            raise PartitionError("arcs must be stored in increasing angle")
        for (s0, e0), (s1, _) in zip(self.arcs, self.arcs[1:]):
            if s1 < e0 - 1e-9:
                raise PartitionError(f"arcs [{s0}, {e0}] and [{s1}, ...] overlap")
        if len(self.arcs) > 1 and self.arcs[-1][1] - TWO_PI > self.arcs[0][0] + 1e-9:
            raise PartitionError("last arc wraps onto the first one")

    def lengths(self) -> NDArray:
        return np.array([end - start for start, end in self.arcs])

    def measure(self) -> float:
        """Total angular length of the arcs (equal to arc length on the unit circle)."""
        return float(self.lengths().sum())

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    def contains(self, angles) -> NDArray:
        """Membership of angles in the half-open arcs [start, end)."""
        theta = np.mod(np.asarray(angles, dtype=np.float64), TWO_PI)
        inside = np.zeros(theta.shape, dtype=bool)
        for start, end in self.arcs:
            length = end - start
            if length >= TWO_PI - _TOL:
                return np.ones(theta.shape, dtype=bool)
            inside |= np.mod(theta - start, TWO_PI) < length
        return inside

    def edge_mask(self, mesh: Mesh) -> NDArray:
        """edge_mask[e] is true iff the midpoint angle of boundary edge e lies in an arc."""
        return self.contains(mesh.arc_mid_angle)

    def split(self) -> List["BoundaryPartition"]:
        """One single-arc partition per Γ_i."""
        return [BoundaryPartition(arcs=(arc,)) for arc in self.arcs]

    def to_dict(self) -> dict:
        return {"arcs": [[float(s), float(e)] for s, e in self.arcs]}


def build_partition(n_arcs: int, arc_half_length_fraction: float, offset: float = 0.0) -> BoundaryPartition:
    """
    Equispaced arcs of length 2π·ℓ with ℓ = 2·arc_half_length_fraction.

    Arc i is centered at offset + 2πi/n_arcs.
    """
    if n_arcs < 1:
        raise PartitionError(f"n_arcs must be >= 1, got {n_arcs}")
    if arc_half_length_fraction <= 0.0:
        raise PartitionError("arc_half_length_fraction must be positive")
    if arc_half_length_fraction * n_arcs > 0.5 + _TOL:
        raise PartitionError(
            f"{n_arcs} arcs of length 2π·{2 * arc_half_length_fraction:g} overlap")
    length = min(TWO_PI * 2.0 * arc_half_length_fraction, TWO_PI)
    arcs = []
    for i in range(n_arcs):
        center = offset + TWO_PI * i / n_arcs
        start = float(np.mod(center - 0.5 * length, TWO_PI))
        arcs.append((start, start + length))
    arcs.sort()
    return BoundaryPartition(arcs=tuple(arcs))


def partition_from_ell(n_arcs: int, ell: float, offset: float = 0.0) -> BoundaryPartition:
    """Convenience form taking the arc length fraction ℓ directly."""
    return build_partition(n_arcs, 0.5 * ell, offset)
