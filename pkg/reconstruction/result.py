"""
Measurements fed to the reconstruction algorithms and the result object they return.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from exceptions import PreconditionError
from fem import SourceTerm
from meshing import BoundaryPartition
from topo import Detection, GradientField, PolarizationTensor

# j(0) as computed by reconstruction.misfit, without a factor ½
MISFIT_FORMULA = "∫_Γ (U − u_meas)²"


@dataclass(frozen=True, eq=False)
class Measurement:
    """
    Boundary data u_meas produced by one source term.

    boundary_data holds one value per boundary node of the reconstruction mesh in
    boundary-cycle order; mask restricts the data to the arcs Γ_i.
    """

    source: SourceTerm
    boundary_data: NDArray
    mask: Optional[BoundaryPartition] = None
    weight_override: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        data = np.array(self.boundary_data, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(data)):
            raise PreconditionError("measurement data must be finite")
        if self.weight_override is not None and not self.weight_override > 0.0:
            raise PreconditionError(f"weight override must be positive, got {self.weight_override}")
        data.flags.writeable = False
        object.__setattr__(self, "boundary_data", data)
        if not self.label:
            object.__setattr__(self, "label", self.source.key)

    def with_mask(self, mask: Optional[BoundaryPartition], label: str = "") -> "Measurement":
        return Measurement(self.source, self.boundary_data, mask, self.weight_override, label or self.label)

    def covers_full_boundary(self) -> bool:
        return self.mask is None or self.mask.measure() >= 2.0 * np.pi - 1e-12

    def to_dict(self) -> Dict[str, Any]:
        return {
            'label': self.label,
            'source': self.source.key,
            'mask': self.mask.to_dict() if self.mask is not None else None,
            'weight_override': self.weight_override,
            'n_values': int(len(self.boundary_data)),
        }


@dataclass
class ReconstructionResult:
    """Standardized result object for a reconstruction run."""

    algorithm: str
    detection: Detection
    aggregated_field: GradientField
    per_measurement_fields: List[GradientField]
    weights: List[float]
    misfits: List[float]
    labels: List[str]
    sources: List[str]
    tensor: PolarizationTensor
    dropped: List[int] = field(default_factory=list)
    relative_residuals: List[float] = field(default_factory=list)
    n_forward_solves: int = 0
    n_adjoint_solves: int = 0
    warnings: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    rounds: Optional[List[Dict[str, Any]]] = None

    @property
    def detected_center(self) -> Tuple[float, float]:
        return self.detection.point

    @property
    def detected_node(self) -> int:
        return self.detection.node

    @property
    def boundary_violation_flag(self) -> bool:
        return self.detection.boundary_violation

    @property
    def flat_field(self) -> bool:
        return self.detection.flat

    @property
    def min_values(self) -> List[float]:
        return [f.min_value for f in self.per_measurement_fields]

    @property
    def conventions(self) -> Dict[str, Any]:
        """Normalisation of the reported G values and misfits."""
        area = float((self.tensor.parameters or {}).get('area', 1.0))
        gradient = "per unit inclusion area" if area == 1.0 else f"for inclusion area {area:g}"
        return {'gradient': gradient, 'tensor_area': area, 'misfit': MISFIT_FORMULA}

    def error_to(self, true_center: Sequence[float]) -> float:
        """Euclidean distance between the detected and a reference center."""
        return float(np.hypot(self.detected_center[0] - true_center[0],
                              self.detected_center[1] - true_center[1]))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format (timings excluded)."""
        per_measurement = []
        for i, label in enumerate(self.labels):
            per_measurement.append({
                'label': label,
                'source': self.sources[i],
                'misfit': self.misfits[i],
                'relative_residual': self.relative_residuals[i] if self.relative_residuals else None,
                'min_value': self.per_measurement_fields[i].min_value,
                'min_node': self.per_measurement_fields[i].min_node,
                'weight': self.weights[i],
                'dropped': i in self.dropped,
            })
        data = {
            'algorithm': self.algorithm,
            'detected_center': list(self.detected_center),
            'detection': self.detection.to_dict(),
            'boundary_violation': self.boundary_violation_flag,
            'flat_field': self.flat_field,
            'measurements': per_measurement,
            'tensor': self.tensor.to_dict(),
            'conventions': self.conventions,
            'n_forward_solves': self.n_forward_solves,
            'n_adjoint_solves': self.n_adjoint_solves,
            'warnings': list(self.warnings),
        }
        if self.rounds is not None:
            data['rounds'] = self.rounds
        return data
