"""
Polarization tensors of small inclusions.
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from exceptions import PreconditionError
from fem import InclusionSpec


@dataclass(frozen=True, eq=False)
class PolarizationTensor:
    """Symmetric 2×2 tensor m with its provenance (circle, ellipse or custom)."""

    m: NDArray
    provenance: str
    parameters: Optional[Dict[str, Any]] = None

    def __post_init__(self):
        m = np.array(self.m, dtype=np.float64).reshape(2, 2)
        if not np.all(np.isfinite(m)):
            raise PreconditionError("polarization tensor must be finite")
        if m[0, 1] != m[1, 0]:
            raise PreconditionError("polarization tensor must be symmetric")
        m.flags.writeable = False
        object.__setattr__(self, "m", m)

    @property
    def is_isotropic(self) -> bool:
        return self.m[0, 1] == 0.0 and self.m[0, 0] == self.m[1, 1]

    def eigenvalues(self) -> NDArray:
        return np.linalg.eigvalsh(self.m)

    def to_dict(self) -> Dict[str, Any]:
        return {'m': self.m.tolist(), 'provenance': self.provenance, 'parameters': self.parameters or {}}


def _check_positive(k: float, area: float) -> None:
    if not k > 0.0:
        raise PreconditionError(f"conductivity ratio k must be positive, got {k}")
    if not area > 0.0:
        raise PreconditionError(f"area must be positive, got {area}")


def circle_tensor(k: float, area: float) -> PolarizationTensor:
    """m = 2|D|/(1+k) I."""
    _check_positive(k, area)
    value = 2.0 * area / (1.0 + k)
    return PolarizationTensor(value * np.eye(2), "circle", {'k': k, 'area': area})


def ellipse_tensor(k: float, axis_dir: Sequence[float], ratio: float, area: float) -> PolarizationTensor:
    """
    Tensor of an ellipse with major axis ν and semi-axis ratio r.

    m = R diag(|D|(1+r)/(1+kr), |D|(1+r)/(r+k)) Rᵀ with R = [[ν_x, −ν_y], [ν_y, ν_x]],
    so that ν is the eigenvector of the first entry and r = 1 gives circle_tensor.
    """
    _check_positive(k, area)
    nx, ny = float(axis_dir[0]), float(axis_dir[1])
    if abs(np.hypot(nx, ny) - 1.0) > 1e-9:
        raise PreconditionError(f"axis direction must be a unit vector, got ({nx}, {ny})")
    if not 0.0 < ratio <= 1.0:
        raise PreconditionError(f"ratio must lie in (0, 1], got {ratio}")
    along = area * (1.0 + ratio) / (1.0 + k * ratio)
    across = area * (1.0 + ratio) / (ratio + k)
    parameters = {'k': k, 'axis': [nx, ny], 'ratio': ratio, 'area': area}
    if along == across:
        return PolarizationTensor(along * np.eye(2), "ellipse", parameters)
    rot = np.array([[nx, -ny], [ny, nx]])
    m = rot @ np.diag([along, across]) @ rot.T
    m = 0.5 * (m + m.T)
    return PolarizationTensor(m, "ellipse", parameters)


def tensor_for_inclusion(inclusion: InclusionSpec, k: Optional[float] = None,
                         area: float = 1.0, assume_circle: bool = False) -> PolarizationTensor:
    """
    Tensor used to evaluate the topological gradient for a known or assumed shape.

    Circles and ellipses get their exact tensor; polygons (and any shape when
    assume_circle is set) get the circle tensor.

    Args:
        inclusion: shape description
        k: conductivity ratio, defaults to inclusion.k_in
        area: |D| folded into the tensor; 1 reports G per unit inclusion area
        assume_circle: use the circle tensor regardless of the shape
    """
    k = inclusion.k_in if k is None else k
    if inclusion.shape == "ellipse" and not assume_circle:
        return ellipse_tensor(k, inclusion.axis, inclusion.ratio, area)
    return circle_tensor(k, area)
