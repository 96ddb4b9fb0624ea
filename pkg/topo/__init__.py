# Topological Gradient Package
from .polarization import (PolarizationTensor, circle_tensor, ellipse_tensor,
                           tensor_for_inclusion)
from .gradient import (GradientField, Detection, recover_nodal_gradient, interior_nodes, gradient_field,
                       topological_gradient, argmin_interior, evaluate_at, DEFAULT_MARGIN)

__all__ = [
    'PolarizationTensor', 'circle_tensor', 'ellipse_tensor', 'tensor_for_inclusion',
    'GradientField', 'Detection', 'recover_nodal_gradient', 'interior_nodes', 'gradient_field',
    'topological_gradient', 'argmin_interior', 'evaluate_at', 'DEFAULT_MARGIN',
]
