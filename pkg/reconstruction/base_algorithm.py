"""
Base interface for the reconstruction algorithms.

Every algorithm runs the same per-measurement pipeline (unperturbed state, misfit,
adjoint state, topological gradient) and differs in how measurements, sources and
masks are combined.
"""
import logging
import time
import warnings
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from exceptions import FieldMismatchError, MeasurementDroppedWarning, PreconditionError, ToolkitError
from fem import DEFAULT_K_IN, InclusionSpec, NodalField, boundary_l2_squared
from meshing import Mesh
from solvers import ForwardSolution, NewtonConfig, boundary_trace, solve_adjoint
from topo import (DEFAULT_MARGIN, GradientField, PolarizationTensor, argmin_interior, gradient_field,
                  tensor_for_inclusion, topological_gradient)
from .cache import UnperturbedCache
from .misfit import misfit
from .result import Measurement, ReconstructionResult

_LOGGER = logging.getLogger(__name__)

# inclusion-free data still differ from U by the discretisation error, O(h²) relative
FLAT_TOLERANCE = 0.5


@dataclass(frozen=True)
class ReconstructionConfig:
    """
    Parameters shared by all algorithms.

    Attributes:
        k_in: conductivity assumed inside the inclusion
        margin: nodes closer than this to ∂Ω are excluded from the minimum search
        newton: forward solver settings
        tensor_shape: circle or ellipse
        tensor_axis: ellipse major-axis direction
        tensor_ratio: ellipse semi-axis ratio
        tensor_area: |D| folded into the tensor (1 reports G per unit area)
        uniform_weights: use α_i = 1/N instead of the misfit-based weights
        stop_tolerance: incremental mode stops when the center moves less than this
        flat_tolerance: the data count as inclusion-free when every relative residual
            ‖U − u_meas‖ / ‖u_meas‖ on Γ is at most flat_tolerance · h², h the longest mesh edge
        workers: threads for the per-measurement pipelines
    """

    k_in: float = DEFAULT_K_IN
    margin: float = DEFAULT_MARGIN
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    tensor_shape: str = "circle"
    tensor_axis: Tuple[float, float] = (1.0, 0.0)
    tensor_ratio: float = 1.0
    tensor_area: float = 1.0
    uniform_weights: bool = False
    stop_tolerance: float = 0.02
    flat_tolerance: float = FLAT_TOLERANCE
    workers: int = 1

    def __post_init__(self):
        if not self.k_in > 0.0:
            raise PreconditionError(f"k_in must be positive, got {self.k_in}")
        if self.margin < 0.0:
            raise PreconditionError(f"margin must be non-negative, got {self.margin}")
        if self.tensor_shape not in ("circle", "ellipse"):
            raise PreconditionError(f"tensor_shape must be circle or ellipse, got {self.tensor_shape}")
        self.tensor()
        if self.flat_tolerance < 0.0:
            raise PreconditionError(f"flat_tolerance must be non-negative, got {self.flat_tolerance}")
        if self.workers < 1:
            raise PreconditionError(f"workers must be >= 1, got {self.workers}")

    def reference_shape(self) -> InclusionSpec:
        """Unit-size shape at the origin whose tensor evaluates G."""
        if self.tensor_shape == "ellipse":
            return InclusionSpec.ellipse((0.0, 0.0), 1.0, self.tensor_axis, self.tensor_ratio, self.k_in)
        return InclusionSpec.circle((0.0, 0.0), 1.0, self.k_in)

    def tensor(self) -> PolarizationTensor:
        return tensor_for_inclusion(self.reference_shape(), area=self.tensor_area)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'k_in': self.k_in,
            'margin': self.margin,
            'newton': self.newton.to_dict(),
            'tensor_shape': self.tensor_shape,
            'tensor_axis': list(self.tensor_axis),
            'tensor_ratio': self.tensor_ratio,
            'tensor_area': self.tensor_area,
            'uniform_weights': self.uniform_weights,
            'stop_tolerance': self.stop_tolerance,
            'flat_tolerance': self.flat_tolerance,
            'workers': self.workers,
        }


@dataclass
class MeasurementOutcome:
    """Per-measurement pipeline output."""

    field: GradientField
    misfit: float
    relative_residual: float
    W: NodalField


@contextmanager
def stage(name: str):
    """Label ToolkitErrors raised inside with the pipeline stage."""
    try:
        yield
    except ToolkitError as e:
        if not getattr(e, "stage", None):
            e.stage = name
        _LOGGER.error("Stage '%s' failed: %s", name, e)
        raise


class BaseAlgorithm(ABC):
    """Abstract base class for all reconstruction algorithms."""

    def __init__(self, name: str, description: str):
        self.name = name
        self.description = description

    @abstractmethod
    def run(self, mesh: Mesh, measurements: Sequence[Measurement], cfg: ReconstructionConfig,
            cache: Optional[UnperturbedCache] = None) -> ReconstructionResult:
        """
        Reconstruct the inclusion center.

        Args:
            mesh: reconstruction mesh
            measurements: boundary data with their sources and masks
            cfg: algorithm parameters
            cache: shared unperturbed solutions

        Returns:
            ReconstructionResult
        """
        pass

    def _check_measurements(self, mesh: Mesh, measurements: Sequence[Measurement]) -> None:
        if not measurements:
            raise PreconditionError(f"{self.name} needs at least one measurement")
        n_boundary = len(mesh.boundary_nodes)
        for m in measurements:
            if len(m.boundary_data) != n_boundary:
                raise FieldMismatchError(
                    f"measurement '{m.label}' has {len(m.boundary_data)} values, "
                    f"mesh {mesh.mesh_id} has {n_boundary} boundary nodes")
        overridden = [m.label for m in measurements if m.weight_override is not None]
        if overridden and len(overridden) < len(measurements):
            raise PreconditionError(
                f"weight overrides must be set for all measurements or none, got {len(overridden)} of "
                f"{len(measurements)} ({', '.join(overridden)})")

    def _unperturbed(self, mesh: Mesh, m: Measurement, cfg: ReconstructionConfig,
                     cache: UnperturbedCache) -> Tuple[ForwardSolution, bool]:
        with stage(f"unperturbed solve ({m.source.key})"):
            return cache.get_or_solve(mesh, m.source, cfg.newton)

    def _measurement_pipeline(self, mesh: Mesh, solution: ForwardSolution, m: Measurement,
                              cfg: ReconstructionConfig, tensor: PolarizationTensor) -> MeasurementOutcome:
        U = solution.u
        trace = boundary_trace(mesh, U).values
        j = misfit(mesh, trace, m)
        with stage(f"adjoint solve ({m.label})"):
            W = solve_adjoint(mesh, U, trace - m.boundary_data, m.mask)
        with stage(f"topological gradient ({m.label})"):
            G = topological_gradient(mesh, U, W, cfg.k_in, tensor, cfg.margin)
        data_norm = boundary_l2_squared(mesh, m.boundary_data, m.mask)
        if data_norm > 0.0:
            relative = float(np.sqrt(j / data_norm))
        else:
            relative = 0.0 if j == 0.0 else float("inf")
        _LOGGER.debug("Measurement %s: misfit %.4e (relative residual %.2e), min G %.4e at node %d",
                      m.label, j, relative, G.min_value, G.min_node)
        return MeasurementOutcome(G, j, relative, W)

    def _map(self, cfg: ReconstructionConfig, fn, items: Sequence) -> List:
        """Apply fn to every item, in order, on cfg.workers threads."""
        if cfg.workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                return list(pool.map(fn, items))
        return [fn(item) for item in items]

    def _weights(self, measurements: Sequence[Measurement], outcomes: Sequence[MeasurementOutcome],
                 cfg: ReconstructionConfig, notes: List[str]) -> Tuple[List[float], List[int], bool]:
        """
        Aggregation weights α_i > 0 with Σ α_i = 1.

        α_i ∝ j_i / |min G_i| unless every measurement carries an override;
        measurements with a vanishing minimum are dropped. When every measurement
        drops, uniform weights are used and the field is reported flat.

        Returns:
            (weights aligned with measurements, dropped indices, all_dropped)
        """
        n = len(measurements)
        if all(m.weight_override is not None for m in measurements):
            raw = np.array([m.weight_override for m in measurements], dtype=np.float64)
            return list(raw / raw.sum()), [], False
        if cfg.uniform_weights:
            return [1.0 / n] * n, [], False

        raw = np.zeros(n)
        dropped: List[int] = []
        for i, (m, outcome) in enumerate(zip(measurements, outcomes)):
            depth = abs(outcome.field.min_value)
            ratio = outcome.misfit / depth if depth > 0.0 else 0.0
            if not (np.isfinite(ratio) and ratio > 0.0):
                message = f"measurement '{m.label}' dropped: min G = {outcome.field.min_value:.3e}, misfit = {outcome.misfit:.3e}"
                _LOGGER.warning(message)
                warnings.warn(message, MeasurementDroppedWarning)
                notes.append(message)
                dropped.append(i)
                continue
            raw[i] = ratio
        if len(dropped) == n:
            return [1.0 / n] * n, dropped, True
        return list(raw / raw.sum()), dropped, False

    def _aggregate(self, mesh: Mesh, outcomes: Sequence[MeasurementOutcome], weights: Sequence[float],
                   margin: float) -> GradientField:
        if len(outcomes) == 1:
            return outcomes[0].field
        total = np.zeros(mesh.n_nodes)
        for outcome, alpha in zip(outcomes, weights):
            if alpha > 0.0:
                total = total + alpha * outcome.field.values
        return gradient_field(mesh, total, margin)

    def _result(self, mesh: Mesh, measurements: Sequence[Measurement], outcomes: Sequence[MeasurementOutcome],
                cfg: ReconstructionConfig, tensor: PolarizationTensor, n_forward: int,
                notes: List[str], timings: Dict[str, float]) -> ReconstructionResult:
        start = time.time()
        weights, dropped, all_dropped = self._weights(measurements, outcomes, cfg, notes)
        aggregated = self._aggregate(mesh, outcomes, weights, cfg.margin)
        floor = cfg.flat_tolerance * mesh.max_edge_length() ** 2
        residuals = [o.relative_residual for o in outcomes]
        inclusion_free = all_dropped or max(residuals) <= floor
        detection = argmin_interior(aggregated, mesh, cfg.margin, flat=inclusion_free)
        if detection.flat:
            notes.append(f"flat topological gradient: data carries no inclusion signature "
                         f"(largest relative residual {max(residuals):.2e}, floor {floor:.2e})")
        elif detection.boundary_violation:
            notes.append("unrestricted minimum of G lies in the boundary band")
        timings['aggregation'] = timings.get('aggregation', 0.0) + time.time() - start
        _LOGGER.info("%s detected center (%.4f, %.4f) from %d measurement(s)",
                     self.name, detection.point[0], detection.point[1], len(measurements))
        return ReconstructionResult(
            algorithm=self.name,
            detection=detection,
            aggregated_field=aggregated,
            per_measurement_fields=[o.field for o in outcomes],
            weights=[float(w) for w in weights],
            misfits=[o.misfit for o in outcomes],
            labels=[m.label for m in measurements],
            sources=[m.source.key for m in measurements],
            tensor=tensor,
            dropped=dropped,
            relative_residuals=residuals,
            n_forward_solves=n_forward,
            n_adjoint_solves=len(outcomes),
            warnings=notes,
            timings=timings,
        )
