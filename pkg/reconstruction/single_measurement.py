"""
Reconstruction from a single measurement: one unperturbed solve, one adjoint solve.
"""
import time
from typing import Dict, List, Optional, Sequence

from exceptions import PreconditionError
from meshing import Mesh
from .base_algorithm import BaseAlgorithm, ReconstructionConfig
from .cache import UnperturbedCache
from .result import Measurement, ReconstructionResult


class SingleMeasurementAlgorithm(BaseAlgorithm):
    """Detection from one source term and its boundary data (full boundary or a mask Γ)."""

    def __init__(self):
        super().__init__("alg1", "Single inclusion, single measurement")

    def run(self, mesh: Mesh, measurements: Sequence[Measurement], cfg: ReconstructionConfig,
            cache: Optional[UnperturbedCache] = None) -> ReconstructionResult:
        if len(measurements) != 1:
            raise PreconditionError(f"alg1 takes exactly one measurement, got {len(measurements)}")
        self._check_measurements(mesh, measurements)
        cache = cache if cache is not None else UnperturbedCache()
        tensor = cfg.tensor()
        timings: Dict[str, float] = {}
        notes: List[str] = []

        start = time.time()
        solution, solved = self._unperturbed(mesh, measurements[0], cfg, cache)
        timings['unperturbed'] = time.time() - start
        notes.extend(solution.warnings)

        start = time.time()
        outcome = self._measurement_pipeline(mesh, solution, measurements[0], cfg, tensor)
        timings['adjoint_and_gradient'] = time.time() - start
        return self._result(mesh, measurements, [outcome], cfg, tensor, int(solved), notes, timings)
