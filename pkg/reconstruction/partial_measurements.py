"""
Reconstruction from one source observed on disjoint boundary arcs Γ_i.
"""
import time
from typing import Dict, List, Optional, Sequence

import numpy as np

from exceptions import PreconditionError
from meshing import Mesh
from .base_algorithm import BaseAlgorithm, ReconstructionConfig
from .cache import UnperturbedCache
from .result import Measurement, ReconstructionResult


class PartialMeasurementsAlgorithm(BaseAlgorithm):
    """One unperturbed solve, then one adjoint solve per arc with datum (U − u_meas) χ_Γi."""

    def __init__(self):
        super().__init__("alg3", "Single inclusion, partial measurements on disjoint arcs")

    def _check_partial(self, mesh: Mesh, measurements: Sequence[Measurement]) -> None:
        self._check_measurements(mesh, measurements)
        keys = {m.source.key for m in measurements}
        if len(keys) != 1:
            raise PreconditionError(f"alg3 needs a single source term, got {sorted(keys)}")
        covered = np.zeros(len(mesh.boundary_edges), dtype=int)
        for m in measurements:
            covered += m.mask.edge_mask(mesh) if m.mask is not None else 1
        if np.any(covered > 1):
            raise PreconditionError("alg3 masks must be pairwise disjoint")

    def run(self, mesh: Mesh, measurements: Sequence[Measurement], cfg: ReconstructionConfig,
            cache: Optional[UnperturbedCache] = None) -> ReconstructionResult:
        self._check_partial(mesh, measurements)
        cache = cache if cache is not None else UnperturbedCache()
        tensor = cfg.tensor()
        notes: List[str] = []
        timings: Dict[str, float] = {}

        start = time.time()
        solution, solved = self._unperturbed(mesh, measurements[0], cfg, cache)
        timings['unperturbed'] = time.time() - start
        notes.extend(solution.warnings)

        start = time.time()
        outcomes = self._map(cfg, lambda m: self._measurement_pipeline(mesh, solution, m, cfg, tensor),
                             list(measurements))
        timings['adjoint_and_gradient'] = time.time() - start
        return self._result(mesh, measurements, outcomes, cfg, tensor, int(solved), notes, timings)


def split_measurement(m: Measurement) -> List[Measurement]:
    """One measurement per arc of m's mask, sharing the boundary data."""
    if m.mask is None:
        return [m]
    return [m.with_mask(arc, f"{m.label}[{i}]") for i, arc in enumerate(m.mask.split())]
