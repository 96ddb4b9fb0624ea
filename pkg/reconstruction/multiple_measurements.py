"""
Reconstruction from several full-boundary measurements produced by different sources.
"""
import logging
import time
from typing import Dict, List, Optional, Sequence

import numpy as np

from exceptions import PreconditionError
from meshing import Mesh
from .base_algorithm import BaseAlgorithm, MeasurementOutcome, ReconstructionConfig
from .cache import UnperturbedCache
from .result import Measurement, ReconstructionResult

_LOGGER = logging.getLogger(__name__)


class MultipleMeasurementsAlgorithm(BaseAlgorithm):
    """
    One unperturbed state U_i and adjoint state W_i per source; the fields G_i are
    combined with weights α_i = (j_i / |min G_i|) / Σ_j (j_j / |min G_j|).
    """

    def __init__(self):
        super().__init__("alg2", "Single inclusion, many measurements (one per source term)")

    def _prepare(self, mesh: Mesh, measurements: Sequence[Measurement]) -> None:
        self._check_measurements(mesh, measurements)
        for m in measurements:
            if not m.covers_full_boundary():
                raise PreconditionError(f"alg2 needs full-boundary measurements; '{m.label}' is masked")
        keys = [m.source.key for m in measurements]
        if len(set(keys)) != len(keys):
            _LOGGER.warning("Several measurements share a source term: %s", ", ".join(keys))

    def _outcomes(self, mesh: Mesh, measurements: Sequence[Measurement], cfg: ReconstructionConfig,
                  cache: UnperturbedCache, notes: List[str], timings: Dict[str, float]):
        tensor = cfg.tensor()

        def pipeline(m: Measurement):
            start = time.time()
            solution, solved = self._unperturbed(mesh, m, cfg, cache)
            middle = time.time()
            outcome = self._measurement_pipeline(mesh, solution, m, cfg, tensor)
            return outcome, solved, solution.warnings, middle - start, time.time() - middle

        results = self._map(cfg, pipeline, list(measurements))
        outcomes: List[MeasurementOutcome] = []
        n_forward = 0
        for outcome, solved, solver_notes, t_forward, t_adjoint in results:
            outcomes.append(outcome)
            n_forward += int(solved)
            notes.extend(solver_notes)
            timings['unperturbed'] = timings.get('unperturbed', 0.0) + t_forward
            timings['adjoint_and_gradient'] = timings.get('adjoint_and_gradient', 0.0) + t_adjoint
        return tensor, outcomes, n_forward

    def run(self, mesh: Mesh, measurements: Sequence[Measurement], cfg: ReconstructionConfig,
            cache: Optional[UnperturbedCache] = None) -> ReconstructionResult:
        self._prepare(mesh, measurements)
        cache = cache if cache is not None else UnperturbedCache()
        notes: List[str] = []
        timings: Dict[str, float] = {}
        tensor, outcomes, n_forward = self._outcomes(mesh, measurements, cfg, cache, notes, timings)
        return self._result(mesh, measurements, outcomes, cfg, tensor, n_forward, notes, timings)

    def run_incremental(self, mesh: Mesh, measurements: Sequence[Measurement], cfg: ReconstructionConfig,
                        cache: Optional[UnperturbedCache] = None) -> ReconstructionResult:
        """
        Add measurements one at a time and stop once the detected center moves
        less than cfg.stop_tolerance between two rounds.

        The returned result covers the measurements used so far and lists every
        round's center in `rounds`.
        """
        self._prepare(mesh, measurements)
        cache = cache if cache is not None else UnperturbedCache()
        tensor = cfg.tensor()
        notes: List[str] = []
        timings: Dict[str, float] = {}
        outcomes: List[MeasurementOutcome] = []
        rounds = []
        n_forward = 0
        result = None
        for n, m in enumerate(measurements, start=1):
            start = time.time()
            solution, solved = self._unperturbed(mesh, m, cfg, cache)
            n_forward += int(solved)
            notes.extend(solution.warnings)
            outcomes.append(self._measurement_pipeline(mesh, solution, m, cfg, tensor))
            timings['round_%d' % n] = time.time() - start

            previous = result
            result = self._result(mesh, measurements[:n], outcomes, cfg, tensor, n_forward, list(notes), dict(timings))
            movement = None
            if previous is not None:
                movement = float(np.hypot(result.detected_center[0] - previous.detected_center[0],
                                          result.detected_center[1] - previous.detected_center[1]))
            rounds.append({'n_measurements': n, 'detected_center': list(result.detected_center),
                           'movement': movement})
            if movement is not None and movement < cfg.stop_tolerance:
                _LOGGER.info("Incremental reconstruction stopped after %d measurements (moved %.4f)", n, movement)
                break
        result.rounds = rounds
        return result
