# Reconstruction Package
from typing import Optional, Sequence

from fem import SourceTerm
from meshing import Mesh
from .base_algorithm import BaseAlgorithm, ReconstructionConfig, MeasurementOutcome
from .cache import UnperturbedCache
from .misfit import misfit
from .result import Measurement, ReconstructionResult
from .single_measurement import SingleMeasurementAlgorithm
from .multiple_measurements import MultipleMeasurementsAlgorithm
from .partial_measurements import PartialMeasurementsAlgorithm, split_measurement
from .algorithm_manager import AlgorithmManager
from exceptions import PreconditionError


def run_algorithm1(mesh: Mesh, f: SourceTerm, m: Measurement, cfg: Optional[ReconstructionConfig] = None,
                   cache: Optional[UnperturbedCache] = None) -> ReconstructionResult:
    if m.source != f:
        raise PreconditionError(f"measurement source {m.source.key} differs from {f.key}")
    return SingleMeasurementAlgorithm().run(mesh, [m], cfg or ReconstructionConfig(), cache)


def run_algorithm2(mesh: Mesh, measurements: Sequence[Measurement], cfg: Optional[ReconstructionConfig] = None,
                   cache: Optional[UnperturbedCache] = None) -> ReconstructionResult:
    return MultipleMeasurementsAlgorithm().run(mesh, measurements, cfg or ReconstructionConfig(), cache)


def run_algorithm3(mesh: Mesh, f: SourceTerm, partial: Sequence[Measurement],
                   cfg: Optional[ReconstructionConfig] = None,
                   cache: Optional[UnperturbedCache] = None) -> ReconstructionResult:
    if any(m.source != f for m in partial):
        raise PreconditionError(f"every partial measurement must come from {f.key}")
    return PartialMeasurementsAlgorithm().run(mesh, partial, cfg or ReconstructionConfig(), cache)


__all__ = [
    'BaseAlgorithm', 'ReconstructionConfig', 'MeasurementOutcome', 'UnperturbedCache', 'misfit',
    'Measurement', 'ReconstructionResult', 'SingleMeasurementAlgorithm', 'MultipleMeasurementsAlgorithm',
    'PartialMeasurementsAlgorithm', 'split_measurement', 'AlgorithmManager',
    'run_algorithm1', 'run_algorithm2', 'run_algorithm3',
]
