"""
Algorithm manager to handle all available reconstruction algorithms.
"""
import logging
from typing import Any, Dict, List, Optional, Sequence

from exceptions import ToolkitError
from meshing import Mesh
from .base_algorithm import BaseAlgorithm, ReconstructionConfig
from .cache import UnperturbedCache
from .multiple_measurements import MultipleMeasurementsAlgorithm
from .partial_measurements import PartialMeasurementsAlgorithm
from .result import Measurement
from .single_measurement import SingleMeasurementAlgorithm

_LOGGER = logging.getLogger(__name__)


class AlgorithmManager:
    """Manages all available reconstruction algorithms."""

    def __init__(self, cache: Optional[UnperturbedCache] = None):
        self.algorithms: Dict[str, BaseAlgorithm] = {
            'alg1': SingleMeasurementAlgorithm(),
            'alg2': MultipleMeasurementsAlgorithm(),
            'alg3': PartialMeasurementsAlgorithm(),
        }
        self.cache = cache if cache is not None else UnperturbedCache()

    def get_available_algorithms(self) -> List[str]:
        """Get list of available algorithm names."""
        return list(self.algorithms.keys())

    def get_algorithm(self, name: str) -> Optional[BaseAlgorithm]:
        """Get a specific algorithm by name."""
        return self.algorithms.get(name)

    def get_algorithm_info(self, name: str) -> Dict[str, Any]:
        """Get information about a specific algorithm."""
        algorithm = self.get_algorithm(name)
        if not algorithm:
            return {'error': f'Algorithm "{name}" not found'}
        return {
            'name': algorithm.name,
            'summary': algorithm.description,
            'description': self._get_algorithm_description(name),
        }

    def _get_algorithm_description(self, name: str) -> str:
        descriptions = {
            'alg1': 'One unperturbed solve and one adjoint solve; the minimum of G locates the inclusion',
            'alg2': 'One unperturbed and one adjoint solve per source; fields combined with misfit-based weights',
            'alg3': 'One unperturbed solve; one adjoint solve per boundary arc, combined with misfit-based weights',
        }
        return descriptions.get(name, 'No description available')

    def reconstruct(self, name: str, mesh: Mesh, measurements: Sequence[Measurement],
                    cfg: ReconstructionConfig, incremental: bool = False) -> Dict[str, Any]:
        """
        Run an algorithm and report failures in the returned dictionary.

        Returns:
            {'result': ReconstructionResult or None, 'error': message or None,
             'stage': failing stage or None, 'algorithm': name}
        """
        algorithm = self.get_algorithm(name)
        if not algorithm:
            return {'result': None, 'error': f'Algorithm "{name}" not found', 'stage': None, 'algorithm': name}
        try:
            if incremental and isinstance(algorithm, MultipleMeasurementsAlgorithm):
                result = algorithm.run_incremental(mesh, measurements, cfg, self.cache)
            else:
                result = algorithm.run(mesh, measurements, cfg, self.cache)
        except ToolkitError as e:
            _LOGGER.error("%s failed: %s", name, e)
            return {'result': None, 'error': f'{type(e).__name__}: {e}',
                    'stage': getattr(e, 'stage', None), 'algorithm': name}
        return {'result': result, 'error': None, 'stage': None, 'algorithm': name}
