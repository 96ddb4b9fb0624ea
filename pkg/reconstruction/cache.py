"""
Cache of unperturbed forward solutions keyed by mesh, source and Newton settings.
"""
import logging
import threading
from typing import Dict, Tuple

from fem import SourceTerm
from meshing import Mesh
from solvers import ForwardSolution, NewtonConfig, solve_unperturbed

_LOGGER = logging.getLogger(__name__)


class UnperturbedCache:
    """Shares U between measurements, algorithms and campaign runs."""

    def __init__(self):
        self._solutions: Dict[Tuple, ForwardSolution] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @staticmethod
    def _key(mesh: Mesh, source: SourceTerm, newton: NewtonConfig) -> Tuple:
        return (mesh.mesh_id, source.key, newton.abs_tol, newton.max_iter, newton.damping, newton.max_halvings)

    def get_or_solve(self, mesh: Mesh, source: SourceTerm, newton: NewtonConfig) -> Tuple[ForwardSolution, bool]:
        """
        Returns:
            (solution, solved) where solved is True when a new Newton solve ran
        """
        key = self._key(mesh, source, newton)
        with self._lock:
            cached = self._solutions.get(key)
            if cached is not None:
                self.hits += 1
                return cached, False
        solution = solve_unperturbed(mesh, source, newton)
        with self._lock:
            self.misses += 1
            self._solutions.setdefault(key, solution)
        _LOGGER.debug("Cached unperturbed solution for %s on mesh %s", source.key, mesh.mesh_id)
        return solution, True

    def __len__(self) -> int:
        return len(self._solutions)

    def clear(self) -> None:
        with self._lock:
            self._solutions.clear()
