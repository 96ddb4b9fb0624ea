"""
Monte-Carlo noise campaigns: clean data once, then one noisy reconstruction per seed.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from exceptions import PreconditionError, ToolkitError
from fem import DEFAULT_MIN_SEPARATION, InclusionSpec, SourceTerm
from meshing import BoundaryPartition, Mesh
from reconstruction import AlgorithmManager, Measurement, ReconstructionConfig, UnperturbedCache
from .measurements import clean_boundary_data
from .noise import NoiseSpec, apply_noise

_LOGGER = logging.getLogger(__name__)


@dataclass
class CampaignConfig:
    """
    Attributes:
        inclusion: planted inclusion
        sources: source terms (alg1 and alg3 use the first one)
        gen_mesh: mesh the data are generated on
        recon_mesh: mesh the reconstruction runs on
        noise_level: p of the multiplicative noise model
        algorithm: alg1, alg2 or alg3
        partition: arcs Γ_i for alg3
        reconstruction: algorithm parameters
        incremental: run alg2 in incremental mode
        min_separation: required distance of the inclusion from ∂Ω
    """

    inclusion: InclusionSpec
    sources: Sequence[SourceTerm]
    gen_mesh: Mesh
    recon_mesh: Mesh
    noise_level: float = 0.0
    algorithm: str = "alg2"
    partition: Optional[BoundaryPartition] = None
    reconstruction: ReconstructionConfig = field(default_factory=ReconstructionConfig)
    incremental: bool = False
    min_separation: float = DEFAULT_MIN_SEPARATION

    def __post_init__(self):
        if not self.sources:
            raise PreconditionError("a campaign needs at least one source term")
        if self.algorithm == "alg3" and self.partition is None:
            raise PreconditionError("alg3 campaigns need a boundary partition")
        NoiseSpec(self.noise_level)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'inclusion': self.inclusion.to_dict(),
            'sources': [s.key for s in self.sources],
            'gen_mesh': self.gen_mesh.mesh_id,
            'recon_mesh': self.recon_mesh.mesh_id,
            'noise_level': self.noise_level,
            'algorithm': self.algorithm,
            'partition': self.partition.to_dict() if self.partition is not None else None,
            'reconstruction': self.reconstruction.to_dict(),
            'incremental': self.incremental,
            'min_separation': self.min_separation,
        }


@dataclass
class CampaignRun:
    seed: int
    detected_center: Optional[Tuple[float, float]]
    error: Optional[float]
    failed: bool
    error_message: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'detected_center': list(self.detected_center) if self.detected_center is not None else None,
            'error': self.error,
            'failed': self.failed,
            'error_message': self.error_message,
        }


@dataclass
class CampaignResult:
    """
    Per-seed runs and their aggregates.

    mean_error averages the runs that completed without a boundary detection;
    failure_rate is the share of completed runs that detected on the boundary.
    Runs that raised are counted in error_count only.
    """

    runs: List[CampaignRun]
    mean_error: Optional[float]
    failure_rate: float
    error_count: int
    config: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_runs(cls, runs: List[CampaignRun], config: Dict[str, Any]) -> "CampaignResult":
        completed = [r for r in runs if r.error_message is None]
        good = [r.error for r in completed if not r.failed]
        mean_error = float(np.mean(good)) if good else None
        failure_rate = sum(r.failed for r in completed) / len(completed) if completed else 0.0
        return cls(runs, mean_error, float(failure_rate), len(runs) - len(completed), config)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'config': self.config,
            'n_runs': len(self.runs),
            'mean_error': self.mean_error,
            'failure_rate': self.failure_rate,
            'error_count': self.error_count,
            'runs': [r.to_dict() for r in self.runs],
        }

    def to_dataframe(self) -> pd.DataFrame:
        """Runs table, one row per seed."""
        rows = []
        for r in self.runs:
            x, y = r.detected_center if r.detected_center is not None else (np.nan, np.nan)
            rows.append({'seed': r.seed, 'x': x, 'y': y, 'error': r.error, 'failed': r.failed,
                         'error_message': r.error_message or ''})
        return pd.DataFrame(rows, columns=['seed', 'x', 'y', 'error', 'failed', 'error_message'])


def _measurements(config: CampaignConfig, clean: Sequence[NDArray], seed: int) -> List[Measurement]:
    noisy = [apply_noise(values, NoiseSpec(config.noise_level, seed, stream))
             for stream, values in enumerate(clean)]
    if config.algorithm == "alg3":
        return [Measurement(config.sources[0], noisy[0], arc, label=f"{config.sources[0].key}[{i}]")
                for i, arc in enumerate(config.partition.split())]
    if config.algorithm == "alg1":
        return [Measurement(config.sources[0], noisy[0])]
    return [Measurement(source, data) for source, data in zip(config.sources, noisy)]


def run_campaign(config: CampaignConfig, n_runs: int, base_seed: int = 0, workers: int = 1,
                 cache: Optional[UnperturbedCache] = None) -> CampaignResult:
    """
    Reconstruct the planted inclusion for seeds base_seed, ..., base_seed + n_runs − 1.

    Failed reconstructions (any ToolkitError) are recorded in their run and do not
    stop the campaign. Results come back in seed order.
    """
    if n_runs < 1:
        raise PreconditionError(f"n_runs must be >= 1, got {n_runs}")
    start = time.time()
    used_sources = config.sources[:1] if config.algorithm in ("alg1", "alg3") else config.sources
    clean = [clean_boundary_data(config.inclusion, f, config.gen_mesh, config.recon_mesh,
                                 config.reconstruction.newton, config.min_separation)
             for f in used_sources]
    t_clean = time.time() - start
    manager = AlgorithmManager(cache)
    truth = config.inclusion.center

    def one_run(seed: int) -> CampaignRun:
        try:
            measurements = _measurements(config, clean, seed)
        except ToolkitError as e:
            payload = {'error': f'{type(e).__name__}: {e}'}
        else:
            payload = manager.reconstruct(config.algorithm, config.recon_mesh, measurements,
                                          config.reconstruction, incremental=config.incremental)
        if payload['error']:
            _LOGGER.warning("Campaign run with seed %d failed: %s", seed, payload['error'])
            return CampaignRun(seed, None, None, False, payload['error'])
        result = payload['result']
        return CampaignRun(seed, result.detected_center, result.error_to(truth), result.boundary_violation_flag)

    seeds = [base_seed + i for i in range(n_runs)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one_run, seeds))
    else:
        runs = [one_run(seed) for seed in seeds]

    result = CampaignResult.from_runs(runs, config.to_dict())
    result.timings = {'clean_data': t_clean, 'total': time.time() - start}
    _LOGGER.info("Campaign p=%g: %d runs, mean error %s, failure rate %.2f",
                 config.noise_level, n_runs,
                 "n/a" if result.mean_error is None else f"{result.mean_error:.4f}", result.failure_rate)
    return result
