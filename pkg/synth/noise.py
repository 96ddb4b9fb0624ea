"""
Multiplicative measurement noise ũ = u (1 − p/2 + p·rand), rand ~ U[0, 1).
"""
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from numpy.typing import NDArray

from exceptions import PreconditionError


@dataclass(frozen=True)
class NoiseSpec:
    """
    Attributes:
        p: noise level as a fraction (0.02 for 2 %)
        seed: 64-bit seed of the counter-based generator
        stream: independent stream index, e.g. one per source term
    """

    p: float
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise PreconditionError(f"noise level must lie in [0, 1), got {self.p}")
        if self.seed < 0 or self.stream < 0:
            raise PreconditionError("noise seed and stream must be non-negative")

    def to_dict(self) -> Dict[str, Any]:
        return {'p': self.p, 'seed': self.seed, 'stream': self.stream}


def noise_factors(n: int, noise: NoiseSpec) -> NDArray:
    """Factors 1 − p/2 + p·rand_i for the boundary-node ordinals 0..n−1."""
    rng = np.random.Generator(np.random.Philox([noise.seed, noise.stream]))
    return 1.0 - 0.5 * noise.p + noise.p * rng.random(n)


def apply_noise(values, noise: NoiseSpec) -> NDArray:
    """Noisy copy of clean boundary values; p = 0 returns the values unchanged."""
    values = np.array(values, dtype=np.float64).reshape(-1)
    if noise.p == 0.0:
        return values
    return values * noise_factors(len(values), noise)
