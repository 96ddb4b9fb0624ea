"""
Brute-force trial inclusions for the small-inclusion expansion j(ε; z) = j(0) + ε² G(z) + o(ε²).

Trial misfits use the half misfit ½∫(u − u_meas)², whose first variation is the
adjoint datum U − u_meas, so that Δj ≈ |ω| G(z) with G reported per unit area.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from exceptions import PreconditionError
from fem import (DEFAULT_K_IN, DEFAULT_MIN_SEPARATION, InclusionSpec, SourceTerm, boundary_l2_squared,
                 classify_elements)
from meshing import Mesh
from reconstruction import Measurement, misfit
from solvers import ForwardSolution, NewtonConfig, boundary_trace, solve_adjoint, solve_forward, solve_unperturbed
from topo import circle_tensor, evaluate_at, topological_gradient

_LOGGER = logging.getLogger(__name__)

ORACLE_CONVENTIONS = {
    'misfit': "½ ∫_Γ (u − u_meas)²",
    'ratio': "Δj / ε²",
    'normalized': "Δj / |ω|, comparable with G",
    'gradient': "per unit inclusion area",
}


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log|y| against log x."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.abs(np.asarray(ys, dtype=np.float64))
    if len(xs) < 2 or len(xs) != len(ys):
        raise PreconditionError("a slope needs at least two (x, y) pairs")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise PreconditionError("log-log slope needs positive values")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


@dataclass
class OracleSetup:
    """Forward/misfit context shared by all trials against one measurement."""

    mesh: Mesh
    measurement: Measurement
    k_in: float = DEFAULT_K_IN
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    min_separation: float = DEFAULT_MIN_SEPARATION
    unperturbed: Optional[ForwardSolution] = None

    def __post_init__(self):
        if self.unperturbed is None:
            self.unperturbed = solve_unperturbed(self.mesh, self.measurement.source, self.newton)

    @property
    def source(self) -> SourceTerm:
        return self.measurement.source

    def half_misfit(self, u) -> float:
        return 0.5 * misfit(self.mesh, boundary_trace(self.mesh, u), self.measurement)


@dataclass
class OracleSample:
    eps: float
    misfit: float
    delta: float
    ratio: float
    inclusion_area: float
    normalized: Optional[float]
    iterations: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'eps': self.eps,
            'misfit': self.misfit,
            'delta': self.delta,
            'ratio': self.ratio,
            'inclusion_area': self.inclusion_area,
            'normalized': self.normalized,
            'iterations': self.iterations,
        }


@dataclass
class OracleReport:
    point: Tuple[float, float]
    baseline: float
    samples: List[OracleSample]
    gradient: float
    slope: Optional[float]

    def relative_gap(self) -> Optional[float]:
        """|normalized − G| / |G| at the smallest ε."""
        first = self.samples[0].normalized
        if first is None or self.gradient == 0.0:
            return None
        return abs(first - self.gradient) / abs(self.gradient)

    def sign_agrees(self) -> bool:
        return bool(np.sign(self.samples[0].delta) == np.sign(self.gradient))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'point': list(self.point),
            'baseline_misfit': self.baseline,
            'samples': [s.to_dict() for s in self.samples],
            'gradient': self.gradient,
            'slope': self.slope,
            'relative_gap': self.relative_gap(),
            'sign_agrees': self.sign_agrees(),
        }


def _check_trial(setup: OracleSetup, z, eps_list: Sequence[float]) -> List[float]:
    eps = sorted(float(e) for e in eps_list)
    if not eps or eps[0] <= 0.0:
        raise PreconditionError("trial inclusion sizes must be positive")
    distance = float(setup.mesh.distance_to_boundary(np.asarray(z, dtype=np.float64))[0])
    if not setup.mesh.contains_points(np.asarray(z, dtype=np.float64))[0] or distance < setup.min_separation + eps[-1]:
        raise PreconditionError(
            f"check point {tuple(z)} is {distance:.4g} from the boundary, "
            f"needs at least {setup.min_separation + eps[-1]:.4g}")
    return eps


def predicted_gradient(setup: OracleSetup, z) -> float:
    """G(z) per unit area from the unperturbed and adjoint states."""
    mesh = setup.mesh
    U = setup.unperturbed.u
    trace = boundary_trace(mesh, U).values
    W = solve_adjoint(mesh, U, trace - setup.measurement.boundary_data, setup.measurement.mask)
    G = topological_gradient(mesh, U, W, setup.k_in, circle_tensor(setup.k_in, 1.0), margin=0.0)
    return evaluate_at(G, mesh, z)


def oracle_topological_gradient(z, eps_list: Sequence[float], setup: OracleSetup) -> OracleReport:
    """
    Plant circular inclusions B(z, ε) and measure the misfit change.

    Every ε costs one nonlinear forward solve, warm-started from U. Ratios are
    reported raw (Δj/ε²) and normalised by the classified inclusion area (Δj/|ω|),
    the latter comparable with the predicted G(z).
    """
    eps = _check_trial(setup, z, eps_list)
    baseline = setup.half_misfit(setup.unperturbed.u)
    samples: List[OracleSample] = []
    for e in eps:
        inclusion = InclusionSpec.circle(z, e, setup.k_in)
        coeff = classify_elements(setup.mesh, inclusion, setup.min_separation)
        solution = solve_forward(setup.mesh, coeff, setup.source, setup.newton, u0=setup.unperturbed.u)
        value = setup.half_misfit(solution.u)
        delta = value - baseline
        normalized = delta / coeff.inclusion_area if coeff.inclusion_area > 0.0 else None
        samples.append(OracleSample(e, value, delta, delta / e ** 2, coeff.inclusion_area,
                                    normalized, solution.iterations))
        _LOGGER.debug("Oracle z=%s eps=%g: delta j = %.4e", tuple(z), e, delta)

    deltas = [s.delta for s in samples]
    slope = None
    if len(samples) >= 2 and all(d != 0.0 for d in deltas):
        slope = loglog_slope(eps, deltas)
    gradient = predicted_gradient(setup, z)
    _LOGGER.info("Oracle at (%.3f, %.3f): G = %.4e, slope %s", z[0], z[1], gradient,
                 "n/a" if slope is None else f"{slope:.3f}")
    return OracleReport((float(z[0]), float(z[1])), baseline, samples, gradient, slope)


def sign_agreement(setup: OracleSetup, points: Sequence[Sequence[float]], eps: float) -> float:
    """Fraction of check points where sign(Δj) at ε matches sign(G)."""
    if not points:
        raise PreconditionError("sign agreement needs at least one check point")
    agree = sum(oracle_topological_gradient(z, [eps], setup).sign_agrees() for z in points)
    return agree / len(points)


def boundary_perturbation_order(mesh: Mesh, f: SourceTerm, z, eps_list: Sequence[float],
                                k_in: float = DEFAULT_K_IN, newton: Optional[NewtonConfig] = None,
                                min_separation: float = DEFAULT_MIN_SEPARATION) -> Dict[str, Any]:
    """
    ‖u_ε − U‖_{L²(∂Ω)} for circular inclusions B(z, ε) and its log-log slope in ε.

    Returns:
        {'eps': [...], 'norms': [...], 'slope': float}
    """
    newton = newton or NewtonConfig()
    U = solve_unperturbed(mesh, f, newton)
    U_trace = boundary_trace(mesh, U.u).values
    eps = sorted(float(e) for e in eps_list)
    norms = []
    for e in eps:
        coeff = classify_elements(mesh, InclusionSpec.circle(z, e, k_in), min_separation)
        u_eps = solve_forward(mesh, coeff, f, newton, u0=U.u)
        diff = boundary_trace(mesh, u_eps.u).values - U_trace
        norms.append(float(np.sqrt(boundary_l2_squared(mesh, diff))))
    return {'eps': eps, 'norms': norms, 'slope': loglog_slope(eps, norms)}
