"""
Damped Newton solver for the semilinear forward problem

    -div(k ∇u) + χ u³ = f in Ω,   k ∂_ν u = 0 on ∂Ω.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import scipy.optimize as spo

from exceptions import ConvergenceError, LinearSolverError, PreconditionError
from fem import (WEAK_KERNEL_RTOL, CoefficientField, NodalField, SourceTerm, assemble_load,
                 assemble_reaction_linearized, assemble_stiffness, classify_elements, constant_defect,
                 field_values, lumped_mass, solve_sparse)
from fem.assembly import assemble_cubic_term, nonlinear_residual
from meshing import Mesh

_LOGGER = logging.getLogger(__name__)

# added to a Jacobian whose constant mode is too weak to solve for (e.g. at u = 0)
JACOBIAN_REG = 1e-8


@dataclass(frozen=True)
class NewtonConfig:
    """Stopping and damping parameters of the Newton iteration."""

    abs_tol: float = 1e-10
    max_iter: int = 25
    damping: float = 1.0
    max_halvings: int = 8

    def __post_init__(self):
        if not self.abs_tol > 0.0:
            raise PreconditionError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_iter < 1:
            raise PreconditionError(f"max_iter must be >= 1, got {self.max_iter}")
        if not 0.0 < self.damping <= 1.0:
            raise PreconditionError(f"damping must lie in (0, 1], got {self.damping}")
        if self.max_halvings < 0:
            raise PreconditionError(f"max_halvings must be >= 0, got {self.max_halvings}")

    def to_dict(self) -> Dict[str, Any]:
        return {'abs_tol': self.abs_tol, 'max_iter': self.max_iter,
                'damping': self.damping, 'max_halvings': self.max_halvings}


@dataclass
class ForwardSolution:
    u: NodalField
    iterations: int
    residual_history: List[float]
    converged: bool
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'iterations': self.iterations,
            'residual_history': list(self.residual_history),
            'converged': self.converged,
            'warnings': list(self.warnings),
        }


def _balance_constant(mesh: Mesh, coeff: CoefficientField, u, total_load: float):
    """
    Shift u by the constant c with ∫ χ (u + c)³ = ∫ f.

    Testing the equation with v = 1 removes the stiffness term, so this scalar
    balance fixes the constant mode that a singular Jacobian leaves undetermined.
    """
    reaction_area = float(np.dot(coeff.reaction_mask, mesh.element_areas))
    if reaction_area <= 0.0:
        return u

    def imbalance(c: float) -> float:
        return float(assemble_cubic_term(mesh, coeff, u + c).sum()) - total_load

    # ∫ χ (u + c)³ is increasing in c and exceeds |∫ f| at ±bound
    bound = float(np.max(np.abs(u))) + float(np.cbrt(abs(total_load) / reaction_area)) + 1.0
    return u + spo.brentq(imbalance, -bound, bound, xtol=1e-14)


def _step_without_constant_mode(jacobian, residual, lumped):
    # compatible right-hand side keeps the regularised constant mode small
    rhs = -residual + lumped * (residual.sum() / lumped.sum())
    delta = solve_sparse(jacobian, rhs, reg=JACOBIAN_REG, lumped_mass=lumped)
    return delta - np.dot(lumped, delta) / lumped.sum()


def solve_forward(mesh: Mesh, coeff: CoefficientField, f: SourceTerm,
                  cfg: Optional[NewtonConfig] = None, u0=None) -> ForwardSolution:
    """
    Solve the discrete forward problem by damped Newton.

    Each step solves [K(k) + 3·reaction(χ, u)] δu = −S(u). A step is halved while
    it does not decrease the residual 2-norm. When the reaction term is too small
    to pin the constant mode (u = 0 in particular) the Jacobian is regularised,
    the constant part of δu is discarded and every trial iterate is shifted by
    the constant that balances ∫ χ u³ against ∫ f.

    Args:
        mesh: the mesh
        coeff: per-element conductivity and reaction mask
        f: source term
        cfg: Newton parameters
        u0: start value (NodalField or nodal array), used as given; defaults to zero

    Returns:
        ForwardSolution with converged == True

    Raises:
        PreconditionError: f vanishes on the mesh
        ConvergenceError: residual above abs_tol after max_iter steps
    """
    cfg = cfg or NewtonConfig()
    load = assemble_load(mesh, f)
    if not np.linalg.norm(load) > 0.0:
        raise PreconditionError(f"source term {f.key} vanishes identically on the mesh")

    stiffness = assemble_stiffness(mesh, coeff)
    lumped = lumped_mass(mesh)
    notes: List[str] = []

    u = np.zeros(mesh.n_nodes) if u0 is None else np.array(field_values(mesh, u0), dtype=np.float64)
    total_load = float(load.sum())

    residual = nonlinear_residual(stiffness, mesh, coeff, u, load)
    r_norm = float(np.linalg.norm(residual))
    history = [r_norm]
    iterations = 0

    while r_norm > cfg.abs_tol and iterations < cfg.max_iter:
        jacobian = stiffness + assemble_reaction_linearized(mesh, coeff, u, 3.0)
        weak = constant_defect(jacobian) < WEAK_KERNEL_RTOL
        if not weak:
            try:
                delta = solve_sparse(jacobian, -residual)
            except LinearSolverError as e:
                _LOGGER.debug("Newton iteration %d: plain solve failed (%s)", iterations + 1, e)
                weak = True
        if weak:
            _LOGGER.debug("Newton iteration %d: constant mode fixed by the global balance", iterations + 1)
            delta = _step_without_constant_mode(jacobian, residual, lumped)

        step = cfg.damping
        for _ in range(cfg.max_halvings + 1):
            trial = u + step * delta
            if weak:
                trial = _balance_constant(mesh, coeff, trial, total_load)
            trial_residual = nonlinear_residual(stiffness, mesh, coeff, trial, load)
            trial_norm = float(np.linalg.norm(trial_residual))
            if trial_norm < r_norm:
                break
            step *= 0.5
        else:
            message = f"iteration {iterations + 1}: no residual decrease after {cfg.max_halvings} halvings"
            _LOGGER.warning("Newton %s; accepting step %.3g", message, step * 2.0)
            notes.append(message)

        u, residual, r_norm = trial, trial_residual, trial_norm
        iterations += 1
        history.append(r_norm)
        _LOGGER.debug("Newton iteration %d: residual %.3e (step %.3g)", iterations, r_norm, step)

    if r_norm > cfg.abs_tol:
        raise ConvergenceError(
            f"Newton did not reach {cfg.abs_tol:g} in {cfg.max_iter} iterations (residual {r_norm:.3e})",
            history)
    _LOGGER.info("Newton converged in %d iterations, residual %.2e", iterations, r_norm)
    return ForwardSolution(NodalField(u, mesh.mesh_id), iterations, history, True, notes)


def solve_unperturbed(mesh: Mesh, f: SourceTerm, cfg: Optional[NewtonConfig] = None) -> ForwardSolution:
    """Forward solve on the domain without inclusion."""
    return solve_forward(mesh, classify_elements(mesh, None), f, cfg)
