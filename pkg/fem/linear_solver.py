"""
Direct sparse solves with SuperLU.
"""
import logging
from typing import Any, Dict, Optional

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.sparse.linalg import splu

from exceptions import LinearSolverError, SingularSystemError

_LOGGER = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
MAX_REFINEMENT_STEPS = 3
# row sums of a pure Neumann stiffness matrix are zero up to this relative level
KERNEL_RTOL = 1e-13
# below this relative row-sum level the constant mode counts as missing and is regularised
WEAK_KERNEL_RTOL = 1e-9


def matrix_diagnostics(A: sp.spmatrix) -> Dict[str, Any]:
    """Summary numbers attached to solver errors."""
    diag = A.diagonal()
    row_sums = np.asarray(A @ np.ones(A.shape[0])).ravel()
    return {
        'n': int(A.shape[0]),
        'nnz': int(A.nnz),
        'min_diagonal': float(diag.min()) if diag.size else 0.0,
        'max_diagonal': float(diag.max()) if diag.size else 0.0,
        'max_abs_entry': float(abs(sp.csr_matrix(A)).max()) if A.nnz else 0.0,
        'max_abs_row_sum': float(np.abs(row_sums).max()) if row_sums.size else 0.0,
    }


def constant_defect(A: sp.spmatrix) -> float:
    """Largest row sum of A relative to its largest entry; zero when A annihilates constants."""
    scale = abs(sp.csr_matrix(A)).max() if A.nnz else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.abs(A @ np.ones(A.shape[0])).max()) / scale


def solve_sparse(A: sp.spmatrix, b, reg: float = 0.0, lumped_mass: Optional[NDArray] = None,
                 rtol: float = DEFAULT_RTOL) -> NDArray:
    """
    Solve A x = b by LU factorisation with iterative refinement.

    Args:
        A: symmetric sparse matrix
        b: right-hand side (NodalField or array)
        reg: if positive, reg * lumped_mass (or reg * I) is added to the diagonal
        lumped_mass: diagonal used for the regularisation
        rtol: required relative residual ‖Ax − b‖ / ‖b‖

    Returns:
        Solution array

    Raises:
        SingularSystemError: constants lie in the kernel of A and reg is zero
        LinearSolverError: factorisation breakdown or residual above rtol
    """
    rhs = np.asarray(getattr(b, "values", b), dtype=np.float64).reshape(-1)
    A = sp.csr_matrix(A, dtype=np.float64)
    if A.shape[0] != A.shape[1] or A.shape[0] != len(rhs):
        raise LinearSolverError(f"shape mismatch: matrix {A.shape}, rhs {len(rhs)}")
    if reg < 0.0:
        raise LinearSolverError(f"regularisation must be non-negative, got {reg}")

    if reg > 0.0:
        diag = lumped_mass if lumped_mass is not None else np.ones(len(rhs))
        A = (A + sp.diags(reg * np.asarray(diag, dtype=np.float64))).tocsr()
    else:
        if constant_defect(A) <= KERNEL_RTOL:
            raise SingularSystemError(
                "matrix annihilates constants (pure Neumann operator); pass reg > 0",
                matrix_diagnostics(A))

    b_norm = float(np.linalg.norm(rhs))
    if b_norm == 0.0:
        return np.zeros(len(rhs))

    try:
        lu = splu(A.tocsc())
    except RuntimeError as e:
        raise LinearSolverError(f"LU factorisation failed: {e}", matrix_diagnostics(A))

    a_norm = float(abs(A).sum(axis=1).max())

    def accepted(r: NDArray, x: NDArray) -> bool:
        r_norm = float(np.linalg.norm(r))
        if r_norm <= rtol * b_norm:
            return True
        # regularised Neumann systems carry a large constant mode; judge them by backward error
        return reg > 0.0 and r_norm <= rtol * (a_norm * float(np.linalg.norm(x)) + b_norm)

    x = lu.solve(rhs)
    residual = rhs - A @ x
    steps = 0
    while not accepted(residual, x) and steps < MAX_REFINEMENT_STEPS and np.all(np.isfinite(x)):
        x = x + lu.solve(residual)
        residual = rhs - A @ x
        steps += 1

    rel = float(np.linalg.norm(residual)) / b_norm
    if not np.all(np.isfinite(x)) or not accepted(residual, x):
        diagnostics = matrix_diagnostics(A)
        diagnostics['relative_residual'] = rel
        raise LinearSolverError(f"relative residual {rel:.3e} above {rtol:.1e}", diagnostics)
    _LOGGER.debug("Sparse solve n=%d reg=%g refinement=%d residual=%.2e", len(rhs), reg, steps, rel)
    return x
