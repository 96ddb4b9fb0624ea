"""
Test script for the Newton forward solver and the adjoint solver.
"""

import warnings
from functools import lru_cache

import numpy as np
import pytest
from scipy.spatial import cKDTree

from exceptions import ConvergenceError, PreconditionError, RegularizationWarning
from fem import (BumpSource, ConstantSource, InclusionSpec, LinearXSource, LinearYSource, NodalField,
                 assemble_boundary_load, assemble_nonlinear_residual, classify_elements, lumped_mass,
                 parse_source)
from meshing import build_partition, generate_disk_mesh
from solvers import NewtonConfig, boundary_trace, solve_adjoint, solve_forward, solve_unperturbed


@lru_cache(maxsize=None)
def disk(h, seed=0):
    return generate_disk_mesh(h, seed)


def test_newton_config():
    """Test Newton parameter validation."""
    print("🧪 Testing Newton Configuration")
    print("=" * 50)

    cfg = NewtonConfig()
    assert cfg.to_dict() == {'abs_tol': 1e-10, 'max_iter': 25, 'damping': 1.0, 'max_halvings': 8}
    for kwargs in ({'abs_tol': 0.0}, {'max_iter': 0}, {'damping': 1.5}, {'max_halvings': -1}):
        with pytest.raises(PreconditionError):
            NewtonConfig(**kwargs)


def test_constant_source():
    """Test that f = 8 gives the constant state u = 2."""
    print("🧪 Testing Constant Source")
    print("=" * 50)

    mesh = disk(0.05)
    solution = solve_unperturbed(mesh, ConstantSource(8.0))
    print(f"Iterations: {solution.iterations}, residual {solution.residual_history[-1]:.2e}")
    assert solution.converged
    assert np.max(np.abs(solution.u.values - 2.0)) <= 1e-6
    assert solution.residual_history[-1] <= 1e-10


def test_polynomial_sources_converge():
    """Test Newton convergence for F1..F4."""
    print("🧪 Testing Polynomial Sources")
    print("=" * 50)

    mesh = disk(0.05)
    for tag in ("F1", "F2", "F3", "F4"):
        solution = solve_unperturbed(mesh, parse_source(tag))
        print(f"{tag}: {solution.iterations} iterations, residual {solution.residual_history[-1]:.2e}")
        assert solution.converged
        assert solution.iterations <= 10
        assert solution.residual_history[-1] <= 1e-10
        assert solution.u.max_abs() > 0.0


def test_forward_with_inclusion():
    """Test the forward problem with a planted inclusion."""
    print("🧪 Testing Forward Problem With Inclusion")
    print("=" * 50)

    mesh = disk(0.025)
    f = LinearXSource()
    coeff = classify_elements(mesh, InclusionSpec.circle((0.3, 0.2), 0.1))
    U = solve_unperturbed(mesh, f)
    u = solve_forward(mesh, coeff, f)
    warm = solve_forward(mesh, coeff, f, u0=U.u)
    difference = np.abs(u.u.values - U.u.values).max()
    print(f"Max |u_eps - U| = {difference:.3e}, warm start iterations {warm.iterations}")
    assert difference > 1e-6
    assert warm.residual_history[-1] <= 1e-10
    assert np.abs(u.u.values - warm.u.values).max() < 0.01 * difference


def test_zero_start():
    """Test Newton from an explicit zero start and that a supplied start is used as given."""
    print("🧪 Testing Zero Start")
    print("=" * 50)

    mesh = disk(0.05)
    coeff = classify_elements(mesh, None)
    zeros = np.zeros(mesh.n_nodes)
    for f in (ConstantSource(8.0), BumpSource(0.0, 0.0, 0.3)):
        solution = solve_forward(mesh, coeff, f, u0=zeros)
        initial = np.linalg.norm(assemble_nonlinear_residual(mesh, coeff, zeros, f).values)
        print(f"{f.key}: {solution.iterations} iterations, residual {solution.residual_history[-1]:.2e}")
        assert solution.residual_history[0] == pytest.approx(initial)
        assert solution.iterations >= 1
        assert solution.iterations <= 15
        assert solution.residual_history[-1] <= 1e-10
        assert np.array_equal(solution.u.values, solve_unperturbed(mesh, f).u.values)

    constant = solve_forward(mesh, coeff, ConstantSource(8.0), u0=zeros)
    assert np.max(np.abs(constant.u.values - 2.0)) <= 1e-6

    # a start that already solves the problem is kept
    exact = solve_forward(mesh, coeff, ConstantSource(8.0), u0=np.full(mesh.n_nodes, 2.0))
    assert exact.iterations == 0
    assert np.all(exact.u.values == 2.0)

    shifted = solve_forward(mesh, coeff, LinearXSource(), u0=np.full(mesh.n_nodes, 0.5))
    reference = solve_unperturbed(mesh, LinearXSource())
    assert shifted.residual_history[0] > reference.residual_history[0]
    assert np.abs(shifted.u.values - reference.u.values).max() <= 1e-5


def test_forward_errors():
    """Test the error paths of the forward solver."""
    print("🧪 Testing Forward Solver Errors")
    print("=" * 50)

    mesh = disk(0.1)
    with pytest.raises(PreconditionError):
        solve_unperturbed(mesh, ConstantSource(0.0))
    with pytest.raises(ConvergenceError) as excinfo:
        solve_unperturbed(mesh, BumpSource(0.0, 0.0, 0.3), NewtonConfig(max_iter=1))
    assert len(excinfo.value.residual_history) == 2


def test_unperturbed_matches_forward():
    """Test that the unperturbed solve is the forward solve without inclusion."""
    print("🧪 Testing Unperturbed Solve")
    print("=" * 50)

    mesh = disk(0.05)
    f = LinearYSource()
    a = solve_unperturbed(mesh, f)
    b = solve_forward(mesh, classify_elements(mesh, None), f)
    assert np.array_equal(a.u.values, b.u.values)


def test_odd_symmetry():
    """Test U(x, y) = -U(x, -y) for f = y on the mirror-symmetric mesh."""
    print("🧪 Testing Odd Symmetry")
    print("=" * 50)

    h = 0.05
    mesh = disk(h)
    U = solve_unperturbed(mesh, LinearYSource()).u.values
    _, mirror = cKDTree(mesh.nodes).query(mesh.nodes * np.array([1.0, -1.0]))
    defect = np.abs(U + U[mirror]).max()
    print(f"Largest symmetry defect {defect:.2e}")
    assert defect <= 10.0 * h * h


def test_radial_source():
    """Test that a centred bump gives a nearly constant boundary trace."""
    print("🧪 Testing Radial Source")
    print("=" * 50)

    mesh = disk(0.05)
    U = solve_unperturbed(mesh, BumpSource(0.0, 0.0, 0.3)).u
    trace = boundary_trace(mesh, U)
    spread = trace.values.max() - trace.values.min()
    print(f"Boundary trace spread {spread:.2e} (max |U| = {U.max_abs():.3f})")
    assert spread <= 0.02 * U.max_abs()


def test_boundary_trace():
    """Test trace extraction order and odd symmetry of the F1 trace."""
    print("🧪 Testing Boundary Trace")
    print("=" * 50)

    mesh = disk(0.05)
    trace = boundary_trace(mesh, NodalField.on(mesh, np.full(mesh.n_nodes, 3.0)))
    assert len(trace) == len(mesh.boundary_nodes)
    assert np.all(trace.values == 3.0)

    U = solve_unperturbed(mesh, LinearXSource()).u
    trace = boundary_trace(mesh, U)
    n = len(trace)
    mirror = (-np.arange(n)) % n
    assert np.allclose(trace.angles[mirror], np.mod(-trace.angles, 2.0 * np.pi), atol=1e-12)
    # F1 is even in y
    assert np.abs(trace.values - trace.values[mirror]).max() < 1e-10


def test_adjoint_zero_datum():
    """Test that a zero boundary datum gives W = 0."""
    print("🧪 Testing Adjoint With Zero Datum")
    print("=" * 50)

    mesh = disk(0.05)
    U = solve_unperturbed(mesh, LinearXSource()).u
    W = solve_adjoint(mesh, U, np.zeros(len(mesh.boundary_nodes)))
    assert not np.any(W.values)


def test_adjoint_balance():
    """Test ∫ 3U²W = ∫ datum for U = 1, full and half boundary."""
    print("🧪 Testing Adjoint Balance")
    print("=" * 50)

    mesh = disk(0.05)
    U = NodalField.on(mesh, np.ones(mesh.n_nodes))
    datum = np.ones(len(mesh.boundary_nodes))
    W = solve_adjoint(mesh, U, datum)
    balance = 3.0 * lumped_mass(mesh) @ W.values
    print(f"3∫W = {balance:.6f}, perimeter {mesh.edge_lengths.sum():.6f}")
    assert balance == pytest.approx(mesh.edge_lengths.sum(), rel=1e-8)

    half = build_partition(1, 0.25)
    W_half = solve_adjoint(mesh, U, datum, half)
    expected = assemble_boundary_load(mesh, datum, half).values.sum()
    assert 3.0 * lumped_mass(mesh) @ W_half.values == pytest.approx(expected, rel=1e-8)
    assert expected == pytest.approx(np.pi, abs=mesh.edge_lengths.max())


def test_adjoint_regularisation_warning():
    """Test the regularised adjoint solve for a vanishing unperturbed state."""
    print("🧪 Testing Adjoint Regularisation")
    print("=" * 50)

    mesh = disk(0.1)
    with pytest.warns(RegularizationWarning):
        W = solve_adjoint(mesh, NodalField.zeros(mesh), np.cos(mesh.boundary_angles))
    assert np.all(np.isfinite(W.values))

    # small but nonzero states leave the reaction term below the solver's kernel test
    mesh = disk(0.05)
    datum = np.cos(mesh.boundary_angles) + 0.5
    for level in (1e-7, 1e-6, 1e-5):
        with pytest.warns(RegularizationWarning):
            W = solve_adjoint(mesh, NodalField.on(mesh, np.full(mesh.n_nodes, level)), datum)
        print(f"U = {level:g}: max |W| = {W.max_abs():.3e}")
        assert np.all(np.isfinite(W.values))

    with warnings.catch_warnings():
        warnings.simplefilter("error", RegularizationWarning)
        W = solve_adjoint(mesh, NodalField.on(mesh, np.full(mesh.n_nodes, 0.5)), datum)
    assert np.all(np.isfinite(W.values))


if __name__ == "__main__":
    print("⚙️ Solver Test Suite")
    print("=" * 60)

    results = {}
    for name, test in [
        ("Newton configuration", test_newton_config),
        ("Constant source", test_constant_source),
        ("Polynomial sources", test_polynomial_sources_converge),
        ("Forward with inclusion", test_forward_with_inclusion),
        ("Zero start", test_zero_start),
        ("Forward errors", test_forward_errors),
        ("Unperturbed solve", test_unperturbed_matches_forward),
        ("Odd symmetry", test_odd_symmetry),
        ("Radial source", test_radial_source),
        ("Boundary trace", test_boundary_trace),
        ("Adjoint zero datum", test_adjoint_zero_datum),
        ("Adjoint balance", test_adjoint_balance),
        ("Adjoint regularisation", test_adjoint_regularisation_warning),
    ]:
        try:
            test()
            results[name] = True
        except AssertionError:
            results[name] = False

    print("\n✅ Testing completed!")
    print("\n📋 Summary:")
    for name, ok in results.items():
        print(f"• {name}: {'✅ Success' if ok else '❌ Failed'}")
