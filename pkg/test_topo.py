"""
Test script for polarization tensors and the topological gradient.
"""

from functools import lru_cache

import numpy as np
import pytest

from exceptions import PreconditionError
from fem import InclusionSpec, NodalField
from meshing import generate_disk_mesh
from topo import (PolarizationTensor, argmin_interior, circle_tensor, ellipse_tensor,
                  evaluate_at, gradient_field, interior_nodes, recover_nodal_gradient, tensor_for_inclusion,
                  topological_gradient)


@lru_cache(maxsize=None)
def disk(h, seed=0):
    return generate_disk_mesh(h, seed)


def _random_fields(mesh, seed=7):
    rng = np.random.default_rng(seed)
    return rng.normal(size=mesh.n_nodes), rng.normal(size=mesh.n_nodes)


def test_circle_tensor():
    """Test the isotropic tensor of a disk."""
    print("🧪 Testing Circle Tensor")
    print("=" * 50)

    tensor = circle_tensor(0.1, 1.0)
    assert tensor.is_isotropic
    assert tensor.m[0, 0] == pytest.approx(2.0 / 1.1)
    assert np.array_equal(circle_tensor(1.0, np.pi).m, np.pi * np.eye(2))
    assert tensor.to_dict()['provenance'] == "circle"
    for k, area in ((0.0, 1.0), (0.1, 0.0), (-1.0, 1.0)):
        with pytest.raises(PreconditionError):
            circle_tensor(k, area)


def test_ellipse_tensor():
    """Test ellipse eigenvalues, the circle limit and rotation covariance."""
    print("🧪 Testing Ellipse Tensor")
    print("=" * 50)

    k, area = 0.1, 0.7
    assert np.array_equal(ellipse_tensor(k, (0.6, 0.8), 1.0, area).m, circle_tensor(k, area).m)

    aligned = ellipse_tensor(k, (1.0, 0.0), 0.5, area)
    print(f"Aligned tensor diagonal: {np.diag(aligned.m)}")
    assert np.allclose(aligned.m, np.diag([area * 1.5 / 1.05, area * 1.5 / 0.6]))
    assert not aligned.is_isotropic

    for theta in (0.3, 1.1, 2.5):
        q = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        rotated = ellipse_tensor(k, (np.cos(theta), np.sin(theta)), 0.5, area)
        assert np.allclose(rotated.m, q @ aligned.m @ q.T, atol=1e-12)
        assert rotated.m[0, 1] == rotated.m[1, 0]
        assert np.allclose(rotated.eigenvalues(), aligned.eigenvalues())

    with pytest.raises(PreconditionError):
        ellipse_tensor(k, (1.0, 1.0), 0.5, area)
    with pytest.raises(PreconditionError):
        ellipse_tensor(k, (1.0, 0.0), 1.5, area)


def test_tensor_selection():
    """Test the tensor chosen for known inclusion shapes."""
    print("🧪 Testing Tensor Selection")
    print("=" * 50)

    ellipse = InclusionSpec.ellipse((0.0, 0.0), 0.1, axis=(0.0, 1.0), ratio=0.5, k_in=0.2)
    assert np.array_equal(tensor_for_inclusion(ellipse).m, ellipse_tensor(0.2, (0.0, 1.0), 0.5, 1.0).m)
    assert np.array_equal(tensor_for_inclusion(ellipse, assume_circle=True).m, circle_tensor(0.2, 1.0).m)
    assert np.array_equal(tensor_for_inclusion(ellipse, k=0.5, area=2.0).m, ellipse_tensor(0.5, (0.0, 1.0), 0.5, 2.0).m)
    lshape = InclusionSpec.lshape((0.0, 0.0), 0.1)
    assert tensor_for_inclusion(lshape).provenance == "circle"

    custom = PolarizationTensor([[1.0, 0.5], [0.5, 2.0]], "custom")
    assert custom.provenance == "custom" and not custom.is_isotropic
    with pytest.raises(PreconditionError):
        PolarizationTensor(np.array([[1.0, 0.5], [0.4, 2.0]]), "custom")
    with pytest.raises(PreconditionError):
        PolarizationTensor([[np.nan, 0.0], [0.0, 1.0]], "custom")


def test_gradient_recovery():
    """Test nodal gradient recovery on affine and quadratic fields."""
    print("🧪 Testing Gradient Recovery")
    print("=" * 50)

    mesh = disk(0.1)
    x, y = mesh.nodes[:, 0], mesh.nodes[:, 1]
    grad = recover_nodal_gradient(mesh, x + 2.0 * y)
    assert np.allclose(grad, [1.0, 2.0], atol=1e-10)
    assert np.abs(recover_nodal_gradient(mesh, np.full(mesh.n_nodes, 5.0))).max() < 1e-10

    errors = []
    for h in (0.1, 0.05):
        mesh = disk(h)
        x = mesh.nodes[:, 0]
        errors.append(np.abs(recover_nodal_gradient(mesh, x * x)[:, 0] - 2.0 * x).max())
    print(f"Max recovery error for x²: {errors}")
    assert errors[1] < 0.75 * errors[0]


def test_gradient_formula():
    """Test G against the closed-form circle expression."""
    print("🧪 Testing Gradient Formula")
    print("=" * 50)

    mesh = disk(0.1)
    U, W = _random_fields(mesh)
    k = 0.1
    G = topological_gradient(mesh, U, W, k, circle_tensor(k, 1.0)).values
    gu, gw = recover_nodal_gradient(mesh, U), recover_nodal_gradient(mesh, W)
    dot = gu[:, 0] * gw[:, 0] + gu[:, 1] * gw[:, 1]
    expected = (1.0 - k) * (2.0 * 1.0 / (1.0 + k)) * dot + U ** 3 * W
    assert np.array_equal(G, expected)

    aligned = ellipse_tensor(k, (1.0, 0.0), 0.5, 1.0)
    G = topological_gradient(mesh, U, W, k, aligned).values
    m = aligned.m
    expected = (1.0 - k) * (m[0, 0] * gu[:, 0] * gw[:, 0] + m[1, 1] * gu[:, 1] * gw[:, 1]) + U ** 3 * W
    assert np.allclose(G, expected, rtol=1e-13, atol=1e-13)


def test_gradient_degenerate_cases():
    """Test W = 0, k = 1 and linearity in W."""
    print("🧪 Testing Degenerate Gradients")
    print("=" * 50)

    mesh = disk(0.1)
    U, W = _random_fields(mesh)
    tensor = circle_tensor(0.1, 1.0)
    assert not np.any(topological_gradient(mesh, U, np.zeros(mesh.n_nodes), 0.1, tensor).values)
    assert np.array_equal(topological_gradient(mesh, U, W, 1.0, circle_tensor(1.0, 1.0)).values, U ** 3 * W)

    base = topological_gradient(mesh, U, W, 0.1, tensor)
    tripled = topological_gradient(mesh, U, 3.0 * W, 0.1, tensor)
    assert np.allclose(tripled.values, 3.0 * base.values, rtol=1e-12, atol=1e-12)
    assert tripled.min_node == base.min_node
    assert np.allclose(base.scaled(3.0).values, tripled.values, rtol=1e-12, atol=1e-12)


def test_interior_minimum():
    """Test the margin-restricted argmin and the boundary violation flag."""
    print("🧪 Testing Interior Minimum")
    print("=" * 50)

    mesh = disk(0.1)
    values = np.zeros(mesh.n_nodes)
    values[0] = -1.0
    detection = argmin_interior(gradient_field(mesh, values), mesh)
    assert detection.node == 0
    assert np.allclose(detection.point, (0.0, 0.0), atol=1e-12)
    assert not detection.boundary_violation and not detection.flat

    b = int(mesh.boundary_nodes[5])
    values = np.zeros(mesh.n_nodes)
    values[b] = -1.0
    detection = argmin_interior(gradient_field(mesh, values, margin=0.05), mesh)
    print(f"Boundary spike: detected node {detection.node}, unrestricted {detection.unrestricted_node}")
    assert detection.node == 0
    assert detection.unrestricted_node == b
    assert detection.boundary_violation
    detection = argmin_interior(gradient_field(mesh, values, margin=0.0), mesh)
    assert detection.node == b and not detection.boundary_violation

    assert len(interior_nodes(mesh, 0.05)) < mesh.n_nodes
    with pytest.raises(PreconditionError):
        gradient_field(mesh, values, margin=2.0)


def test_flat_field():
    """Test the flat-field diagnostic."""
    print("🧪 Testing Flat Field")
    print("=" * 50)

    mesh = disk(0.1)
    detection = argmin_interior(gradient_field(mesh, np.zeros(mesh.n_nodes)), mesh)
    assert detection.flat and detection.node == 0

    tiny = np.full(mesh.n_nodes, -1e-12)
    assert not argmin_interior(gradient_field(mesh, tiny), mesh).flat
    flagged = argmin_interior(gradient_field(mesh, tiny), mesh, flat=True)
    assert flagged.flat and not flagged.boundary_violation


def test_point_evaluation():
    """Test P1 evaluation of a gradient field off the nodes."""
    print("🧪 Testing Point Evaluation")
    print("=" * 50)

    mesh = disk(0.1)
    field = gradient_field(mesh, 1.0 - mesh.nodes[:, 0] + 3.0 * mesh.nodes[:, 1])
    assert evaluate_at(field, mesh, (0.2, -0.1)) == pytest.approx(1.0 - 0.2 - 0.3, abs=1e-12)
    assert evaluate_at(field.g, mesh, (0.2, -0.1)) == evaluate_at(field, mesh, (0.2, -0.1))
    assert isinstance(field.g, NodalField)


if __name__ == "__main__":
    print("🎯 Topological Gradient Test Suite")
    print("=" * 60)

    results = {}
    for name, test in [
        ("Circle tensor", test_circle_tensor),
        ("Ellipse tensor", test_ellipse_tensor),
        ("Tensor selection", test_tensor_selection),
        ("Gradient recovery", test_gradient_recovery),
        ("Gradient formula", test_gradient_formula),
        ("Degenerate gradients", test_gradient_degenerate_cases),
        ("Interior minimum", test_interior_minimum),
        ("Flat field", test_flat_field),
        ("Point evaluation", test_point_evaluation),
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
