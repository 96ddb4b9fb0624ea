"""
Test script for disk meshing, mesh files and boundary partitions.
"""

from functools import lru_cache

import numpy as np
import pytest
from scipy.spatial import cKDTree

from exceptions import MeshError, MeshParseError, PartitionError, PreconditionError
from meshing import BoundaryPartition, Mesh, build_partition, generate_disk_mesh, load_mesh, save_mesh


@lru_cache(maxsize=None)
def disk(h, seed=0):
    return generate_disk_mesh(h, seed)


def test_disk_mesh_geometry():
    """Test node placement, orientation and edge lengths of the generated disk."""
    print("🧪 Testing Disk Mesh Geometry")
    print("=" * 50)

    h = 0.1
    mesh = disk(h)
    boundary = mesh.nodes[mesh.boundary_nodes]
    radii = np.hypot(boundary[:, 0], boundary[:, 1])
    print(f"Nodes: {mesh.n_nodes}, triangles: {mesh.n_triangles}, boundary nodes: {len(boundary)}")

    assert np.max(np.abs(radii - 1.0)) < 1e-12
    assert np.all(mesh.element_areas > 0.0)
    assert mesh.max_edge_length() <= 1.5 * h
    n_b = len(boundary)
    inscribed = 0.5 * n_b * np.sin(2.0 * np.pi / n_b)
    assert abs(mesh.element_areas.sum() - inscribed) < 1e-12
    assert abs(mesh.element_areas.sum() - np.pi) < 0.01
    assert abs(mesh.edge_lengths.sum() - 2.0 * np.pi) < 0.01


def test_boundary_cycle_order():
    """Test that boundary edges form one counterclockwise cycle."""
    print("🧪 Testing Boundary Cycle Order")
    print("=" * 50)

    mesh = disk(0.1)
    edges = mesh.boundary_edges
    assert np.array_equal(edges[:-1, 1], edges[1:, 0])
    assert edges[-1, 1] == edges[0, 0]
    angles = mesh.boundary_angles
    assert angles[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(angles) > 0.0)
    assert mesh.boundary_node_flags.sum() == len(edges)


def test_production_resolution():
    """Test the triangle count of the reference resolution h = 0.012."""
    print("🧪 Testing Reference Resolution")
    print("=" * 50)

    mesh = disk(0.012)
    print(f"h = 0.012: {mesh.n_triangles} triangles, longest edge {mesh.max_edge_length():.4f}")
    assert 18_000 <= mesh.n_triangles <= 42_000
    assert mesh.max_edge_length() <= 1.5 * 0.012


def test_seed_zero_mirror_symmetry():
    """Test that the seed-0 mesh is symmetric about the x axis."""
    print("🧪 Testing Mirror Symmetry")
    print("=" * 50)

    mesh = disk(0.05)
    mirrored = mesh.nodes * np.array([1.0, -1.0])
    distance, _ = cKDTree(mesh.nodes).query(mirrored)
    print(f"Largest mirror mismatch: {distance.max():.2e}")
    assert distance.max() < 1e-12


def test_refinement_seed_changes_mesh():
    """Test that different seeds give different but valid meshes."""
    print("🧪 Testing Refinement Seeds")
    print("=" * 50)

    a, b = disk(0.1, 0), disk(0.1, 1)
    assert a.mesh_id != b.mesh_id
    assert a.n_triangles == b.n_triangles
    assert generate_disk_mesh(0.1, 1) == b
    with pytest.raises(PreconditionError):
        generate_disk_mesh(0.0)
    with pytest.raises(MeshError):
        generate_disk_mesh(0.001, max_nodes=1000)


def test_point_queries():
    """Test locate, interpolate and distance_to_boundary."""
    print("🧪 Testing Point Queries")
    print("=" * 50)

    mesh = disk(0.1)
    values = mesh.nodes[:, 0] + 2.0 * mesh.nodes[:, 1]
    assert mesh.interpolate(values, (0.31, -0.27)) == pytest.approx(0.31 - 0.54, abs=1e-12)
    assert mesh.distance_to_boundary(np.array([[0.0, 0.0]]))[0] == pytest.approx(1.0, abs=0.01)
    assert mesh.distance_to_boundary(mesh.nodes[mesh.boundary_nodes]).max() < 1e-12
    assert list(mesh.contains_points(np.array([[0.0, 0.0], [1.5, 0.0]]))) == [True, False]
    with pytest.raises(MeshError):
        mesh.locate((2.0, 0.0))


def test_mesh_file_round_trip(tmp_path):
    """Test saving and loading a mesh."""
    print("🧪 Testing Mesh File Round Trip")
    print("=" * 50)

    mesh = disk(0.1)
    path = save_mesh(mesh, tmp_path / "mesh.txt")
    loaded = load_mesh(path)
    assert loaded == mesh
    assert loaded.mesh_id == mesh.mesh_id
    assert np.array_equal(loaded.arc_mid_angle, mesh.arc_mid_angle)


def _square_file(tmp_path, triangles, edges):
    nodes = ["0 0", "1 0", "1 1", "0 1"]
    lines = [f"{len(nodes)} {len(triangles)} {len(edges)}"] + nodes + triangles + edges
    path = tmp_path / "square.txt"
    path.write_text("\n".join(lines) + "\n")
    return path


def test_mesh_file_errors(tmp_path):
    """Test that invalid mesh files are rejected with the offending line."""
    print("🧪 Testing Mesh File Errors")
    print("=" * 50)

    edges = ["0 1", "1 2", "2 3", "3 0"]
    good = _square_file(tmp_path, ["0 1 2", "0 2 3"], edges)
    assert load_mesh(good).n_triangles == 2

    clockwise = _square_file(tmp_path, ["0 1 2", "0 3 2"], edges)
    with pytest.raises(MeshParseError) as excinfo:
        load_mesh(clockwise)
    print(f"Clockwise triangle: {excinfo.value}")
    assert excinfo.value.line == 7

    open_cycle = _square_file(tmp_path, ["0 1 2", "0 2 3"], edges[:3])
    with pytest.raises(MeshParseError) as excinfo:
        load_mesh(open_cycle)
    print(f"Open boundary: {excinfo.value}")
    assert "open boundary" in str(excinfo.value)

    out_of_range = _square_file(tmp_path, ["0 1 2", "0 2 7"], edges)
    with pytest.raises(MeshParseError) as excinfo:
        load_mesh(out_of_range)
    assert excinfo.value.line == 7


def test_partition_construction():
    """Test equispaced arcs and their validation."""
    print("🧪 Testing Boundary Partitions")
    print("=" * 50)

    partition = build_partition(16, 1.0 / 96.0)
    print(f"16 arcs, measure {partition.measure():.6f}")
    assert partition.n_arcs == 16
    assert partition.measure() == pytest.approx(16 * 2.0 * np.pi / 48.0, rel=1e-12)
    assert len(partition.split()) == 16

    with pytest.raises(PartitionError):
        build_partition(4, 0.2)
    with pytest.raises(PartitionError):
        BoundaryPartition(((0.0, 1.0), (0.5, 2.0)))
    with pytest.raises(PartitionError):
        BoundaryPartition(())

    full = BoundaryPartition(((0.0, 2.0 * np.pi),))
    assert full.contains(np.linspace(0.0, 6.0, 7)).all()


def test_partition_edge_mask():
    """Test that the masked edge length approximates the arc measure."""
    print("🧪 Testing Partition Edge Masks")
    print("=" * 50)

    mesh = disk(0.012)
    partition = build_partition(16, 1.0 / 96.0)
    covered = mesh.edge_lengths[partition.edge_mask(mesh)].sum()
    print(f"Covered length {covered:.4f}, arc measure {partition.measure():.4f}")
    assert abs(covered - partition.measure()) <= 16 * mesh.edge_lengths.max()

    wrapped = BoundaryPartition(((6.0, 6.0 + 0.5),))
    assert wrapped.contains([6.1, 0.1, 1.0]).tolist() == [True, True, False]


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    print("🔺 Meshing Test Suite")
    print("=" * 60)

    results = {}
    for name, test in [
        ("Disk geometry", test_disk_mesh_geometry),
        ("Boundary cycle", test_boundary_cycle_order),
        ("Reference resolution", test_production_resolution),
        ("Mirror symmetry", test_seed_zero_mirror_symmetry),
        ("Refinement seeds", test_refinement_seed_changes_mesh),
        ("Point queries", test_point_queries),
        ("Partitions", test_partition_construction),
        ("Edge masks", test_partition_edge_mask),
    ]:
        try:
            test()
            results[name] = True
        except AssertionError:
            results[name] = False
    with tempfile.TemporaryDirectory() as tmp:
        for name, test in [("File round trip", test_mesh_file_round_trip), ("File errors", test_mesh_file_errors)]:
            try:
                test(Path(tmp))
                results[name] = True
            except AssertionError:
                results[name] = False

    print("\n✅ Testing completed!")
    print("\n📋 Summary:")
    for name, ok in results.items():
        print(f"• {name}: {'✅ Success' if ok else '❌ Failed'}")
