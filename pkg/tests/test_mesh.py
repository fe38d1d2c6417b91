from __future__ import annotations

import numpy as np
import pytest

from lamegap.fem.geometry import Geometry, GeometryError
from lamegap.fem.mesh import (
    MeshError,
    MeshParams,
    add_inclusion_interiors,
    generate_mesh,
    read_mesh,
    write_mesh,
)


def test_geometry_validation():
    with pytest.raises(GeometryError):
        Geometry(eps=0.0)
    with pytest.raises(GeometryError):
        Geometry(eps=-0.1)
    with pytest.raises(GeometryError):
        Geometry(eps=0.1, R0=2.0)  # inclusions would poke out


def test_gap_matches_quadratic_model():
    g = Geometry(eps=0.05)
    assert g.gap(0.0) == pytest.approx(0.05)
    assert g.gap(0.1) == pytest.approx(g.gap_quadratic(0.1), rel=5e-3)


def test_mesh_valid_and_layered():
    g = Geometry(eps=0.05)
    m = generate_mesh(g, MeshParams(nz=8))
    m.validate()
    # nz layers across the gap at x=0: count nodes on the x=0 vertical line
    on_axis = np.isclose(m.nodes[:, 0], 0.0) & (np.abs(m.nodes[:, 1]) <= g.gap(0.0))
    corner_nodes = set(m.tris[:, :3].ravel().tolist())
    axis_corners = [i for i in np.nonzero(on_axis)[0] if i in corner_nodes]
    assert len(axis_corners) == 9  # nz + 1
    # a node sits exactly at the gap center
    assert np.isclose(np.linalg.norm(m.nodes, axis=1).min(), 0.0)


def test_neck_count_grows_as_eps_shrinks():
    counts = []
    for eps in (0.1, 0.05, 0.025, 0.0125):
        m = generate_mesh(Geometry(eps=eps))
        counts.append(len(m.elements_in("neck")))
    assert counts == sorted(counts)
    assert counts[-1] > counts[0]


def test_boundary_tags_form_closed_loops():
    m = generate_mesh(Geometry(eps=0.05))
    for tag in ("outer", "incl1", "incl2"):
        nodes = m.boundary_nodes(tag)
        assert len(nodes) > 10
    # boundary nodes actually lie on their circles
    g = m.geometry
    outer = m.nodes[m.boundary_nodes("outer")]
    assert np.allclose(np.hypot(outer[:, 0], outer[:, 1]), g.R0, atol=1e-9)
    inc1 = m.nodes[m.boundary_nodes("incl1")]
    c1 = g.center1
    assert np.allclose(np.hypot(inc1[:, 0] - c1[0], inc1[:, 1] - c1[1]), g.rho1, atol=1e-9)


def test_degenerate_requests_error():
    with pytest.raises(MeshError):
        generate_mesh(Geometry(eps=1e-13), MeshParams(nz=16))
    with pytest.raises(MeshError):
        generate_mesh(Geometry(eps=0.05), MeshParams(nz=1))
    with pytest.raises(MeshError):
        generate_mesh(Geometry(eps=0.05), MeshParams(neck_halfwidth=0.99))


def test_refined_params():
    p = MeshParams().refined(2.0)
    assert p.nz == 16 and p.ct == pytest.approx(0.175)


def test_io_roundtrip(tmp_path):
    g = Geometry(eps=0.05)
    m = generate_mesh(g)
    path = tmp_path / "mesh.txt"
    write_mesh(m, str(path))
    m2 = read_mesh(str(path))
    m2.geometry = g
    m2.validate()
    assert np.array_equal(m2.tris, m.tris)
    assert np.array_equal(m2.boundary_edges, m.boundary_edges)
    assert np.allclose(m2.nodes, m.nodes, atol=0)


def test_deterministic_generation():
    a = generate_mesh(Geometry(eps=0.025))
    b = generate_mesh(Geometry(eps=0.025))
    assert np.array_equal(a.nodes, b.nodes)
    assert np.array_equal(a.tris, b.tris)


def test_inclusion_interiors():
    g = Geometry(eps=0.05)
    m = add_inclusion_interiors(generate_mesh(g))
    m.validate()
    assert len(m.elements_in("incl1")) > 100
    assert len(m.elements_in("incl2")) > 100
    # only the outer circle remains a boundary
    assert len(m.boundary_nodes("incl1")) == 0
