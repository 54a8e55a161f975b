"""Reference basis, covariant transform, DOF map and conformity."""

import numpy as np
import pytest

from edgefem import _poly
from edgefem.fe_basis import (
    FeSpace,
    build_dof_map,
    build_reference_basis,
    dof_count,
    edge_dof_count,
    face_dof_count,
    interior_dof_count,
    map_points,
    n_local_dofs,
    oriented_basis,
    push_forward,
)
from edgefem.mesh import build_cube_mesh
from edgefem.quadrature import interval_rule, tri_rule


def test_basis_sizes_and_layout():
    expected = {1: (12, 2, 0, 0), 2: (30, 3, 3, 0), 3: (60, 4, 8, 4)}
    for p, (total, per_edge, per_face, interior) in expected.items():
        basis = build_reference_basis(p)
        assert basis.n_dofs == total == n_local_dofs(p)
        assert edge_dof_count(p) == per_edge
        assert face_dof_count(p) == per_face
        assert interior_dof_count(p) == interior
        assert basis.layout.edge_blocks[5] == slice(5 * per_edge, 6 * per_edge)
        assert basis.layout.interior_block.stop - basis.layout.interior_block.start == interior


@pytest.mark.parametrize("p", [1, 2, 3])
def test_duality(p):
    for key in ((0, 1, 2, 3), (0, 1, 3, 2), (3, 2, 1, 0), (1, 3, 0, 2)):
        basis = oriented_basis(p, key)
        residual = np.max(np.abs(basis.gram() - np.eye(basis.n_dofs)))
        assert residual <= 1e-12


@pytest.mark.parametrize("p", [1, 2, 3])
def test_monomial_span_reproduction(p):
    rng = np.random.default_rng(p)
    basis = build_reference_basis(p)
    pts = rng.dirichlet(np.ones(4), size=40)[:, :3]
    mono = _poly.eval_monomials(pts, p)
    for _ in range(10):
        coeffs = rng.standard_normal((_poly.space_dim(p), 3))
        dofs = basis.apply_moments(coeffs)
        recon = np.einsum("mdi,i->md", basis.coeffs, dofs)
        target = mono @ coeffs
        scale = np.max(np.abs(target))
        assert np.max(np.abs(mono @ recon - target)) <= 1e-10 * scale


def test_push_forward_identity_and_scaling():
    rng = np.random.default_rng(0)
    vals = rng.standard_normal((7, 5, 3))
    curls = rng.standard_normal((7, 5, 3))
    out_v, out_c = push_forward(vals, curls, np.eye(3))
    assert np.allclose(out_v, vals, atol=1e-15)
    assert np.allclose(out_c, curls, atol=1e-15)
    s = 2.5
    out_v, out_c = push_forward(vals, curls, s * np.eye(3))
    assert np.allclose(out_v, vals / s, atol=1e-14)
    assert np.allclose(out_c, curls / s**2, atol=1e-14)


def test_push_forward_singular_map_errors():
    B = np.zeros((3, 3))
    with pytest.raises(ValueError):
        push_forward(np.zeros((1, 1, 3)), np.zeros((1, 1, 3)), B)


def test_push_forward_preserves_edge_line_integrals():
    # tangential line integrals along mapped edges match the reference ones
    rng = np.random.default_rng(42)
    p = 2
    basis = build_reference_basis(p)
    B = rng.standard_normal((3, 3))
    B += 4.0 * np.eye(3) * np.sign(np.linalg.det(B + 4.0 * np.eye(3)))
    c = rng.standard_normal(3)
    rule = interval_rule(12)
    s = rule.points[:, 0]
    from edgefem.mesh import LOCAL_EDGES, REFERENCE_VERTICES

    coeffs = rng.standard_normal(basis.n_dofs)
    for a, b in LOCAL_EDGES:
        va, vb = REFERENCE_VERTICES[a], REFERENCE_VERTICES[b]
        ref_pts = va[None, :] + s[:, None] * (vb - va)[None, :]
        ref_vals = np.einsum("qid,i->qd", basis.eval_values(ref_pts), coeffs)
        ref_integral = rule.weights @ (ref_vals @ (vb - va))

        vals, _ = push_forward(
            basis.eval_values(ref_pts), basis.eval_curls(ref_pts), B
        )
        phys_vals = np.einsum("qid,i->qd", vals, coeffs)
        tangent = map_points(B, c, vb[None, :])[0] - map_points(B, c, va[None, :])[0]
        phys_integral = rule.weights @ (phys_vals @ tangent)
        assert phys_integral == pytest.approx(ref_integral, rel=1e-12)


def test_dof_counts():
    mesh = build_cube_mesh(1)
    assert build_dof_map(mesh, 1).total_dofs == 38
    assert build_dof_map(mesh, 2).total_dofs == 111
    assert build_dof_map(mesh, 3).total_dofs == 244
    # closed formula vs entity assembly for all (M, p) in {1..4} x {1,2,3}
    for M in (1, 2, 3, 4):
        mesh = build_cube_mesh(M)
        for p in (1, 2, 3):
            assert build_dof_map(mesh, p).total_dofs == dof_count(M, p)


def test_dof_map_shared_entities_consistent():
    mesh = build_cube_mesh(2)
    for p in (1, 2, 3):
        dof_map = build_dof_map(mesh, p)
        ne = edge_dof_count(p)
        for t in range(0, mesh.n_tets, 5):
            for slot in range(6):
                g = mesh.tet_edges[t, slot]
                expect = np.arange(g * ne, (g + 1) * ne)
                got = dof_map.cell_dofs[t, slot * ne : (slot + 1) * ne]
                assert np.array_equal(got, expect)


def test_orientation_keys_in_kuhn_mesh():
    mesh = build_cube_mesh(3)
    dof_map = build_dof_map(mesh, 1)
    assert set(dof_map.keys) == {(0, 1, 2, 3), (0, 1, 3, 2)}


def test_unsupported_order():
    mesh = build_cube_mesh(1)
    with pytest.raises(ValueError):
        build_dof_map(mesh, 4)
    with pytest.raises(ValueError):
        build_reference_basis(0)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_tangential_continuity_random_fields(p):
    mesh = build_cube_mesh(2)
    space = FeSpace(mesh, p)
    rng = np.random.default_rng(100 + p)
    u = rng.standard_normal(space.n_dofs) + 1j * rng.standard_normal(space.n_dofs)
    rule = tri_rule(5)

    incidence = {}
    for t in range(mesh.n_tets):
        for slot in range(4):
            incidence.setdefault(int(mesh.tet_faces[t, slot]), []).append(t)
    checked = 0
    for fidx, tets in incidence.items():
        if len(tets) != 2 or checked > 30:
            continue
        tri = mesh.faces[fidx]
        va = mesh.vertices[tri[0]]
        t1 = mesh.vertices[tri[1]] - va
        t2 = mesh.vertices[tri[2]] - va
        normal = np.cross(t1, t2)
        normal /= np.linalg.norm(normal)
        pts = va[None, :] + rule.points[:, 0:1] * t1[None, :] + rule.points[:, 1:2] * t2[None, :]
        sides = []
        for t in tets:
            B, c = mesh.element_map(t)
            ref = np.linalg.solve(B, (pts - c).T).T
            basis = space.basis(int(space.dof_map.tet_keys[t]))
            vals, _ = push_forward(basis.eval_values(ref), basis.eval_curls(ref), B)
            uh = np.einsum("i,qic->qc", u[space.dof_map.cell_dofs[t]], vals)
            sides.append(uh - (uh @ normal)[:, None] * normal)
        assert np.max(np.abs(sides[0] - sides[1])) <= 1e-10
        checked += 1
    assert checked > 10
