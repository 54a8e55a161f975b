"""Galerkin assembly of the impedance Maxwell system.

The sesquilinear form (curl u, curl v) - kappa^2 (u, v) - i kappa lambda
<u_T, v_T>_Gamma is assembled over the cube mesh into a complex sparse
matrix A together with its diagnostic parts: the curl-curl matrix S, the
volume mass matrix Mv and the boundary tangential mass matrix B, so that
A = S - kappa^2 Mv - i kappa lambda B entrywise.  Conjugation sits on the
test slot; with the real-valued basis used here the load reduces to
b[i] = (f, phi_i) + <g, phi_i,T>.

All tetrahedra of one (geometry class, orientation key) group share their
local matrices, so per-group blocks are computed once and scattered; the
scatter order is fixed, which makes assembly bitwise reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .fe_basis import FeSpace, map_points, push_forward
from .manufactured import ProblemParams
from .mesh import LOCAL_FACES, REFERENCE_VERTICES, Mesh
from .quadrature import QuadraturePolicy, tet_rule, tri_rule


@dataclass
class AssembledSystem:
    """System matrix, load vector and diagnostic matrix parts."""

    A: sp.csr_matrix            # complex; A = S - kappa^2 Mv - i kappa lam B
    b: np.ndarray               # complex load vector
    S: sp.csr_matrix            # curl-curl part (real)
    Mv: sp.csr_matrix           # volume mass (real)
    B: sp.csr_matrix            # boundary tangential mass (real)
    params: ProblemParams
    assembly_degree: int
    field_degree: int
    assemble_seconds: float = 0.0

    @property
    def n(self) -> int:
        return self.A.shape[0]


def _face_frame(space: FeSpace, cls: int, key_id: int, slot: int):
    """Rank-ordered reference face triple and its physical tangents/normal."""
    key = space.dof_map.keys[key_id]
    tri = sorted(LOCAL_FACES[slot], key=lambda v: key[v])
    va = REFERENCE_VERTICES[tri[0]]
    t1_ref = REFERENCE_VERTICES[tri[1]] - va
    t2_ref = REFERENCE_VERTICES[tri[2]] - va
    B = space.group_map(cls)
    t1, t2 = B @ t1_ref, B @ t2_ref
    normal = np.cross(t1, t2)
    # orient outward: away from the vertex opposite to the face
    opposite = ({0, 1, 2, 3} - set(LOCAL_FACES[slot])).pop()
    center_ref = (REFERENCE_VERTICES[tri[0]] + REFERENCE_VERTICES[tri[1]] + REFERENCE_VERTICES[tri[2]]) / 3.0
    outward = B @ (center_ref - REFERENCE_VERTICES[opposite])
    if np.dot(normal, outward) < 0:
        normal = -normal
    area_factor = np.linalg.norm(np.cross(t1, t2))
    normal = normal / np.linalg.norm(normal)
    return va, t1_ref, t2_ref, normal, area_factor


def _boundary_groups(mesh: Mesh):
    """Boundary face indices grouped by (owner class, owner slot)."""
    groups = {}
    for bidx in range(mesh.n_boundary_faces):
        owner = int(mesh.boundary_owner[bidx])
        gid = (int(mesh.tet_class[owner]), int(mesh.boundary_slot[bidx]))
        groups.setdefault(gid, []).append(bidx)
    return [(cls, slot, np.array(ids, dtype=np.int64)) for (cls, slot), ids in sorted(groups.items())]


def _tangential(values: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """u_T = u - (u . nu) nu along the trailing axis."""
    return values - np.tensordot(values, normal, axes=(-1, 0))[..., None] * normal


class _Triplets:
    def __init__(self, dtype):
        self.rows, self.cols, self.vals = [], [], []
        self.dtype = dtype

    def add_blocks(self, dofs: np.ndarray, block: np.ndarray):
        """Scatter one shared local block for every row of ``dofs``."""
        n_el, n_loc = dofs.shape
        self.rows.append(np.broadcast_to(dofs[:, :, None], (n_el, n_loc, n_loc)).ravel())
        self.cols.append(np.broadcast_to(dofs[:, None, :], (n_el, n_loc, n_loc)).ravel())
        self.vals.append(np.broadcast_to(block[None, :, :], (n_el, n_loc, n_loc)).ravel())

    def add_varying(self, dofs: np.ndarray, blocks: np.ndarray):
        n_el, n_loc = dofs.shape
        self.rows.append(np.broadcast_to(dofs[:, :, None], (n_el, n_loc, n_loc)).ravel())
        self.cols.append(np.broadcast_to(dofs[:, None, :], (n_el, n_loc, n_loc)).ravel())
        self.vals.append(blocks.ravel())

    def tocsr(self, n: int) -> sp.csr_matrix:
        if not self.rows:
            return sp.csr_matrix((n, n), dtype=self.dtype)
        rows = np.concatenate(self.rows)
        cols = np.concatenate(self.cols)
        vals = np.concatenate(self.vals).astype(self.dtype)
        out = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        out.sum_duplicates()
        out.sort_indices()
        return out


def assemble(
    mesh: Mesh,
    space: FeSpace,
    params: ProblemParams,
    exact,
    policy: QuadraturePolicy | None = None,
) -> AssembledSystem:
    """Assemble A, b and the diagnostic parts S, Mv, B.

    ``exact`` supplies the volume load ``f(x)`` and boundary data
    ``g(x, nu)`` of the manufactured problem.
    """
    t0 = time.perf_counter()
    policy = policy or QuadraturePolicy()
    p = space.p
    kappa, lam = params.kappa, params.lam
    deg_asm = policy.for_assembly(p)
    deg_field = policy.for_fields(p, kappa, mesh.h)

    vol_rule = tet_rule(deg_asm)
    load_rule = tet_rule(deg_field)
    bnd_rule = tri_rule(deg_asm)
    bnd_load_rule = tri_rule(deg_field)

    n = space.n_dofs
    cell_dofs = space.dof_map.cell_dofs
    trip_S = _Triplets(np.float64)
    trip_M = _Triplets(np.float64)
    trip_B = _Triplets(np.float64)
    trip_A = _Triplets(np.complex128)
    b = np.zeros(n, dtype=np.complex128)

    # volume terms, one shared block per (class, key) group
    for cls, key_id, tets in space.groups:
        basis = space.basis(key_id)
        Bmap = space.group_map(cls)
        det = np.linalg.det(Bmap)
        vals, curls = push_forward(
            basis.eval_values(vol_rule.points), basis.eval_curls(vol_rule.points), Bmap
        )
        S_loc = det * np.einsum("q,qic,qjc->ij", vol_rule.weights, curls, curls)
        M_loc = det * np.einsum("q,qic,qjc->ij", vol_rule.weights, vals, vals)

        dofs = cell_dofs[tets]
        trip_S.add_blocks(dofs, S_loc)
        trip_M.add_blocks(dofs, M_loc)
        trip_A.add_blocks(dofs, S_loc - kappa * kappa * M_loc + 0j)

        # volume load: (f, phi_i) over every tetrahedron of the group
        lvals, _ = push_forward(
            basis.eval_values(load_rule.points), basis.eval_curls(load_rule.points), Bmap
        )
        origins = mesh.vertices[mesh.tets[tets, 0]]
        pts = map_points(Bmap, np.zeros(3), load_rule.points)[None, :, :] + origins[:, None, :]
        f_at = exact.f(pts)
        contrib = det * np.einsum("q,tqc,qic->ti", load_rule.weights, f_at, lvals)
        np.add.at(b, cell_dofs[tets].ravel(), contrib.ravel())

    # boundary terms: tangential mass and <g, phi_T>
    key_of_class = {cls: key_id for cls, key_id, _ in space.groups}
    for cls, slot, bidx in _boundary_groups(mesh):
        key_id = key_of_class[cls]
        basis = space.basis(key_id)
        Bmap = space.group_map(cls)
        va, t1_ref, t2_ref, normal, area = _face_frame(space, cls, key_id, slot)
        owners = mesh.boundary_owner[bidx]
        dofs = cell_dofs[owners]

        ref_pts = (
            va[None, :]
            + bnd_rule.points[:, 0:1] * t1_ref[None, :]
            + bnd_rule.points[:, 1:2] * t2_ref[None, :]
        )
        vals, _ = push_forward(basis.eval_values(ref_pts), basis.eval_curls(ref_pts), Bmap)
        tang = _tangential(vals, normal)
        B_loc = area * np.einsum("q,qic,qjc->ij", bnd_rule.weights, tang, tang)
        trip_B.add_blocks(dofs, B_loc)
        trip_A.add_blocks(dofs, -1j * kappa * lam * B_loc)

        ref_lpts = (
            va[None, :]
            + bnd_load_rule.points[:, 0:1] * t1_ref[None, :]
            + bnd_load_rule.points[:, 1:2] * t2_ref[None, :]
        )
        lvals, _ = push_forward(basis.eval_values(ref_lpts), basis.eval_curls(ref_lpts), Bmap)
        ltang = _tangential(lvals, normal)
        origins = mesh.vertices[mesh.tets[owners, 0]]
        pts = map_points(Bmap, np.zeros(3), ref_lpts)[None, :, :] + origins[:, None, :]
        g_at = exact.g(pts, normal)
        contrib = area * np.einsum("q,tqc,qic->ti", bnd_load_rule.weights, g_at, ltang)
        np.add.at(b, dofs.ravel(), contrib.ravel())

    system = AssembledSystem(
        A=trip_A.tocsr(n),
        b=b,
        S=trip_S.tocsr(n),
        Mv=trip_M.tocsr(n),
        B=trip_B.tocsr(n),
        params=params,
        assembly_degree=deg_asm,
        field_degree=deg_field,
    )
    system.assemble_seconds = time.perf_counter() - t0
    return system


def write_matrix_market(matrix: sp.spmatrix, path: str | Path, comment: str = "") -> None:
    """Dump a sparse matrix in Matrix Market coordinate format."""
    scipy.io.mmwrite(str(path), matrix.tocoo(), comment=comment)
