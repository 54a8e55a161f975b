"""Second-type Nedelec reference basis, covariant transform and DOF map.

The local space on the reference tetrahedron is the full polynomial space
(P_p)^3 with the classical second-family moments as degrees of freedom:

* edge:     integrals of the tangential component against Legendre
            polynomials of degree <= p on the edge,
* face:     integrals of the in-plane components against the 2-D
            Raviart-Thomas-type space of index p-1,
* interior: integrals against the 3-D Raviart-Thomas-type space of
            index p-2.

Moments are parametric: edges use unnormalized tangents and arc parameter,
faces the two edge vectors out of their first vertex.  Written this way the
covariant (Piola) pullback leaves every moment invariant under affine
element maps, so two elements produce *identical* functionals for a shared
entity as long as both parametrize it from the same vertex order.  Entities
are therefore oriented by ascending global vertex index, and the reference
functionals of an element are built for the relative order ("orientation
key") of its four global vertex indices.  The interpolatory basis dual to a
keyed functional set is obtained by inverting its moment matrix over a
Legendre-product spanning set of (P_p)^3; only a handful of keys occur in a
mesh, so the inverses are cached.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _poly
from .mesh import LOCAL_EDGES, LOCAL_FACES, REFERENCE_VERTICES, Mesh
from .quadrature import interval_rule, tet_rule, tri_rule

SUPPORTED_ORDERS = (1, 2, 3)

IDENTITY_KEY = (0, 1, 2, 3)


def edge_dof_count(p: int) -> int:
    return p + 1

def face_dof_count(p: int) -> int:
    return p * p - 1

def interior_dof_count(p: int) -> int:
    return (p - 2) * (p - 1) * (p + 1) // 2 if p >= 3 else 0

def n_local_dofs(p: int) -> int:
    return (p + 1) * (p + 2) * (p + 3) // 2


def dof_count(M: int, p: int) -> int:
    """Global DOF count of the order-p space on the M x M x M cube mesh."""
    return M * (p + 1) * (3 * M * M * p * p + 3 * M * M * p + M * M + 6 * M * p + 3 * M + 3)


def _check_order(p: int) -> None:
    if p not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported order p={p}; supported: {SUPPORTED_ORDERS}")


def orientation_key(global_ids) -> tuple[int, int, int, int]:
    """Rank pattern of the four global vertex indices of a tetrahedron."""
    order = np.argsort(np.argsort(np.asarray(global_ids)))
    return tuple(int(r) for r in order)


def _oriented_edges(key):
    """Local edge endpoint pairs, each directed by ascending rank."""
    out = []
    for i, j in LOCAL_EDGES:
        out.append((i, j) if key[i] < key[j] else (j, i))
    return out


def _oriented_faces(key):
    """Local face triples reordered by ascending rank."""
    out = []
    for tri in LOCAL_FACES:
        out.append(tuple(sorted(tri, key=lambda v: key[v])))
    return out


def _radial_test_values(p_test: int, pts: np.ndarray) -> np.ndarray:
    """Values of the RT-type space (P_{k-1})^d + homog_{k-1} * x at ``pts``.

    ``p_test`` is the index k of the space; returns (n_fields, n_pts, d).
    Field order: full-polynomial fields monomial-major with component minor,
    then the radial fields in homogeneous-monomial order.
    """
    dim = pts.shape[1]
    k = p_test
    fields = []
    if k >= 1:
        exps = _poly.exponents(k - 1, dim)
        vals = _poly.eval_monomials(pts, k - 1, dim)
        for m in range(len(exps)):
            for d in range(dim):
                fld = np.zeros((pts.shape[0], dim))
                fld[:, d] = vals[:, m]
                fields.append(fld)
        homog = [m for m, e in enumerate(exps) if int(e.sum()) == k - 1]
        for m in homog:
            fields.append(vals[:, m][:, None] * pts)
    if not fields:
        return np.zeros((0, pts.shape[0], dim))
    return np.stack(fields)


@dataclass(frozen=True)
class BasisLayout:
    """Index ranges of the edge / face / interior blocks."""

    p: int
    edge_blocks: tuple[slice, ...]
    face_blocks: tuple[slice, ...]
    interior_block: slice
    entity: tuple[tuple, ...]  # per DOF: ("edge"|"face"|"interior", slot, idx)


def _build_layout(p: int) -> BasisLayout:
    ne, nf = edge_dof_count(p), face_dof_count(p)
    entity = []
    edge_blocks = []
    for slot in range(6):
        edge_blocks.append(slice(slot * ne, (slot + 1) * ne))
        entity += [("edge", slot, k) for k in range(ne)]
    base = 6 * ne
    face_blocks = []
    for slot in range(4):
        face_blocks.append(slice(base + slot * nf, base + (slot + 1) * nf))
        entity += [("face", slot, k) for k in range(nf)]
    base += 4 * nf
    ni = interior_dof_count(p)
    entity += [("interior", 0, k) for k in range(ni)]
    return BasisLayout(
        p=p,
        edge_blocks=tuple(edge_blocks),
        face_blocks=tuple(face_blocks),
        interior_block=slice(base, base + ni),
        entity=tuple(entity),
    )


class ReferenceBasis:
    """Interpolatory basis of (P_p)^3 dual to one keyed moment set.

    ``coeffs[m, d, i]`` holds the monomial coefficients of basis function i;
    ``rows[i, m, d]`` the moment functionals as linear forms on coefficient
    arrays.  Duality rows @ coeffs = identity holds to ~1e-14.
    """

    def __init__(self, p: int, key=IDENTITY_KEY):
        _check_order(p)
        self.p = p
        self.key = tuple(key)
        self.layout = _build_layout(p)
        self.n_dofs = n_local_dofs(p)
        self.rows = self._moment_rows()
        self.coeffs = self._invert()
        curls = np.empty_like(self.coeffs)
        for i in range(self.n_dofs):
            curls[:, :, i] = _poly.curl_coeffs(self.coeffs[:, :, i], p)
        self.curl_coeffs = curls

    # -- moment functionals -------------------------------------------------

    def _moment_rows(self) -> np.ndarray:
        p = self.p
        nm = _poly.space_dim(p)
        rows = []

        rule1 = interval_rule(2 * p + 2)
        s = rule1.points[:, 0]
        leg = _poly.shifted_legendre_values(p, s)
        for a, b in _oriented_edges(self.key):
            va, vb = REFERENCE_VERTICES[a], REFERENCE_VERTICES[b]
            pts = va[None, :] + s[:, None] * (vb - va)[None, :]
            mono = _poly.eval_monomials(pts, p)
            base = np.einsum("q,kq,qm->km", rule1.weights, leg, mono)
            rows.append(np.einsum("km,d->kmd", base, vb - va))

        if face_dof_count(p) > 0:
            rule2 = tri_rule(2 * p + 2)
            xi = rule2.points
            tests = _radial_test_values(p - 1, xi)
            for a, b, c in _oriented_faces(self.key):
                va = REFERENCE_VERTICES[a]
                t1 = REFERENCE_VERTICES[b] - va
                t2 = REFERENCE_VERTICES[c] - va
                pts = va[None, :] + xi[:, 0:1] * t1[None, :] + xi[:, 1:2] * t2[None, :]
                mono = _poly.eval_monomials(pts, p)
                tang = np.einsum("fq,d->fqd", tests[:, :, 0], t1) + np.einsum(
                    "fq,d->fqd", tests[:, :, 1], t2
                )
                rows.append(np.einsum("q,qm,fqd->fmd", rule2.weights, mono, tang))

        if interior_dof_count(p) > 0:
            rule3 = tet_rule(2 * p + 2)
            tests = _radial_test_values(p - 2, rule3.points)
            mono = _poly.eval_monomials(rule3.points, p)
            rows.append(np.einsum("q,qm,fqd->fmd", rule3.weights, mono, tests))

        out = np.concatenate(rows, axis=0)
        if out.shape != (self.n_dofs, nm, 3):
            raise AssertionError("moment count does not match the basis size")
        return out

    def _invert(self) -> np.ndarray:
        nm = _poly.space_dim(self.p)
        T3 = np.kron(_poly.legendre_product_basis(self.p), np.eye(3))
        R = self.rows.reshape(self.n_dofs, 3 * nm)
        V = R @ T3
        ident = np.eye(self.n_dofs)
        flat = T3 @ np.linalg.solve(V, ident)
        # Newton-Schulz refinement against the re-measured moments pushes
        # the duality residual to ~1e-15
        for _ in range(3):
            E = ident - R @ flat
            if np.max(np.abs(E)) < 1e-14:
                break
            flat = flat + flat @ E
        return flat.reshape(nm, 3, self.n_dofs)

    # -- evaluation ----------------------------------------------------------

    def eval_values(self, points: np.ndarray) -> np.ndarray:
        """Basis values at reference points; (n_pts, n_dofs, 3)."""
        mono = _poly.eval_monomials(points, self.p)
        return np.einsum("qm,mdi->qid", mono, self.coeffs)

    def eval_curls(self, points: np.ndarray) -> np.ndarray:
        """Reference curls at reference points; (n_pts, n_dofs, 3)."""
        mono = _poly.eval_monomials(points, self.p)
        return np.einsum("qm,mdi->qid", mono, self.curl_coeffs)

    def apply_moments(self, coeffs: np.ndarray) -> np.ndarray:
        """Apply all DOF functionals to an (n_mono, 3) vector polynomial."""
        return np.einsum("imd,md->i", self.rows, coeffs)

    def gram(self) -> np.ndarray:
        """Moments applied to the basis; equals identity up to roundoff."""
        return np.einsum("imd,mdj->ij", self.rows, self.coeffs)


@lru_cache(maxsize=None)
def oriented_basis(p: int, key: tuple) -> ReferenceBasis:
    return ReferenceBasis(p, key)


def build_reference_basis(p: int) -> ReferenceBasis:
    """Reference basis for the ascending-vertex orientation."""
    return oriented_basis(p, IDENTITY_KEY)


def push_forward(ref_values: np.ndarray, ref_curls: np.ndarray, B: np.ndarray):
    """Covariant map of reference field data to a physical element.

    With v(x) = B^{-T} v_hat(F^{-1} x) the curls transform as
    curl v = B curl_hat v_hat / det B.  Arrays have trailing dimension 3.
    """
    det = np.linalg.det(B)
    if abs(det) < 1e-300:
        raise ValueError("element map is singular")
    values = ref_values @ np.linalg.inv(B)
    curls = ref_curls @ B.T / det
    return values, curls


def map_points(B: np.ndarray, c: np.ndarray, ref_points: np.ndarray) -> np.ndarray:
    return ref_points @ B.T + c


@dataclass(frozen=True)
class DofMap:
    """Global numbering: edge DOFs, then face DOFs, then interior DOFs.

    Edge DOFs are ordered by Legendre moment degree along the ascending
    global edge, face DOFs by test-field index in the ascending-vertex face
    frame; both incident tetrahedra therefore address identical functionals,
    so no sign corrections appear here (beyond the orientation keys that
    already shaped the element bases).
    """

    p: int
    total_dofs: int
    cell_dofs: np.ndarray       # (n_tets, n_local_dofs)
    tet_keys: np.ndarray        # (n_tets,) index into ``keys``
    keys: tuple[tuple, ...]     # distinct orientation keys
    edge_offset: int
    face_offset: int
    interior_offset: int


def build_dof_map(mesh: Mesh, p: int) -> DofMap:
    _check_order(p)
    ne, nf, ni = edge_dof_count(p), face_dof_count(p), interior_dof_count(p)
    n_loc = n_local_dofs(p)
    n_tets = mesh.n_tets

    face_offset = mesh.n_edges * ne
    interior_offset = face_offset + mesh.n_faces * nf
    total = interior_offset + n_tets * ni
    if total != dof_count(mesh.M, p):
        raise AssertionError("entity DOF total disagrees with the closed formula")

    cell = np.empty((n_tets, n_loc), dtype=np.int64)
    pos = 0
    for slot in range(6):
        base = mesh.tet_edges[:, slot] * ne
        for k in range(ne):
            cell[:, pos] = base + k
            pos += 1
    for slot in range(4):
        base = face_offset + mesh.tet_faces[:, slot] * nf
        for k in range(nf):
            cell[:, pos] = base + k
            pos += 1
    tet_ids = np.arange(n_tets, dtype=np.int64)
    for k in range(ni):
        cell[:, pos] = interior_offset + tet_ids * ni + k
        pos += 1

    ranks = np.argsort(np.argsort(mesh.tets, axis=1), axis=1)
    uniq, inverse = np.unique(ranks, axis=0, return_inverse=True)
    keys = tuple(tuple(int(v) for v in row) for row in uniq)

    return DofMap(
        p=p,
        total_dofs=total,
        cell_dofs=cell,
        tet_keys=inverse.astype(np.int64),
        keys=keys,
        edge_offset=0,
        face_offset=face_offset,
        interior_offset=interior_offset,
    )


class FeSpace:
    """Order-p second-type Nedelec space over a cube mesh.

    Bundles the DOF map with the keyed reference bases and groups the
    tetrahedra by (geometry class, orientation key); within a group all
    element matrices coincide, which both assembly and norm evaluation
    exploit.
    """

    def __init__(self, mesh: Mesh, p: int):
        _check_order(p)
        self.mesh = mesh
        self.p = p
        self.dof_map = build_dof_map(mesh, p)
        self.n_dofs = self.dof_map.total_dofs
        self.n_local = n_local_dofs(p)

        groups = {}
        for t in range(mesh.n_tets):
            gid = (int(mesh.tet_class[t]), int(self.dof_map.tet_keys[t]))
            groups.setdefault(gid, []).append(t)
        self.groups = [
            (cls, key_id, np.array(ts, dtype=np.int64))
            for (cls, key_id), ts in sorted(groups.items())
        ]

    def basis(self, key_id: int) -> ReferenceBasis:
        return oriented_basis(self.p, self.dof_map.keys[key_id])

    def group_map(self, cls: int) -> np.ndarray:
        return self.mesh.class_maps[cls]
