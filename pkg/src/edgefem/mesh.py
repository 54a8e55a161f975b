"""Structured tetrahedral meshes of the unit cube.

The cube (0,1)^3 is split into an M x M x M grid of cells of side 1/M and
each cell into the six Kuhn tetrahedra K_pi = {x : x_pi(1) >= x_pi(2) >=
x_pi(3)} (translated per cell).  Kuhn tetrahedra are chains of unit steps
along the axes, which makes the induced face diagonals agree between
neighbouring cells, so the mesh is conforming without any case analysis.

Vertices are numbered lexicographically in their (i, j, k) grid indices.
A chain step raises exactly one grid index, so the four chain vertices of
every tetrahedron are already sorted by global index; tetrahedra built from
odd axis permutations store their last two vertices swapped to keep the
signed volume positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

#: the six axis permutations, paired with their parity (+1 even, -1 odd)
KUHN_PERMUTATIONS = (
    ((0, 1, 2), +1),
    ((0, 2, 1), -1),
    ((1, 0, 2), -1),
    ((1, 2, 0), +1),
    ((2, 0, 1), +1),
    ((2, 1, 0), -1),
)

#: local edges / faces of a tetrahedron, by local vertex index
LOCAL_EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
LOCAL_FACES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))

#: reference tetrahedron vertices
REFERENCE_VERTICES = np.array(
    [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
)

# guard against sparse index overflow: highest DOF count occurs at p = 3
_INDEX_MAX = 2**31 - 1


def _dof_count_p3(M: int) -> int:
    return M * 4 * (3 * M * M * 9 + 3 * M * M * 3 + M * M + 18 * M + 3 * M + 3)


@dataclass(frozen=True)
class Mesh:
    """Conforming Kuhn-subdivided cube mesh with deduplicated entities.

    ``tets`` stores vertex indices with positive signed volume; ``tet_class``
    gives the axis-permutation class (0..5) whose geometry every tetrahedron
    shares up to translation.  Global edges are ascending vertex pairs and
    global faces ascending triples, both lexicographically sorted.
    """

    M: int
    vertices: np.ndarray          # (n_vertices, 3)
    tets: np.ndarray              # (n_tets, 4) vertex indices
    tet_class: np.ndarray         # (n_tets,) in 0..5
    class_maps: np.ndarray        # (6, 3, 3) Jacobians B of F(x) = B x + c
    edges: np.ndarray             # (n_edges, 2) ascending pairs
    faces: np.ndarray             # (n_faces, 3) ascending triples
    tet_edges: np.ndarray         # (n_tets, 6) global edge index per slot
    tet_faces: np.ndarray         # (n_tets, 4) global face index per slot
    boundary_faces: np.ndarray    # (n_bfaces,) indices into ``faces``
    boundary_normals: np.ndarray  # (n_bfaces, 3) unit outward normals
    boundary_owner: np.ndarray    # (n_bfaces,) owning tetrahedron
    boundary_slot: np.ndarray     # (n_bfaces,) local face slot in the owner
    _interior_mask: np.ndarray = field(repr=False, default=None)

    @property
    def h0(self) -> float:
        """Cube cell side length."""
        return 1.0 / self.M

    @property
    def h(self) -> float:
        """Mesh size: every Kuhn tetrahedron has the cell body diagonal."""
        return np.sqrt(3.0) / self.M

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_tets(self) -> int:
        return self.tets.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def n_boundary_faces(self) -> int:
        return self.boundary_faces.shape[0]

    def element_map(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        """Affine map F(x) = B x + c of tetrahedron ``t`` (det B > 0)."""
        return self.class_maps[self.tet_class[t]], self.vertices[self.tets[t, 0]]

    def interior_face_mask(self) -> np.ndarray:
        """Boolean mask over ``faces``: True where two tetrahedra meet."""
        return self._interior_mask

    def tets_of_class(self, cls: int) -> np.ndarray:
        return np.nonzero(self.tet_class == cls)[0]


def build_cube_mesh(M: int) -> Mesh:
    """Kuhn/Freudenthal subdivision of (0,1)^3 into 6 M^3 tetrahedra."""
    if M < 1:
        raise ValueError("M must be a positive integer")
    if _dof_count_p3(M) > _INDEX_MAX:
        raise ValueError(f"M = {M} would overflow 32-bit DOF indices")

    n1 = M + 1
    h0 = 1.0 / M

    grid = np.arange(n1, dtype=np.float64) / M
    I, J, K = np.meshgrid(np.arange(n1), np.arange(n1), np.arange(n1), indexing="ij")
    vertices = np.column_stack([grid[I.ravel()], grid[J.ravel()], grid[K.ravel()]])

    def vid(i, j, k):
        return (i * n1 + j) * n1 + k

    ci, cj, ck = np.meshgrid(np.arange(M), np.arange(M), np.arange(M), indexing="ij")
    ci, cj, ck = ci.ravel(), cj.ravel(), ck.ravel()
    n_cells = M**3

    tets = np.empty((6 * n_cells, 4), dtype=np.int64)
    tet_class = np.empty(6 * n_cells, dtype=np.int64)
    class_maps = np.empty((6, 3, 3))

    eye = np.eye(3, dtype=np.int64)
    for cls, (perm, parity) in enumerate(KUHN_PERMUTATIONS):
        # chain offsets in grid coordinates
        o = np.zeros((4, 3), dtype=np.int64)
        o[1] = eye[perm[0]]
        o[2] = eye[perm[0]] + eye[perm[1]]
        o[3] = 1
        if parity < 0:
            o[[2, 3]] = o[[3, 2]]
        ids = np.stack(
            [vid(ci + oi[0], cj + oi[1], ck + oi[2]) for oi in o], axis=1
        )
        tets[cls::6] = ids
        tet_class[cls::6] = cls
        class_maps[cls] = h0 * np.column_stack([o[1], o[2], o[3]]).astype(float)

    if not np.all(np.linalg.det(class_maps) > 0):
        raise AssertionError("element maps must have positive determinant")

    # global edges: deduplicate ascending vertex pairs over all slots
    le = np.array(LOCAL_EDGES)
    pair = np.sort(tets[:, le], axis=2).reshape(-1, 2)
    edge_key = pair[:, 0] * len(vertices) + pair[:, 1]
    edges_key, inv_e = np.unique(edge_key, return_inverse=True)
    edges = np.column_stack([edges_key // len(vertices), edges_key % len(vertices)])
    tet_edges = inv_e.reshape(-1, 6)

    # global faces: ascending triples
    lf = np.array(LOCAL_FACES)
    tri = np.sort(tets[:, lf], axis=2).reshape(-1, 3)
    nv = len(vertices)
    face_key = (tri[:, 0] * nv + tri[:, 1]) * nv + tri[:, 2]
    faces_key, inv_f, counts = np.unique(face_key, return_inverse=True, return_counts=True)
    faces = np.column_stack(
        [faces_key // (nv * nv), (faces_key // nv) % nv, faces_key % nv]
    )
    tet_faces = inv_f.reshape(-1, 4)

    boundary_faces = np.nonzero(counts == 1)[0]
    interior_mask = counts == 2

    # the single incidence of each boundary face gives its owner and slot
    order = np.argsort(inv_f, kind="stable")
    first_pos = np.searchsorted(inv_f[order], boundary_faces)
    incidence = order[first_pos]
    boundary_owner = incidence // 4
    boundary_slot = incidence % 4

    boundary_normals = np.empty((len(boundary_faces), 3))
    for b, fidx in enumerate(boundary_faces):
        boundary_normals[b] = classify_boundary_face(vertices[faces[fidx]])

    return Mesh(
        M=M,
        vertices=vertices,
        tets=tets,
        tet_class=tet_class,
        class_maps=class_maps,
        edges=edges,
        faces=faces,
        tet_edges=tet_edges,
        tet_faces=tet_faces,
        boundary_faces=boundary_faces,
        boundary_normals=boundary_normals,
        boundary_owner=boundary_owner,
        boundary_slot=boundary_slot,
        _interior_mask=interior_mask,
    )


def classify_boundary_face(face_vertices: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Unit outward normal of a face lying on one of the six cube planes.

    Raises ValueError for faces that are not contained in a plane
    x_d in {0, 1}, i.e. interior faces.
    """
    pts = np.asarray(face_vertices, dtype=float)
    for d in range(3):
        if np.all(np.abs(pts[:, d]) <= tol):
            nu = np.zeros(3)
            nu[d] = -1.0
            return nu
        if np.all(np.abs(pts[:, d] - 1.0) <= tol):
            nu = np.zeros(3)
            nu[d] = 1.0
            return nu
    raise ValueError("face does not lie on the boundary of the unit cube")


def write_vtk(mesh: Mesh, path: str | Path, cell_data: dict[str, np.ndarray] | None = None) -> None:
    """Legacy ASCII VTK export (unstructured grid, cell type 10).

    ``cell_data`` maps names to per-tetrahedron scalar arrays.  The format is
    provided for visual inspection only.
    """
    lines = [
        "# vtk DataFile Version 3.0",
        f"edgefem cube mesh M={mesh.M}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_vertices} double",
    ]
    lines += [" ".join(repr(c) for c in v) for v in mesh.vertices]
    lines.append(f"CELLS {mesh.n_tets} {5 * mesh.n_tets}")
    lines += ["4 " + " ".join(str(i) for i in t) for t in mesh.tets]
    lines.append(f"CELL_TYPES {mesh.n_tets}")
    lines += ["10"] * mesh.n_tets
    if cell_data:
        lines.append(f"CELL_DATA {mesh.n_tets}")
        for name, values in cell_data.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines += [repr(float(v)) for v in values]
    Path(path).write_text("\n".join(lines) + "\n")
