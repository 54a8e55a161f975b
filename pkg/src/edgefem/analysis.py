"""Edge interpolation of exact fields and all error norms.

The interpolant applies the global DOF moments directly on physical
entities (edges and faces via their ascending-vertex parametrization,
interiors via the reference pullback), so shared-entity DOFs are computed
once and single-valuedness is automatic.

Norms: the kappa-weighted energy norm used in the experiment figures is
(||curl .||^2 + kappa^2 ||.||^2)^1/2; the full energy norm additionally
carries kappa lambda ||._T||^2 on the boundary.  Relative errors divide by
the corresponding norm of the exact field computed with the same
quadrature rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._poly import shifted_legendre_values
from .fe_basis import (
    FeSpace,
    _radial_test_values,
    edge_dof_count,
    face_dof_count,
    interior_dof_count,
    map_points,
    push_forward,
)
from .assembly import _boundary_groups, _face_frame, _tangential
from .manufactured import ProblemParams
from .quadrature import QuadraturePolicy, interval_rule, tet_rule, tri_rule


@dataclass
class FieldCoefficients:
    """Complex coefficient vector over the global DOFs of a space."""

    values: np.ndarray
    space: FeSpace

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.space.n_dofs,):
            raise ValueError("coefficient length does not match the space")


@dataclass(frozen=True)
class ErrorReport:
    """Absolute and relative errors in every norm of interest."""

    abs_l2: float
    rel_l2: float
    abs_curl: float
    rel_curl: float
    abs_trace: float
    rel_trace: float
    abs_energy: float          # (curl^2 + kappa^2 l2^2)^(1/2)
    rel_energy: float
    abs_energy_total: float    # adds kappa lambda trace^2
    rel_energy_total: float


def interpolate(exact, mesh, space: FeSpace, policy: QuadraturePolicy | None = None) -> FieldCoefficients:
    """Edge-element interpolant of an exact field."""
    policy = policy or QuadraturePolicy()
    p = space.p
    degree = policy.for_fields(p, exact.params.kappa, mesh.h)
    coeffs = np.zeros(space.n_dofs, dtype=np.complex128)

    ne = edge_dof_count(p)
    rule = interval_rule(degree)
    s = rule.points[:, 0]
    leg = shifted_legendre_values(p, s)
    lo = mesh.vertices[mesh.edges[:, 0]]
    tvec = mesh.vertices[mesh.edges[:, 1]] - lo
    pts = lo[:, None, :] + s[None, :, None] * tvec[:, None, :]
    tangential = np.einsum("eqc,ec->eq", exact.E(pts), tvec)
    edge_moments = np.einsum("q,kq,eq->ek", rule.weights, leg, tangential)
    coeffs[: mesh.n_edges * ne] = edge_moments.ravel()

    nf = face_dof_count(p)
    if nf > 0:
        rule2 = tri_rule(degree)
        tests = _radial_test_values(p - 1, rule2.points)
        va = mesh.vertices[mesh.faces[:, 0]]
        t1 = mesh.vertices[mesh.faces[:, 1]] - va
        t2 = mesh.vertices[mesh.faces[:, 2]] - va
        pts = (
            va[:, None, :]
            + rule2.points[None, :, 0:1] * t1[:, None, :]
            + rule2.points[None, :, 1:2] * t2[:, None, :]
        )
        E = exact.E(pts)
        u1 = np.einsum("fqc,fc->fq", E, t1)
        u2 = np.einsum("fqc,fc->fq", E, t2)
        face_moments = np.einsum("q,jq,fq->fj", rule2.weights, tests[:, :, 0], u1)
        face_moments += np.einsum("q,jq,fq->fj", rule2.weights, tests[:, :, 1], u2)
        start = space.dof_map.face_offset
        coeffs[start : start + mesh.n_faces * nf] = face_moments.ravel()

    ni = interior_dof_count(p)
    if ni > 0:
        rule3 = tet_rule(degree)
        tests = _radial_test_values(p - 2, rule3.points)
        start = space.dof_map.interior_offset
        for cls, _key_id, tets in space.groups:
            B = space.group_map(cls)
            mapped_tests = np.einsum("cd,jqd->jqc", B, tests)
            origins = mesh.vertices[mesh.tets[tets, 0]]
            pts = map_points(B, np.zeros(3), rule3.points)[None, :, :] + origins[:, None, :]
            moments = np.einsum("q,tqc,jqc->tj", rule3.weights, exact.E(pts), mapped_tests)
            idx = start + tets[:, None] * ni + np.arange(ni)[None, :]
            coeffs[idx.ravel()] = moments.ravel()

    return FieldCoefficients(coeffs, space)


def eval_field(u_h: FieldCoefficients, tets, ref_points: np.ndarray) -> np.ndarray:
    """Discrete field values at reference points of given tetrahedra.

    Returns an array of shape (len(tets), n_points, 3).
    """
    space = u_h.space
    mesh = space.mesh
    tets = np.asarray(tets, dtype=np.int64)
    out = np.empty((len(tets), len(ref_points), 3), dtype=np.complex128)
    for pos, t in enumerate(tets):
        B, _c = mesh.element_map(int(t))
        basis = space.basis(int(space.dof_map.tet_keys[t]))
        vals, _ = push_forward(basis.eval_values(ref_points), basis.eval_curls(ref_points), B)
        out[pos] = np.einsum("i,qic->qc", u_h.values[space.dof_map.cell_dofs[t]], vals)
    return out


def _volume_sums(u_h: FieldCoefficients, exact, degree: int):
    """Squared L2/curl sums of (E - u_h) and of E over the volume."""
    space = u_h.space
    mesh = space.mesh
    rule = tet_rule(degree)
    num_l2 = den_l2 = num_curl = den_curl = 0.0
    for cls, key_id, tets in space.groups:
        basis = space.basis(key_id)
        B = space.group_map(cls)
        det = np.linalg.det(B)
        vals, curls = push_forward(
            basis.eval_values(rule.points), basis.eval_curls(rule.points), B
        )
        dof_vals = u_h.values[space.dof_map.cell_dofs[tets]]
        uh = np.einsum("ti,qic->tqc", dof_vals, vals)
        uh_curl = np.einsum("ti,qic->tqc", dof_vals, curls)
        origins = mesh.vertices[mesh.tets[tets, 0]]
        pts = map_points(B, np.zeros(3), rule.points)[None, :, :] + origins[:, None, :]
        E = exact.E(pts)
        curl_E = exact.curl_E(pts)
        w = rule.weights
        num_l2 += det * float(np.einsum("q,tqc->", w, np.abs(E - uh) ** 2))
        den_l2 += det * float(np.einsum("q,tqc->", w, np.abs(E) ** 2))
        num_curl += det * float(np.einsum("q,tqc->", w, np.abs(curl_E - uh_curl) ** 2))
        den_curl += det * float(np.einsum("q,tqc->", w, np.abs(curl_E) ** 2))
    return num_l2, den_l2, num_curl, den_curl


def _trace_sums(u_h: FieldCoefficients, exact, degree: int):
    """Squared tangential-trace sums of (E - u_h) and E over the boundary."""
    space = u_h.space
    mesh = space.mesh
    rule = tri_rule(degree)
    key_of_class = {cls: key_id for cls, key_id, _ in space.groups}
    num = den = 0.0
    for cls, slot, bidx in _boundary_groups(mesh):
        key_id = key_of_class[cls]
        basis = space.basis(key_id)
        B = space.group_map(cls)
        va, t1_ref, t2_ref, normal, area = _face_frame(space, cls, key_id, slot)
        ref_pts = (
            va[None, :]
            + rule.points[:, 0:1] * t1_ref[None, :]
            + rule.points[:, 1:2] * t2_ref[None, :]
        )
        vals, _ = push_forward(basis.eval_values(ref_pts), basis.eval_curls(ref_pts), B)
        tang = _tangential(vals, normal)
        owners = mesh.boundary_owner[bidx]
        dof_vals = u_h.values[space.dof_map.cell_dofs[owners]]
        uh_t = np.einsum("ti,qic->tqc", dof_vals, tang)
        origins = mesh.vertices[mesh.tets[owners, 0]]
        pts = map_points(B, np.zeros(3), ref_pts)[None, :, :] + origins[:, None, :]
        E_t = _tangential(exact.E(pts), normal)
        w = rule.weights
        num += area * float(np.einsum("q,tqc->", w, np.abs(E_t - uh_t) ** 2))
        den += area * float(np.einsum("q,tqc->", w, np.abs(E_t) ** 2))
    return num, den


def error_norms(
    u_h: FieldCoefficients,
    exact,
    params: ProblemParams,
    policy: QuadraturePolicy | None = None,
) -> ErrorReport:
    """All error norms of E - u_h, absolute and relative."""
    policy = policy or QuadraturePolicy()
    degree = policy.for_fields(u_h.space.p, params.kappa, u_h.space.mesh.h)
    num_l2, den_l2, num_curl, den_curl = _volume_sums(u_h, exact, degree)
    num_tr, den_tr = _trace_sums(u_h, exact, degree)
    if den_l2 == 0.0:
        raise ValueError("exact solution has zero L2 norm; relative errors undefined")

    k2 = params.kappa**2
    klam = params.kappa * params.lam
    num_energy = num_curl + k2 * num_l2
    den_energy = den_curl + k2 * den_l2
    num_total = num_energy + klam * num_tr
    den_total = den_energy + klam * den_tr
    return ErrorReport(
        abs_l2=np.sqrt(num_l2),
        rel_l2=np.sqrt(num_l2 / den_l2),
        abs_curl=np.sqrt(num_curl),
        rel_curl=np.sqrt(num_curl / den_curl) if den_curl > 0 else float("nan"),
        abs_trace=np.sqrt(num_tr),
        rel_trace=np.sqrt(num_tr / den_tr) if den_tr > 0 else float("nan"),
        abs_energy=np.sqrt(num_energy),
        rel_energy=np.sqrt(num_energy / den_energy),
        abs_energy_total=np.sqrt(num_total),
        rel_energy_total=np.sqrt(num_total / den_total),
    )


def field_norms(u_h: FieldCoefficients, policy_degree: int):
    """(||u_h||, ||curl u_h||, ||u_h,T||_Gamma) by element/face quadrature."""
    space = u_h.space
    mesh = space.mesh
    rule = tet_rule(policy_degree)
    l2 = curl = 0.0
    for cls, key_id, tets in space.groups:
        basis = space.basis(key_id)
        B = space.group_map(cls)
        det = np.linalg.det(B)
        vals, curls = push_forward(
            basis.eval_values(rule.points), basis.eval_curls(rule.points), B
        )
        dof_vals = u_h.values[space.dof_map.cell_dofs[tets]]
        uh = np.einsum("ti,qic->tqc", dof_vals, vals)
        uh_curl = np.einsum("ti,qic->tqc", dof_vals, curls)
        l2 += det * float(np.einsum("q,tqc->", rule.weights, np.abs(uh) ** 2))
        curl += det * float(np.einsum("q,tqc->", rule.weights, np.abs(uh_curl) ** 2))

    rule2 = tri_rule(policy_degree)
    key_of_class = {cls: key_id for cls, key_id, _ in space.groups}
    trace = 0.0
    for cls, slot, bidx in _boundary_groups(mesh):
        key_id = key_of_class[cls]
        basis = space.basis(key_id)
        B = space.group_map(cls)
        va, t1_ref, t2_ref, normal, area = _face_frame(space, cls, key_id, slot)
        ref_pts = (
            va[None, :]
            + rule2.points[:, 0:1] * t1_ref[None, :]
            + rule2.points[:, 1:2] * t2_ref[None, :]
        )
        vals, _ = push_forward(basis.eval_values(ref_pts), basis.eval_curls(ref_pts), B)
        tang = _tangential(vals, normal)
        owners = mesh.boundary_owner[bidx]
        dof_vals = u_h.values[space.dof_map.cell_dofs[owners]]
        uh_t = np.einsum("ti,qic->tqc", dof_vals, tang)
        trace += area * float(np.einsum("q,tqc->", rule2.weights, np.abs(uh_t) ** 2))
    return np.sqrt(l2), np.sqrt(curl), np.sqrt(trace)


def data_norms(exact, mesh, space: FeSpace, degree: int):
    """(||f||_Omega, ||g||_Gamma) of the manufactured data by quadrature."""
    rule = tet_rule(degree)
    f_sq = 0.0
    for cls, _key_id, tets in space.groups:
        B = space.group_map(cls)
        det = np.linalg.det(B)
        origins = mesh.vertices[mesh.tets[tets, 0]]
        pts = map_points(B, np.zeros(3), rule.points)[None, :, :] + origins[:, None, :]
        f_sq += det * float(np.einsum("q,tqc->", rule.weights, np.abs(exact.f(pts)) ** 2))

    rule2 = tri_rule(degree)
    key_of_class = {cls: key_id for cls, key_id, _ in space.groups}
    g_sq = 0.0
    for cls, slot, bidx in _boundary_groups(mesh):
        key_id = key_of_class[cls]
        B = space.group_map(cls)
        va, t1_ref, t2_ref, normal, area = _face_frame(space, cls, key_id, slot)
        ref_pts = (
            va[None, :]
            + rule2.points[:, 0:1] * t1_ref[None, :]
            + rule2.points[:, 1:2] * t2_ref[None, :]
        )
        owners = mesh.boundary_owner[bidx]
        origins = mesh.vertices[mesh.tets[owners, 0]]
        pts = map_points(B, np.zeros(3), ref_pts)[None, :, :] + origins[:, None, :]
        g_sq += area * float(np.einsum("q,tqc->", rule2.weights, np.abs(exact.g(pts, normal)) ** 2))
    return np.sqrt(f_sq), np.sqrt(g_sq)


def stability_ratio(
    u_h: FieldCoefficients,
    params: ProblemParams,
    exact,
    policy: QuadraturePolicy | None = None,
) -> float:
    """(||curl u_h|| + kappa ||u_h|| + kappa ||u_h,T||) / (||f|| + ||g||)."""
    policy = policy or QuadraturePolicy()
    degree = policy.for_fields(u_h.space.p, params.kappa, u_h.space.mesh.h)
    l2, curl, trace = field_norms(u_h, degree)
    f_norm, g_norm = data_norms(exact, u_h.space.mesh, u_h.space, degree)
    denom = f_norm + g_norm
    if denom == 0.0:
        raise ValueError("zero data norm; stability ratio undefined")
    return (curl + params.kappa * l2 + params.kappa * trace) / denom
