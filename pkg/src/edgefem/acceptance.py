"""Acceptance suite: one callable check per criterion, with pass/fail lines.

Every criterion pins its tolerances here; the pytest module wraps these
functions one-to-one, and ``edgefem acceptance`` runs them from the CLI.
Expensive study runs are cached per process so combined invocations do not
recompute solves.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import study
from ._poly import space_dim
from .analysis import FieldCoefficients, error_norms, eval_field, interpolate
from .assembly import assemble
from .fe_basis import (
    FeSpace,
    build_dof_map,
    build_reference_basis,
    dof_count,
    edge_dof_count,
    face_dof_count,
    interior_dof_count,
    oriented_basis,
    push_forward,
)
from .linsolve import solve
from .manufactured import BesselWaveSolution, PolynomialSolution, ProblemParams
from .mesh import build_cube_mesh
from .quadrature import tri_rule


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.index:2d} {self.name}: {self.detail}"


@lru_cache(maxsize=None)
def _mesh(M: int):
    return build_cube_mesh(M)


@lru_cache(maxsize=None)
def _space(M: int, p: int) -> FeSpace:
    return FeSpace(_mesh(M), p)


@lru_cache(maxsize=None)
def _solved_case(p: int, M: int, kappa: float) -> study.StudyRecord:
    config = study.StudyConfig(kind="single", p_list=(p,), M_list=(M,), kappa_list=(kappa,))
    return study.run_case(p, M, kappa, config)


def criterion_1_dof_formula() -> CriterionResult:
    """Exact DOF-count equality for (M, p) in {1..4} x {1,2,3}."""
    worst = ""
    for M in (1, 2, 3, 4):
        mesh = _mesh(M)
        for p in (1, 2, 3):
            expected = dof_count(M, p)
            entity_total = (
                mesh.n_edges * edge_dof_count(p)
                + mesh.n_faces * face_dof_count(p)
                + mesh.n_tets * interior_dof_count(p)
            )
            built = build_dof_map(mesh, p).total_dofs
            if not (expected == entity_total == built):
                worst += f" (M={M},p={p}): formula={expected} entities={entity_total} map={built};"
    return CriterionResult(
        1, "dof_formula",
        worst == "",
        worst or "total_dofs matches the closed formula for all 12 cases",
    )


def criterion_2_entity_counts() -> CriterionResult:
    m1, m2 = _mesh(1), _mesh(2)
    got = (
        (m1.n_vertices, m1.n_tets, m1.n_edges, m1.n_faces, m1.n_boundary_faces),
        (m2.n_vertices, m2.n_tets, m2.n_edges, m2.n_boundary_faces),
    )
    expected = ((8, 6, 19, 18, 12), (27, 48, 98, 48))
    ok = got == expected
    return CriterionResult(
        2, "entity_counts", ok,
        f"M=1 -> {got[0]}, M=2 -> {got[1]}" + ("" if ok else f"; expected {expected}"),
    )


def criterion_3_basis_duality() -> CriterionResult:
    rng = np.random.default_rng(2024)
    worst_gram = 0.0
    worst_repr = 0.0
    params = ProblemParams(kappa=1.0)
    for p in (1, 2, 3):
        space = _space(1, p)
        for key in space.dof_map.keys:
            basis = oriented_basis(p, key)
            gram = basis.gram()
            worst_gram = max(worst_gram, float(np.max(np.abs(gram - np.eye(basis.n_dofs)))))
        # random full-polynomial fields reproduced through physical interpolation
        for _ in range(5):
            exact = PolynomialSolution.random(params, p, rng)
            interp = interpolate(exact, space.mesh, space)
            tets = rng.integers(0, space.mesh.n_tets, size=4)
            ref = rng.dirichlet(np.ones(4), size=6)[:, :3]
            vals = eval_field(interp, tets, ref)
            for pos, t in enumerate(tets):
                B, c = space.mesh.element_map(int(t))
                pts = ref @ B.T + c
                target = exact.E(pts)
                scale = np.max(np.abs(target))
                worst_repr = max(worst_repr, float(np.max(np.abs(vals[pos] - target)) / scale))
    ok = worst_gram <= 1e-12 and worst_repr <= 1e-10
    return CriterionResult(
        3, "basis_duality_and_reproduction", ok,
        f"gram residual {worst_gram:.2e} (tol 1e-12), "
        f"polynomial reproduction {worst_repr:.2e} (tol 1e-10)",
    )


def criterion_4_tangential_continuity() -> CriterionResult:
    rng = np.random.default_rng(7)
    mesh = _mesh(2)
    rule = tri_rule(6)
    worst = 0.0
    for p in (1, 2, 3):
        space = _space(2, p)
        coeff_batch = rng.standard_normal((20, space.n_dofs)) + 1j * rng.standard_normal(
            (20, space.n_dofs)
        )
        incidence: dict[int, list] = {}
        for t in range(mesh.n_tets):
            for slot in range(4):
                incidence.setdefault(int(mesh.tet_faces[t, slot]), []).append((t, slot))
        for fidx, pairs in incidence.items():
            if len(pairs) != 2:
                continue
            tri = mesh.faces[fidx]
            va = mesh.vertices[tri[0]]
            t1 = mesh.vertices[tri[1]] - va
            t2 = mesh.vertices[tri[2]] - va
            normal = np.cross(t1, t2)
            normal = normal / np.linalg.norm(normal)
            pts = va[None, :] + rule.points[:, 0:1] * t1[None, :] + rule.points[:, 1:2] * t2[None, :]
            sides = []
            for t, _slot in pairs:
                B, c = mesh.element_map(t)
                ref = np.linalg.solve(B, (pts - c).T).T
                basis = space.basis(int(space.dof_map.tet_keys[t]))
                vals, _ = push_forward(basis.eval_values(ref), basis.eval_curls(ref), B)
                uh = np.einsum("vi,qic->vqc", coeff_batch[:, space.dof_map.cell_dofs[t]], vals)
                sides.append(uh - np.einsum("vqc,c->vq", uh, normal)[..., None] * normal)
            worst = max(worst, float(np.max(np.abs(sides[0] - sides[1]))))
    ok = worst <= 1e-10
    return CriterionResult(
        4, "tangential_continuity", ok,
        f"max two-sided tangential mismatch {worst:.2e} (tol 1e-10, M=2, 20 vectors)",
    )


def criterion_5_matrix_identities() -> CriterionResult:
    rng = np.random.default_rng(11)
    kappa, lam = 7.0, 1.0
    params = ProblemParams(kappa=kappa, lam=lam)
    exact = BesselWaveSolution(params)
    mesh = _mesh(2)
    details = []
    ok = True
    for p in (1, 2, 3):
        space = _space(2, p)
        system = assemble(mesh, space, params, exact)
        scale = np.max(np.abs(system.A.data))
        recon = system.S - kappa**2 * system.Mv - 1j * kappa * lam * system.B
        diff = system.A - recon
        rel_id = float(np.max(np.abs(diff.data)) / scale) if diff.nnz else 0.0
        asym = system.A - system.A.T
        rel_sym = float(np.max(np.abs(asym.data)) / scale) if asym.nnz else 0.0

        worst_garding = 0.0
        for _ in range(50):
            u = rng.standard_normal(space.n_dofs) + 1j * rng.standard_normal(space.n_dofs)
            quad_a = np.vdot(u, system.A @ u)
            s_term = float(np.real(np.vdot(u, system.S @ u)))
            m_term = float(np.real(np.vdot(u, system.Mv @ u)))
            b_term = float(np.real(np.vdot(u, system.B @ u)))
            lhs = quad_a.real - quad_a.imag
            rhs = s_term - kappa**2 * m_term + kappa * lam * b_term
            denom = abs(s_term) + kappa**2 * abs(m_term) + kappa * lam * abs(b_term)
            worst_garding = max(worst_garding, abs(lhs - rhs) / denom)
        case_ok = rel_id <= 1e-12 and rel_sym <= 1e-12 and worst_garding <= 1e-10
        ok = ok and case_ok
        details.append(
            f"p={p}: id {rel_id:.1e}, sym {rel_sym:.1e}, garding {worst_garding:.1e}"
        )
    return CriterionResult(5, "matrix_identities", ok, "; ".join(details))


def criterion_6_patch_test() -> CriterionResult:
    rng = np.random.default_rng(5)
    params = ProblemParams(kappa=3.0)
    mesh = _mesh(2)
    details = []
    ok = True
    for p in (1, 2, 3):
        space = _space(2, p)
        exact = PolynomialSolution.random(params, p, rng)
        system = assemble(mesh, space, params, exact)
        report = solve(system.A, system.b)
        err = error_norms(FieldCoefficients(report.x, space), exact, params)
        ok = ok and err.rel_l2 <= 1e-8
        details.append(f"p={p}: rel L2 {err.rel_l2:.1e}")
    return CriterionResult(6, "polynomial_patch_test", ok, "; ".join(details) + " (tol 1e-8)")


def _fd_curl(f, x: np.ndarray, step: float) -> np.ndarray:
    grad = np.empty((len(x), 3, 3), dtype=complex)
    for d in range(3):
        e = np.zeros(3)
        e[d] = step
        grad[:, d, :] = (f(x + e) - f(x - e)) / (2.0 * step)
    out = np.empty((len(x), 3), dtype=complex)
    out[:, 0] = grad[:, 1, 2] - grad[:, 2, 1]
    out[:, 1] = grad[:, 2, 0] - grad[:, 0, 2]
    out[:, 2] = grad[:, 0, 1] - grad[:, 1, 0]
    return out


def criterion_7_manufactured_fd() -> CriterionResult:
    rng = np.random.default_rng(17)
    details = []
    ok = True
    for kappa in (5.0, 50.0):
        sol = BesselWaveSolution(ProblemParams(kappa=kappa))
        pts = rng.uniform(0.05, 0.95, size=(200, 3))
        curl_fd = _fd_curl(sol.E, pts, 1e-5)
        curl = sol.curl_E(pts)
        rel_curl = float(
            np.max(np.linalg.norm(curl_fd - curl, axis=1) / np.linalg.norm(curl, axis=1))
        )
        ccurl_fd = _fd_curl(sol.curl_E, pts, 1e-4)
        f_fd = ccurl_fd - kappa**2 * sol.E(pts)
        f_closed = sol.f(pts)
        rel_f = float(
            np.max(np.linalg.norm(f_fd - f_closed, axis=1) / np.linalg.norm(f_closed, axis=1))
        )
        ok = ok and rel_curl <= 1e-5 and rel_f <= 1e-3
        details.append(f"kappa={kappa:g}: curl {rel_curl:.1e} (tol 1e-5), f {rel_f:.1e} (tol 1e-3)")
    return CriterionResult(7, "manufactured_fd_oracle", ok, "; ".join(details))


_CONVERGENCE_MATRIX = ((1, (2, 3, 4, 6, 8)), (2, (2, 3, 4, 6, 8)), (3, (2, 3, 4)))


@lru_cache(maxsize=None)
def _convergence_records(p: int) -> tuple:
    Ms = dict(_CONVERGENCE_MATRIX)[p]
    return tuple(_solved_case(p, M, 5.0) for M in Ms)


def criterion_8_convergence_rates() -> CriterionResult:
    details = []
    ok = True
    for p, _Ms in _CONVERGENCE_MATRIX:
        records = list(_convergence_records(p))
        energy_slope = study.fit_rate(records, "rel_energy_sol")
        l2_slope = study.fit_rate(records, "rel_l2_sol")
        finest = records[-1]
        ratio = finest.rel_energy_sol / finest.rel_energy_interp
        case_ok = (
            abs(energy_slope - p) <= 0.3
            and abs(l2_slope - (p + 1)) <= 0.3
            and ratio <= 1.5
        )
        ok = ok and case_ok
        details.append(
            f"p={p}: energy slope {energy_slope:.2f} (want {p}+-0.3), "
            f"L2 slope {l2_slope:.2f} (want {p + 1}+-0.3), sol/interp {ratio:.2f} (<=1.5)"
        )
    return CriterionResult(8, "convergence_rates_kappa5", ok, "; ".join(details))


def criterion_9_pollution_growth() -> CriterionResult:
    target = 10.0
    ratios = {}
    interp_ratio = None
    for p in (1, 2):
        errs = {}
        interp_errs = {}
        for kappa in (10.0, 20.0):
            M = study.choose_M_for_target_nlambda(kappa, p, target)
            rec = _solved_case(p, M, kappa)
            errs[kappa] = rec.rel_energy_sol
            interp_errs[kappa] = rec.rel_energy_interp
        ratios[p] = errs[20.0] / errs[10.0]
        if p == 1:
            interp_ratio = interp_errs[20.0] / interp_errs[10.0]
    ok = (
        1.3 <= ratios[1] <= 3.0
        and 0.7 <= interp_ratio <= 1.4
        and ratios[2] < ratios[1]
    )
    return CriterionResult(
        9, "pollution_growth_fixed_nlambda", ok,
        f"p=1 solution ratio {ratios[1]:.2f} (want [1.3,3.0]), "
        f"p=1 interpolant ratio {interp_ratio:.2f} (want [0.7,1.4]), "
        f"p=2 ratio {ratios[2]:.2f} (< p=1)",
    )


def criterion_10_stability_boundedness() -> CriterionResult:
    # kappa-uniformity is asserted on runs matched to N_lambda ~ 12; the
    # literal mesh condition kappa^3 h^2 <= 1 needs >= 2.3e6 DOFs at kappa=10
    # and is outside the configured DOF cap (see the repo notes).
    target = 12.0
    ratios = []
    for kappa in (5.0, 10.0, 20.0):
        M = study.choose_M_for_target_nlambda(kappa, 1, target)
        rec = _solved_case(1, M, kappa)
        ratios.append(rec.stab_ratio)
    spread = max(ratios) / min(ratios)
    ok = spread <= 3.0
    return CriterionResult(
        10, "stability_boundedness", ok,
        "ratios " + ", ".join(f"{r:.3f}" for r in ratios) + f"; spread {spread:.2f} (<=3)",
    )


def criterion_11_determinism() -> CriterionResult:
    p, M, kappa = 1, 2, 5.0
    params = ProblemParams(kappa=kappa)
    exact = BesselWaveSolution(params)
    mesh = build_cube_mesh(M)
    space = FeSpace(mesh, p)
    first = assemble(mesh, space, params, exact)
    second = assemble(mesh, space, params, exact)
    bitwise = (
        np.array_equal(first.A.data, second.A.data)
        and np.array_equal(first.A.indices, second.A.indices)
        and np.array_equal(first.A.indptr, second.A.indptr)
        and np.array_equal(first.b, second.b)
    )

    config = study.StudyConfig(kind="single", p_list=(p,), M_list=(M,), kappa_list=(kappa,))
    rows = []
    for _ in range(2):
        rec = study.run_case(p, M, kappa, config)
        row = study.csv_rows([rec])[1]
        for col in ("assemble_s", "solve_s"):
            row[study.CSV_COLUMNS.index(col)] = ""
        rows.append(row)
    rows_equal = rows[0] == rows[1]
    ok = bitwise and rows_equal
    return CriterionResult(
        11, "determinism", ok,
        f"matrices bitwise identical: {bitwise}; CSV rows identical (ex timings): {rows_equal}",
    )


ALL_CRITERIA = (
    criterion_1_dof_formula,
    criterion_2_entity_counts,
    criterion_3_basis_duality,
    criterion_4_tangential_continuity,
    criterion_5_matrix_identities,
    criterion_6_patch_test,
    criterion_7_manufactured_fd,
    criterion_8_convergence_rates,
    criterion_9_pollution_growth,
    criterion_10_stability_boundedness,
    criterion_11_determinism,
)


def run_acceptance(indices=None, stream=sys.stdout) -> list[CriterionResult]:
    """Run (a subset of) the acceptance criteria, printing one line each."""
    results = []
    for position, runner in enumerate(ALL_CRITERIA, start=1):
        if indices and position not in indices:
            continue
        result = runner()
        results.append(result)
        print(result.line(), file=stream, flush=True)
    return results
