"""Command line interface: single solves, studies and the acceptance suite."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import study
from .acceptance import run_acceptance
from .analysis import FieldCoefficients, error_norms, interpolate
from .assembly import assemble, write_matrix_market
from .fe_basis import FeSpace
from .linsolve import solve as linear_solve
from .manufactured import BesselWaveSolution, ProblemParams
from .mesh import build_cube_mesh, write_vtk


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(","))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(","))


def _add_solver_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--solver", choices=("lu", "gmres"), default="lu")
    parser.add_argument("--solver-tol", type=float, default=1e-10)
    parser.add_argument("--quad-degree", type=int, default=None,
                        help="override the field quadrature degree")
    parser.add_argument("--max-dof", type=int, default=study.DEFAULT_MAX_DOF)
    parser.add_argument("--lambda", dest="lam", type=float, default=1.0,
                        help="impedance constant (default 1)")


def _config_from(args, kind: str, **overrides) -> study.StudyConfig:
    base = dict(
        kind=kind,
        lam=args.lam,
        solver=args.solver,
        solver_tol=args.solver_tol,
        quad_field_degree=args.quad_degree,
        max_dof=args.max_dof,
        csv_path=getattr(args, "csv", None) or getattr(args, "out", None),
    )
    base.update(overrides)
    return study.StudyConfig(**base)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="edgefem",
        description="Edge-element solver for the time-harmonic Maxwell "
        "impedance problem on the unit cube, with study harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="one assemble-solve-measure cycle")
    p_solve.add_argument("--p", type=int, required=True, choices=(1, 2, 3))
    p_solve.add_argument("--M", type=int, required=True)
    p_solve.add_argument("--kappa", type=float, required=True)
    p_solve.add_argument("--out", help="write the study record as CSV")
    p_solve.add_argument("--export-vtk", help="write mesh + |E_h| cell data")
    p_solve.add_argument("--dump-matrix", help="write A in Matrix Market format")
    _add_solver_args(p_solve)

    p_study = sub.add_parser("study", help="experiment sweeps")
    study_sub = p_study.add_subparsers(dest="study_kind", required=True)

    p_pol = study_sub.add_parser("pollution", help="fixed N_lambda kappa sweep")
    p_pol.add_argument("--p", type=_int_list, default=(1, 2, 3))
    p_pol.add_argument("--nlambda", type=float, default=10.0)
    p_pol.add_argument("--kappa-min", type=float, default=4.0)
    p_pol.add_argument("--kappa-max", type=float, default=40.0)
    p_pol.add_argument("--kappa-num", type=int, default=8)
    p_pol.add_argument("--csv", required=True)
    _add_solver_args(p_pol)

    p_conv = study_sub.add_parser("convergence", help="fixed kappa mesh refinement")
    p_conv.add_argument("--p", type=_int_list, default=(1, 2, 3))
    p_conv.add_argument("--kappa", type=_float_list, default=(5.0, 50.0))
    p_conv.add_argument("--M", type=_int_list, default=(2, 3, 4, 6, 8))
    p_conv.add_argument("--csv", required=True)
    _add_solver_args(p_conv)

    p_acc = sub.add_parser("acceptance", help="run the acceptance suite")
    p_acc.add_argument("--criteria", type=_int_list, default=None,
                       help="subset of criterion numbers, e.g. 1,2,5")

    args = parser.parse_args(argv)

    if args.command == "solve":
        config = _config_from(
            args, "single",
            p_list=(args.p,), M_list=(args.M,), kappa_list=(args.kappa,),
        )
        record = study.run_single(config)
        for name in study.CSV_COLUMNS:
            attr = study._COLUMN_ATTR[name]
            print(f"{name} = {getattr(record, attr)}")
        if args.export_vtk or args.dump_matrix:
            params = ProblemParams(kappa=args.kappa, lam=args.lam)
            exact = BesselWaveSolution(params)
            mesh = build_cube_mesh(args.M)
            space = FeSpace(mesh, args.p)
            system = assemble(mesh, space, params, exact, config.policy())
            if args.dump_matrix:
                write_matrix_market(system.A, args.dump_matrix,
                                    comment=f"p={args.p} M={args.M} kappa={args.kappa}")
                print(f"wrote {args.dump_matrix}")
            if args.export_vtk:
                report = linear_solve(system.A, system.b, method=args.solver)
                u_h = FieldCoefficients(report.x, space)
                magnitude = _cell_magnitude(u_h)
                write_vtk(mesh, args.export_vtk, {"E_magnitude": magnitude})
                print(f"wrote {args.export_vtk}")
        return 0

    if args.command == "study":
        if args.study_kind == "pollution":
            kappas = tuple(
                float(k) for k in np.geomspace(args.kappa_min, args.kappa_max, args.kappa_num)
            )
            config = _config_from(
                args, "pollution",
                p_list=tuple(args.p), kappa_list=kappas,
                nlambda_target=args.nlambda,
            )
            records = study.run_pollution_study(config)
        else:
            config = _config_from(
                args, "convergence",
                p_list=tuple(args.p), kappa_list=tuple(args.kappa),
                M_list=tuple(args.M),
            )
            records = study.run_convergence_study(config)
        flagged = sum(r.flagged for r in records)
        print(f"{len(records)} runs -> {args.csv} ({flagged} flagged)")
        return 1 if flagged else 0

    if args.command == "acceptance":
        results = run_acceptance(args.criteria)
        return 0 if all(r.passed for r in results) else 1

    return 2


def _cell_magnitude(u_h: FieldCoefficients) -> np.ndarray:
    """Mean |E_h| per tetrahedron, for VTK inspection output."""
    from .analysis import eval_field

    space = u_h.space
    center = np.array([[0.25, 0.25, 0.25]])
    tets = np.arange(space.mesh.n_tets)
    vals = eval_field(u_h, tets, center)
    return np.linalg.norm(np.abs(vals[:, 0, :]), axis=1)


if __name__ == "__main__":
    sys.exit(main())
