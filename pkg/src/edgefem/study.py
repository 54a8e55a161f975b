"""Experiment orchestration: single solves, pollution and convergence sweeps.

Each run produces one ``StudyRecord``; sweeps write CSV files (shortest
round-trip float formatting, loss-free on re-parse) together with a gnuplot
script whose axes match the experiment figures.  Solves whose relative
residual exceeds the 1e-9 gate are flagged and excluded from rate fits.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import FieldCoefficients, error_norms, interpolate, stability_ratio
from .assembly import assemble
from .fe_basis import FeSpace, dof_count
from .linsolve import RESIDUAL_GATE, solve
from .manufactured import BesselWaveSolution, ProblemParams
from .mesh import build_cube_mesh
from .quadrature import QuadraturePolicy

DEFAULT_MAX_DOF = 300_000


def nlambda(dof: int, kappa: float) -> float:
    """Degrees of freedom per wavelength, 2 pi DOF^(1/3) / kappa."""
    return 2.0 * np.pi * dof ** (1.0 / 3.0) / kappa


@dataclass
class StudyRecord:
    """One experiment row; the CSV columns are a fixed subset of these."""

    p: int
    M: int
    kappa: float
    lam: float
    dof: int
    nlambda: float
    h: float
    quad_assembly_degree: int
    quad_field_degree: int
    rel_energy_sol: float
    rel_energy_interp: float
    rel_l2_sol: float
    rel_l2_interp: float
    rel_curl_sol: float
    rel_trace_sol: float
    abs_energy_sol: float
    abs_energy_interp: float
    abs_l2_sol: float
    abs_l2_interp: float
    rel_energy_total_sol: float
    stab_ratio: float
    residual: float
    assemble_s: float
    solve_s: float
    flagged: bool

CSV_COLUMNS = (
    "p", "M", "kappa", "lambda", "dof", "nlambda", "h",
    "rel_energy_sol", "rel_energy_interp", "rel_l2_sol", "rel_l2_interp",
    "rel_curl_sol", "rel_trace_sol", "stab_ratio", "residual",
    "assemble_s", "solve_s", "flagged",
)

#: record attribute backing each CSV column
_COLUMN_ATTR = {name: name for name in CSV_COLUMNS} | {"lambda": "lam"}


@dataclass
class StudyConfig:
    """Parameters of one study invocation."""

    kind: str = "single"                  # single | pollution | convergence
    p_list: tuple[int, ...] = (1,)
    kappa_list: tuple[float, ...] = (5.0,)
    M_list: tuple[int, ...] = (2,)
    nlambda_target: float = 10.0
    lam: float = 1.0
    solver: str = "lu"
    solver_tol: float = 1e-10
    quad_assembly_degree: int | None = None
    quad_field_degree: int | None = None
    max_dof: int = DEFAULT_MAX_DOF
    csv_path: str | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.p_list or not self.kappa_list or not self.M_list:
            raise ValueError("parameter lists must be nonempty")
        if any(k <= 0 for k in self.kappa_list):
            raise ValueError("kappa must be positive")
        if any(M < 1 for M in self.M_list):
            raise ValueError("M must be a positive integer")

    def policy(self) -> QuadraturePolicy:
        return QuadraturePolicy(self.quad_assembly_degree, self.quad_field_degree)


def choose_M_for_target_nlambda(
    kappa: float, p: int, target: float, max_dof: int = DEFAULT_MAX_DOF
) -> int:
    """Smallest M whose DOF count reaches ``target`` DOFs per wavelength."""
    if target <= 0:
        raise ValueError("target N_lambda must be positive")
    M = 1
    while nlambda(dof_count(M, p), kappa) < target:
        M += 1
        if dof_count(M, p) > max_dof:
            raise ValueError(
                f"reaching N_lambda={target} at kappa={kappa}, p={p} needs "
                f"more than the configured cap of {max_dof} DOFs"
            )
    return M


def run_case(p: int, M: int, kappa: float, config: StudyConfig) -> StudyRecord:
    """One assemble-solve-measure cycle."""
    params = ProblemParams(kappa=kappa, lam=config.lam)
    exact = BesselWaveSolution(params)
    policy = config.policy()

    mesh = build_cube_mesh(M)
    space = FeSpace(mesh, p)
    if space.n_dofs > config.max_dof:
        raise ValueError(
            f"case (p={p}, M={M}) has {space.n_dofs} DOFs, over the cap {config.max_dof}"
        )

    system = assemble(mesh, space, params, exact, policy)
    t0 = time.perf_counter()
    report = solve(system.A, system.b, method=config.solver, tol=config.solver_tol)
    solve_seconds = time.perf_counter() - t0

    u_h = FieldCoefficients(report.x, space)
    err = error_norms(u_h, exact, params, policy)
    interp = interpolate(exact, mesh, space, policy)
    err_i = error_norms(interp, exact, params, policy)
    ratio = stability_ratio(u_h, params, exact, policy)

    return StudyRecord(
        p=p,
        M=M,
        kappa=kappa,
        lam=config.lam,
        dof=space.n_dofs,
        nlambda=nlambda(space.n_dofs, kappa),
        h=mesh.h,
        quad_assembly_degree=system.assembly_degree,
        quad_field_degree=system.field_degree,
        rel_energy_sol=err.rel_energy,
        rel_energy_interp=err_i.rel_energy,
        rel_l2_sol=err.rel_l2,
        rel_l2_interp=err_i.rel_l2,
        rel_curl_sol=err.rel_curl,
        rel_trace_sol=err.rel_trace,
        abs_energy_sol=err.abs_energy,
        abs_energy_interp=err_i.abs_energy,
        abs_l2_sol=err.abs_l2,
        abs_l2_interp=err_i.abs_l2,
        rel_energy_total_sol=err.rel_energy_total,
        stab_ratio=ratio,
        residual=report.residual,
        assemble_s=system.assemble_seconds,
        solve_s=solve_seconds,
        flagged=report.residual > RESIDUAL_GATE,
    )


def run_single(config: StudyConfig) -> StudyRecord:
    record = run_case(config.p_list[0], config.M_list[0], config.kappa_list[0], config)
    _maybe_write(config, [record])
    return record


def run_pollution_study(config: StudyConfig) -> list[StudyRecord]:
    """Fixed DOFs-per-wavelength sweep over kappa, one row per (p, kappa)."""
    records = []
    for p in config.p_list:
        for kappa in config.kappa_list:
            M = choose_M_for_target_nlambda(kappa, p, config.nlambda_target, config.max_dof)
            records.append(run_case(p, M, kappa, config))
    _maybe_write(config, records)
    return records


def run_convergence_study(config: StudyConfig) -> list[StudyRecord]:
    """Fixed-kappa mesh refinement, one row per (p, kappa, M)."""
    records = []
    for p in config.p_list:
        for kappa in config.kappa_list:
            for M in config.M_list:
                records.append(run_case(p, M, kappa, config))
    _maybe_write(config, records)
    return records


def fit_rate(records: list[StudyRecord], column: str = "rel_energy_sol") -> float:
    """Least-squares slope of log(error) vs log(h), skipping flagged rows."""
    pts = [(r.h, getattr(r, column)) for r in records if not r.flagged]
    if len(pts) < 2:
        raise ValueError("need at least two unflagged records to fit a rate")
    hs = np.log([p[0] for p in pts])
    es = np.log([p[1] for p in pts])
    return float(np.polyfit(hs, es, 1)[0])


def _format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))  # shortest round-trip representation
    return str(value)


def csv_rows(records: list[StudyRecord]) -> list[list[str]]:
    rows = [list(CSV_COLUMNS)]
    for rec in records:
        rows.append([_format_value(getattr(rec, _COLUMN_ATTR[c])) for c in CSV_COLUMNS])
    return rows


def write_csv(records: list[StudyRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        csv.writer(handle).writerows(csv_rows(records))


def read_csv(path: str | Path) -> list[dict]:
    """Re-parse a study CSV; floats round-trip exactly."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        out = []
        for row in reader:
            rec = {}
            for name, cell in zip(header, row):
                if name in ("p", "M", "dof"):
                    rec[name] = int(cell)
                elif name == "flagged":
                    rec[name] = cell == "true"
                else:
                    rec[name] = float(cell)
            out.append(rec)
    return out


def gnuplot_script(csv_path: str, kind: str, p_list: tuple[int, ...]) -> str:
    """Companion gnuplot script: log-log axes as in the experiment figures."""
    lines = [
        "set datafile separator ','",
        "set key top left",
        "set logscale y",
        "set grid",
    ]
    col = CSV_COLUMNS.index
    if kind == "pollution":
        lines += [
            "set xlabel 'wave number kappa'",
            "set ylabel 'relative energy error'",
            "plot " + ", \\\n     ".join(
                f"'{csv_path}' using {col('kappa') + 1}:((column({col('p') + 1})=={p}) ? "
                f"column({col('rel_energy_sol') + 1}) : 1/0) with linespoints title 'p={p} solution', "
                f"'{csv_path}' using {col('kappa') + 1}:((column({col('p') + 1})=={p}) ? "
                f"column({col('rel_energy_interp') + 1}) : 1/0) with linespoints dt 2 title 'p={p} interpolant'"
                for p in p_list
            ),
        ]
    else:
        lines += [
            "set logscale x",
            "set xlabel 'N_lambda'",
            "set ylabel 'relative error'",
            "plot " + ", \\\n     ".join(
                f"'{csv_path}' using {col('nlambda') + 1}:((column({col('p') + 1})=={p}) ? "
                f"column({col('rel_energy_sol') + 1}) : 1/0) with linespoints title 'p={p} energy', "
                f"'{csv_path}' using {col('nlambda') + 1}:((column({col('p') + 1})=={p}) ? "
                f"column({col('rel_l2_sol') + 1}) : 1/0) with linespoints dt 2 title 'p={p} L2'"
                for p in p_list
            ),
        ]
    return "\n".join(lines) + "\n"


def _maybe_write(config: StudyConfig, records: list[StudyRecord]) -> None:
    if not config.csv_path:
        return
    write_csv(records, config.csv_path)
    script = gnuplot_script(str(config.csv_path), config.kind, tuple(config.p_list))
    Path(config.csv_path).with_suffix(".gp").write_text(script)
