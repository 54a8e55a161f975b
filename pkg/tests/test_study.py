"""Study harness: N_lambda targeting, records, CSV round-trip, rate fits."""

import dataclasses

import numpy as np
import pytest

from edgefem.fe_basis import dof_count
from edgefem.study import (
    CSV_COLUMNS,
    StudyConfig,
    StudyRecord,
    choose_M_for_target_nlambda,
    csv_rows,
    fit_rate,
    gnuplot_script,
    nlambda,
    read_csv,
    run_case,
    run_single,
    write_csv,
)


def test_choose_m_example():
    # kappa=10, p=1: M=6 gives N_lambda ~ 9.72 < 10, M=7 gives ~ 11.2
    assert nlambda(dof_count(6, 1), 10.0) == pytest.approx(9.724, abs=2e-3)
    assert nlambda(dof_count(7, 1), 10.0) == pytest.approx(11.24, abs=2e-2)
    assert choose_M_for_target_nlambda(10.0, 1, 10.0) == 7


def test_choose_m_smallest_for_tiny_target():
    assert choose_M_for_target_nlambda(5.0, 1, 1e-9) == 1


def test_choose_m_monotone_in_kappa():
    prev = 0
    for kappa in (2.0, 5.0, 10.0, 20.0, 40.0):
        M = choose_M_for_target_nlambda(kappa, 1, 8.0)
        assert M >= prev
        prev = M


def test_choose_m_respects_cap():
    with pytest.raises(ValueError, match="cap"):
        choose_M_for_target_nlambda(100.0, 3, 20.0, max_dof=10_000)


def test_config_validation():
    with pytest.raises(ValueError):
        StudyConfig(p_list=())
    with pytest.raises(ValueError):
        StudyConfig(kappa_list=(-1.0,))
    with pytest.raises(ValueError):
        StudyConfig(M_list=(0,))


@pytest.fixture(scope="module")
def single_record():
    config = StudyConfig(kind="single", p_list=(1,), M_list=(2,), kappa_list=(5.0,))
    return run_case(1, 2, 5.0, config)


def test_record_invariants(single_record):
    rec = single_record
    assert rec.dof == dof_count(2, 1) == 196
    assert rec.nlambda == pytest.approx(2 * np.pi * rec.dof ** (1 / 3) / rec.kappa, rel=1e-12)
    assert rec.residual <= 1e-9
    assert not rec.flagged
    assert np.isfinite(rec.stab_ratio) and rec.stab_ratio > 0
    assert rec.h == pytest.approx(np.sqrt(3.0) / 2.0, rel=1e-15)


def test_run_single_writes_csv(tmp_path, single_record):
    path = tmp_path / "single.csv"
    config = StudyConfig(
        kind="single", p_list=(1,), M_list=(2,), kappa_list=(5.0,), csv_path=str(path)
    )
    rec = run_single(config)
    assert path.exists()
    assert path.with_suffix(".gp").exists()
    parsed = read_csv(path)
    assert len(parsed) == 1
    # loss-free float round-trip
    assert parsed[0]["rel_energy_sol"] == rec.rel_energy_sol
    assert parsed[0]["stab_ratio"] == rec.stab_ratio
    assert parsed[0]["nlambda"] == rec.nlambda


def test_rows_deterministic_excluding_timings(single_record):
    config = StudyConfig(kind="single", p_list=(1,), M_list=(2,), kappa_list=(5.0,))
    other = run_case(1, 2, 5.0, config)
    row_a = csv_rows([single_record])[1]
    row_b = csv_rows([other])[1]
    for col in ("assemble_s", "solve_s"):
        idx = CSV_COLUMNS.index(col)
        row_a[idx] = row_b[idx] = ""
    assert row_a == row_b


def _fake_record(M, err, flagged=False):
    h = np.sqrt(3.0) / M
    return StudyRecord(
        p=1, M=M, kappa=5.0, lam=1.0, dof=dof_count(M, 1),
        nlambda=nlambda(dof_count(M, 1), 5.0), h=h,
        quad_assembly_degree=4, quad_field_degree=8,
        rel_energy_sol=err, rel_energy_interp=err, rel_l2_sol=err * h,
        rel_l2_interp=err * h, rel_curl_sol=err, rel_trace_sol=err,
        abs_energy_sol=err, abs_energy_interp=err, abs_l2_sol=err,
        abs_l2_interp=err, rel_energy_total_sol=err,
        stab_ratio=0.5, residual=1e-12, assemble_s=0.0, solve_s=0.0,
        flagged=flagged,
    )


def test_fit_rate_on_synthetic_data():
    records = [_fake_record(M, 0.7 * (np.sqrt(3.0) / M) ** 2) for M in (2, 4, 8, 16)]
    assert fit_rate(records, "rel_energy_sol") == pytest.approx(2.0, abs=1e-12)


def test_fit_rate_skips_flagged():
    records = [_fake_record(M, 0.7 * (np.sqrt(3.0) / M) ** 2) for M in (2, 4, 8)]
    records.append(_fake_record(16, 123.0, flagged=True))
    assert fit_rate(records, "rel_energy_sol") == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ValueError):
        fit_rate([records[0]], "rel_energy_sol")


def test_csv_format_and_header(tmp_path, single_record):
    path = tmp_path / "records.csv"
    write_csv([single_record], path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[0].startswith("p,M,kappa,lambda,dof,nlambda,h,rel_energy_sol")
    assert lines[1].endswith(",false")


def test_gnuplot_scripts_mention_columns():
    text = gnuplot_script("out.csv", "pollution", (1, 2))
    assert "logscale" in text and "kappa" in text
    text2 = gnuplot_script("out.csv", "convergence", (1,))
    assert "N_lambda" in text2
