"""Acceptance gate: every criterion at its stated tolerance, one line each.

The expensive criteria (8, 9, 10) perform the scaled-down convergence,
pollution and stability experiments with the direct solver; intermediate
solves are cached per process.
"""

import pytest

from edgefem import acceptance


def _run(criterion):
    result = criterion()
    print()
    print(result.line())
    assert result.passed, result.detail


def test_criterion_01_dof_formula():
    _run(acceptance.criterion_1_dof_formula)


def test_criterion_02_entity_counts():
    _run(acceptance.criterion_2_entity_counts)


def test_criterion_03_basis_duality():
    _run(acceptance.criterion_3_basis_duality)


def test_criterion_04_tangential_continuity():
    _run(acceptance.criterion_4_tangential_continuity)


def test_criterion_05_matrix_identities():
    _run(acceptance.criterion_5_matrix_identities)


def test_criterion_06_patch_test():
    _run(acceptance.criterion_6_patch_test)


def test_criterion_07_manufactured_fd():
    _run(acceptance.criterion_7_manufactured_fd)


def test_criterion_08_convergence_rates():
    _run(acceptance.criterion_8_convergence_rates)


def test_criterion_09_pollution_growth():
    _run(acceptance.criterion_9_pollution_growth)


def test_criterion_10_stability_boundedness():
    _run(acceptance.criterion_10_stability_boundedness)


def test_criterion_11_determinism():
    _run(acceptance.criterion_11_determinism)
