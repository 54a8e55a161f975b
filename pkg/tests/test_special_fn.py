"""Bessel wrappers against power-series, asymptotic and FD oracles."""

import math

import numpy as np
import pytest

from edgefem.special_fn import j0, j1, j1_over_z

FIRST_J0_ZERO = 2.404825557695773


def series_jn(n, z, terms=60):
    """Alternating power series of J_n, evaluated in extended precision."""
    import mpmath

    mpmath.mp.dps = 50
    zm = mpmath.mpf(z)
    acc = mpmath.mpf(0)
    for k in range(terms):
        term = (-1) ** k * (zm / 2) ** (2 * k + n) / (
            mpmath.factorial(k) * mpmath.factorial(k + n)
        )
        acc += term
    return float(acc)


def asymptotic_jn(n, z, terms=6):
    """Large-argument Hankel expansion of J_n; independent of scipy."""
    mu = 4 * n * n
    # P and Q series in powers of 1/(8z)
    ak = 1.0
    P, Q = 0.0, 0.0
    for k in range(2 * terms):
        if k % 2 == 0:
            P += (-1) ** (k // 2) * ak
        else:
            Q += (-1) ** ((k - 1) // 2) * ak
        ak *= (mu - (2 * k + 1) ** 2) / (8.0 * z * (k + 1))
    chi = z - (0.5 * n + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * z)) * (P * math.cos(chi) - Q * math.sin(chi))


def test_values_at_zero():
    assert j0(0.0) == 1.0
    assert j1(0.0) == 0.0
    assert j1_over_z(0.0) == pytest.approx(0.5, abs=1e-15)
    assert j1_over_z(1e-20) == pytest.approx(0.5, abs=1e-15)


def test_first_j0_zero():
    assert abs(j0(FIRST_J0_ZERO)) <= 1e-12


def test_against_series_oracle():
    pytest.importorskip("mpmath")
    zs = np.linspace(0.0, 12.0, 121)
    for z in zs:
        assert j0(z) == pytest.approx(series_jn(0, z), abs=1e-13)
        assert j1(z) == pytest.approx(series_jn(1, z), abs=1e-13)


def test_against_asymptotic_oracle():
    zs = np.linspace(50.0, 500.0, 91)
    for z in zs:
        assert j0(z) == pytest.approx(asymptotic_jn(0, z), abs=1e-10)
        assert j1(z) == pytest.approx(asymptotic_jn(1, z), abs=1e-10)


def test_derivative_identity_fd():
    # d/dz J0 = -J1, central differences
    rng = np.random.default_rng(1)
    z = rng.uniform(1e-3, 100.0, size=50)
    h = 1e-6
    fd = (j0(z + h) - j0(z - h)) / (2 * h)
    assert np.max(np.abs(fd + j1(z))) <= 1e-6


def test_recurrence_residual():
    # J1' = J0 - J1/z with an FD derivative
    rng = np.random.default_rng(2)
    z = rng.uniform(0.1, 80.0, size=60)
    h = 1e-5
    fd = (j1(z + h) - j1(z - h)) / (2 * h)
    residual = np.abs(j0(z) - fd - j1_over_z(z))
    assert np.max(residual) <= 1e-10


def test_quotient_matches_direct_ratio():
    z = np.linspace(0.011, 400.0, 300)
    assert np.max(np.abs(j1_over_z(z) - j1(z) / z)) <= 1e-15


def test_array_and_scalar_shapes():
    out = j0(np.array([[0.0, 1.0], [2.0, 3.0]]))
    assert out.shape == (2, 2)
    assert isinstance(j0(1.0), float)


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        j0(float("nan"))
