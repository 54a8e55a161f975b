"""Gauss quadrature on the unit interval, reference triangle and tetrahedron.

Rules are generated from 1-D Gauss-Legendre and Gauss-Jacobi nodes through
the collapsed-coordinate (Duffy) map, so any polynomial exactness degree up
to ``MAX_DEGREE`` is available without tabulated point sets.  The simplex
Jacobians are absorbed into Jacobi weight functions, hence a rule requested
for degree ``d`` integrates every monomial of total degree <= d exactly and
all weights are strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

# Generative construction: no tabulated upper bound, but keep a sane cap so
# a runaway degree request fails loudly instead of allocating n^3 points.
MAX_DEGREE = 100


@dataclass(frozen=True)
class QuadratureRule:
    """Fixed point set on a reference domain.

    Attributes
    ----------
    points : ndarray, shape (n, dim)
        Reference coordinates (dim = 1 interval, 2 triangle, 3 tetrahedron).
    weights : ndarray, shape (n,)
        Strictly positive weights summing to the reference measure.
    exactness_degree : int
        All polynomials of total degree <= this are integrated exactly.
    """

    points: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    @property
    def n_points(self) -> int:
        return self.weights.shape[0]

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Contract function values at the rule points with the weights."""
        return np.tensordot(self.weights, values, axes=(0, 0))


def _check_degree(degree: int) -> int:
    if degree > MAX_DEGREE:
        raise ValueError(
            f"quadrature degree {degree} not supported; maximum is {MAX_DEGREE}"
        )
    return max(int(degree), 1)


def _gauss01(n: int):
    """Gauss-Legendre nodes/weights for integral over [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def _jacobi01(n: int, alpha: int):
    """Nodes/weights for integral of (1-t)^alpha f(t) over [0, 1]."""
    x, w = roots_jacobi(n, alpha, 0.0)
    return (x + 1.0) / 2.0, w / 2.0 ** (alpha + 1)


def interval_rule(degree: int) -> QuadratureRule:
    """Gauss rule on [0, 1] exact for polynomials of degree <= ``degree``."""
    degree = _check_degree(degree)
    n = (degree + 2) // 2
    x, w = _gauss01(n)
    return QuadratureRule(x[:, None].copy(), w.copy(), 2 * n - 1)


def tri_rule(degree: int) -> QuadratureRule:
    """Collapsed tensor rule on the triangle {x, y >= 0, x + y <= 1}."""
    degree = _check_degree(degree)
    n = (degree + 2) // 2
    a, wa = _gauss01(n)
    b, wb = _jacobi01(n, 1)
    # (x, y) = (a (1 - b), b); dx dy = (1 - b) da db
    A, B = np.meshgrid(a, b, indexing="ij")
    pts = np.column_stack([(A * (1.0 - B)).ravel(), B.ravel()])
    wts = np.outer(wa, wb).ravel()
    return QuadratureRule(pts, wts, 2 * n - 1)


def tet_rule(degree: int) -> QuadratureRule:
    """Collapsed tensor rule on the tetrahedron {x,y,z >= 0, x+y+z <= 1}."""
    degree = _check_degree(degree)
    n = (degree + 2) // 2
    a, wa = _gauss01(n)
    b, wb = _jacobi01(n, 1)
    c, wc = _jacobi01(n, 2)
    # (x, y, z) = (a (1-b)(1-c), b (1-c), c); dV = (1-b)(1-c)^2 da db dc
    A, B, C = np.meshgrid(a, b, c, indexing="ij")
    pts = np.column_stack(
        [
            (A * (1.0 - B) * (1.0 - C)).ravel(),
            (B * (1.0 - C)).ravel(),
            C.ravel(),
        ]
    )
    wts = np.einsum("i,j,k->ijk", wa, wb, wc).ravel()
    return QuadratureRule(pts, wts, 2 * n - 1)


@dataclass(frozen=True)
class QuadraturePolicy:
    """Degrees used for assembly and for integrals of the exact fields.

    The assembled matrices have polynomial integrands and default to degree
    2p + 2.  Loads, interpolation moments and error norms involve oscillatory
    Bessel factors, so their default degree grows with kappa * h to keep the
    quadrature error below the discretization error.
    """

    assembly_degree: int | None = None
    field_degree: int | None = None

    def for_assembly(self, p: int) -> int:
        if self.assembly_degree is not None:
            return self.assembly_degree
        return 2 * p + 2

    def for_fields(self, p: int, kappa: float, h: float) -> int:
        if self.field_degree is not None:
            return self.field_degree
        return max(2 * p + 2, math.ceil(2.0 * kappa * h) + 2 * p)
