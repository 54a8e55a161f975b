"""Dense monomial-coefficient calculus for low-order polynomial spaces.

Scalar polynomials of total degree <= p in 2 or 3 variables are stored as
coefficient vectors over a fixed monomial exponent table; vector fields as
(n_mono, dim) arrays.  Orders up to p = 3 keep every array tiny, so all
operations are plain dense numpy.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

# 1-D shifted Legendre polynomials on [0, 1], rows = monomial coefficients
# (constant first).  Degree 3 is the highest edge moment order needed.
SHIFTED_LEGENDRE = (
    (1.0,),
    (-1.0, 2.0),
    (1.0, -6.0, 6.0),
    (-1.0, 12.0, -30.0, 20.0),
)


@lru_cache(maxsize=None)
def exponents(p: int, dim: int = 3) -> np.ndarray:
    """Exponent table of all monomials with total degree <= p, graded order."""
    exps = []
    for total in range(p + 1):
        if dim == 3:
            for a in range(total, -1, -1):
                for b in range(total - a, -1, -1):
                    exps.append((a, b, total - a - b))
        elif dim == 2:
            for a in range(total, -1, -1):
                exps.append((a, total - a))
        else:
            exps.append((total,))
    arr = np.array(exps, dtype=np.int64)
    arr.setflags(write=False)
    return arr


def space_dim(p: int, dim: int = 3) -> int:
    return len(exponents(p, dim))


def eval_monomials(points: np.ndarray, p: int, dim: int = 3) -> np.ndarray:
    """Monomial values at ``points`` (n, dim); returns (n, n_mono)."""
    pts = np.asarray(points, dtype=float)
    exps = exponents(p, dim)
    # 0**0 == 1.0 under numpy float rules, which is the convention needed here
    return np.prod(pts[:, None, :] ** exps[None, :, :], axis=2)


@lru_cache(maxsize=None)
def derivative_matrices(p: int, dim: int = 3) -> tuple[np.ndarray, ...]:
    """Matrices D_k with (D_k @ coeffs) = coefficients of d/dx_k."""
    exps = exponents(p, dim)
    index = {tuple(e): i for i, e in enumerate(exps)}
    mats = []
    for k in range(dim):
        D = np.zeros((len(exps), len(exps)))
        for i, e in enumerate(exps):
            if e[k] == 0:
                continue
            target = list(e)
            target[k] -= 1
            D[index[tuple(target)], i] = e[k]
        D.setflags(write=False)
        mats.append(D)
    return tuple(mats)


def curl_coeffs(coeffs: np.ndarray, p: int) -> np.ndarray:
    """Curl of a 3-D vector polynomial given as an (n_mono, 3) array."""
    Dx, Dy, Dz = derivative_matrices(p, 3)
    out = np.empty_like(coeffs)
    out[:, 0] = Dy @ coeffs[:, 2] - Dz @ coeffs[:, 1]
    out[:, 1] = Dz @ coeffs[:, 0] - Dx @ coeffs[:, 2]
    out[:, 2] = Dx @ coeffs[:, 1] - Dy @ coeffs[:, 0]
    return out


def eval_vector_poly(coeffs: np.ndarray, points: np.ndarray, p: int) -> np.ndarray:
    """Evaluate an (n_mono, 3) vector polynomial at (n, 3) points."""
    return eval_monomials(points, p, 3) @ coeffs


@lru_cache(maxsize=None)
def legendre_product_basis(p: int) -> np.ndarray:
    """Well-conditioned spanning set of P_p in 3 variables.

    Column m holds the monomial coefficients of L_a(x) L_b(y) L_c(z) where
    (a, b, c) runs over the graded exponent table; degrees stay <= p, so the
    set spans exactly P_p.
    """
    exps = exponents(p, 3)
    n = len(exps)
    index = {tuple(e): i for i, e in enumerate(exps)}
    T = np.zeros((n, n))
    for m, (a, b, c) in enumerate(exps):
        for ia, ca in enumerate(SHIFTED_LEGENDRE[a]):
            for ib, cb in enumerate(SHIFTED_LEGENDRE[b]):
                for ic, cc in enumerate(SHIFTED_LEGENDRE[c]):
                    T[index[(ia, ib, ic)], m] += ca * cb * cc
    T.setflags(write=False)
    return T


def shifted_legendre_values(k_max: int, s: np.ndarray) -> np.ndarray:
    """Values P~_k(s) for k = 0..k_max at points s in [0, 1]; (k_max+1, n)."""
    s = np.asarray(s, dtype=float)
    out = np.empty((k_max + 1, s.shape[0]))
    for k in range(k_max + 1):
        acc = np.zeros_like(s)
        for j, c in enumerate(SHIFTED_LEGENDRE[k]):
            acc += c * s**j
        out[k] = acc
    return out
