"""Closed-form exact solutions with their loads and impedance boundary data.

``BesselWaveSolution`` is the oscillatory field

    E(x) = ( sin(k y) J0(k r), cos(k z) J0(k r), i k J0(k r) ),  r = |x|,

whose volume load f = curl curl E - k^2 E and boundary data
g = curl E x nu - i k lambda E_T are evaluated from hand-derived closed
forms.  ``PolynomialSolution`` provides exact polynomial fields for patch
tests, with curls computed exactly on the monomial coefficients.

Derivative closed forms (chain rule on J0(k r), with q(z) = J1(z)/z):

    d_i J0(k r)     = psi_i            = -k^2 x_i q(k r)
    d_i d_j J0(k r) = -k^2 [ delta_ij q(k r) + k^2 x_i x_j s(k r) ]

where s(z) = q'(z)/z = (J0(z) - 2 q(z)) / z^2, regularized by its power
series near z = 0 (s(0) = -1/8).  curl curl E is assembled as
grad(div E) - lap(E).  A finite-difference oracle in the test suite is the
acceptance gate for every formula here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _poly
from .special_fn import j0, j1_over_z


@dataclass(frozen=True)
class ProblemParams:
    """Wave number kappa > 0 and impedance constant lambda > 0."""

    kappa: float
    lam: float = 1.0

    def __post_init__(self):
        if not (self.kappa > 0.0 and np.isfinite(self.kappa)):
            raise ValueError("kappa must be positive and finite")
        if not (self.lam > 0.0 and np.isfinite(self.lam)):
            raise ValueError("lambda must be positive and finite")


def _hessian_radial_factor(z: np.ndarray) -> np.ndarray:
    """s(z) = (J0(z) - 2 J1(z)/z) / z^2, series-regularized near 0.

    Series: sum_{m>=0} (-1)^(m+1) (m+1) z^(2m) / (4^(m+1) (m+1)! (m+2)!).
    The direct formula cancels catastrophically for small z; the series is
    kept through z^12, which is below 1e-15 relative at the switch point.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 0.5
    zs = z[small]
    z2 = zs * zs
    acc = np.zeros_like(zs)
    coeff = -1.0 / 8.0
    zpow = np.ones_like(zs)
    for m in range(7):
        acc += coeff * zpow
        zpow = zpow * z2
        coeff *= -1.0 / (4.0 * (m + 1) * (m + 3))
    out[small] = acc
    zb = z[~small]
    out[~small] = (j0(zb) - 2.0 * j1_over_z(zb)) / (zb * zb)
    return out


class BesselWaveSolution:
    """The manufactured Bessel field and everything derived from it.

    All evaluators accept arrays of shape (..., 3) and return complex arrays
    of the same shape; they are finite on the closed cube including r = 0.
    """

    def __init__(self, params: ProblemParams):
        self.params = params

    @staticmethod
    def _flat(x) -> tuple[np.ndarray, tuple]:
        x = np.asarray(x, dtype=float)
        return x.reshape(-1, 3), x.shape

    def _radial(self, x: np.ndarray):
        k = self.params.kappa
        r = np.linalg.norm(x, axis=-1)
        z = k * r
        phi = j0(z)
        q = j1_over_z(z)
        psi = -(k * k) * x * q[..., None]
        return phi, q, psi

    def E(self, x: np.ndarray) -> np.ndarray:
        x, shape = self._flat(x)
        k = self.params.kappa
        phi = j0(k * np.linalg.norm(x, axis=-1))
        out = np.empty(x.shape, dtype=complex)
        out[..., 0] = np.sin(k * x[..., 1]) * phi
        out[..., 1] = np.cos(k * x[..., 2]) * phi
        out[..., 2] = 1j * k * phi
        return out.reshape(shape)

    def curl_E(self, x: np.ndarray) -> np.ndarray:
        x, shape = self._flat(x)
        k = self.params.kappa
        phi, _, psi = self._radial(x)
        sy = np.sin(k * x[..., 1])
        cy = np.cos(k * x[..., 1])
        sz = np.sin(k * x[..., 2])
        cz = np.cos(k * x[..., 2])
        out = np.empty(x.shape, dtype=complex)
        out[..., 0] = 1j * k * psi[..., 1] + k * sz * phi - cz * psi[..., 2]
        out[..., 1] = sy * psi[..., 2] - 1j * k * psi[..., 0]
        out[..., 2] = cz * psi[..., 0] - k * cy * phi - sy * psi[..., 1]
        return out.reshape(shape)

    def curl_curl_E(self, x: np.ndarray) -> np.ndarray:
        x, shape = self._flat(x)
        k = self.params.kappa
        k2 = k * k
        r = np.linalg.norm(x, axis=-1)
        z = k * r
        phi = j0(z)
        q = j1_over_z(z)
        s = _hessian_radial_factor(z)
        psi = -k2 * x * q[..., None]
        # hessian H_ij of J0(k r)
        H = -k2 * (
            q[..., None, None] * np.eye(3)
            + k2 * s[..., None, None] * x[..., :, None] * x[..., None, :]
        )
        lap = -k2 * (3.0 * q + k2 * r * r * s)

        sy = np.sin(k * x[..., 1])
        cy = np.cos(k * x[..., 1])
        sz = np.sin(k * x[..., 2])
        cz = np.cos(k * x[..., 2])

        # grad(div E), with div E = sy psi_x + cz psi_y + i k psi_z
        grad_div = (
            sy[..., None] * H[..., 0, :]
            + cz[..., None] * H[..., 1, :]
            + 1j * k * H[..., 2, :]
        )
        grad_div[..., 1] += k * cy * psi[..., 0]
        grad_div[..., 2] += -k * sz * psi[..., 1]

        lap_E = np.empty(x.shape, dtype=complex)
        lap_E[..., 0] = sy * lap + 2.0 * k * cy * psi[..., 1] - k2 * sy * phi
        lap_E[..., 1] = cz * lap - 2.0 * k * sz * psi[..., 2] - k2 * cz * phi
        lap_E[..., 2] = 1j * k * lap
        return (grad_div - lap_E).reshape(shape)

    def f(self, x: np.ndarray) -> np.ndarray:
        """Volume load curl curl E - kappa^2 E."""
        k = self.params.kappa
        return self.curl_curl_E(x) - k * k * self.E(x)

    def g(self, x: np.ndarray, nu: np.ndarray) -> np.ndarray:
        """Boundary data curl E x nu - i kappa lambda E_T; tangential."""
        return impedance_trace(self, x, nu, self.params)


def impedance_trace(solution, x: np.ndarray, nu: np.ndarray, params: ProblemParams) -> np.ndarray:
    """curl E x nu - i kappa lambda ((nu x E) x nu) for any exact field."""
    x = np.asarray(x, dtype=float)
    nu = np.broadcast_to(np.asarray(nu, dtype=float), x.shape)
    E = solution.E(x)
    curl = solution.curl_E(x)
    tangential = E - np.sum(E * nu, axis=-1, keepdims=True) * nu
    return np.cross(curl, nu) - 1j * params.kappa * params.lam * tangential


class PolynomialSolution:
    """Exact polynomial field, used by patch tests and diagnostics.

    ``coeffs`` is an (n_mono, 3) complex array over the graded monomial
    table of degree ``degree``; curl and curl curl act exactly on the
    coefficients, so f and g are consistent to machine precision.
    """

    def __init__(self, params: ProblemParams, coeffs: np.ndarray, degree: int):
        self.params = params
        self.degree = degree
        self.coeffs = np.asarray(coeffs, dtype=complex)
        if self.coeffs.shape != (_poly.space_dim(degree), 3):
            raise ValueError("coefficient array does not match the degree")
        self._curl = _poly.curl_coeffs(self.coeffs, degree)
        self._curl_curl = _poly.curl_coeffs(self._curl, degree)

    @classmethod
    def random(cls, params: ProblemParams, degree: int, rng: np.random.Generator):
        n = _poly.space_dim(degree)
        coeffs = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
        return cls(params, coeffs, degree)

    @classmethod
    def constant(cls, params: ProblemParams, value) -> "PolynomialSolution":
        coeffs = np.zeros((_poly.space_dim(0), 3), dtype=complex)
        coeffs[0] = value
        return cls(params, coeffs, 0)

    def _eval(self, coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 3)
        vals = _poly.eval_monomials(flat, self.degree) @ coeffs
        return vals.reshape(x.shape)

    def E(self, x):
        return self._eval(self.coeffs, x)

    def curl_E(self, x):
        return self._eval(self._curl, x)

    def curl_curl_E(self, x):
        return self._eval(self._curl_curl, x)

    def f(self, x):
        k = self.params.kappa
        return self.curl_curl_E(x) - k * k * self.E(x)

    def g(self, x, nu):
        return impedance_trace(self, x, nu, self.params)
