"""Bessel functions J0, J1 and the regularized quotient J1(z)/z.

Wrappers around scipy.special (Cephes rational approximations, relative
error well below 1e-12 on the range used here, z <= ~500).  The quotient is
continued through z = 0 with its power series, where it equals 1/2.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp


def _as_float_array(z):
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("bessel argument must be finite")
    return arr


def _maybe_scalar(out, z):
    if np.isscalar(z) or np.ndim(z) == 0:
        return float(out)
    return out


def j0(z):
    """Bessel function of the first kind, order 0."""
    return _maybe_scalar(_sp.j0(_as_float_array(z)), z)


def j1(z):
    """Bessel function of the first kind, order 1."""
    return _maybe_scalar(_sp.j1(_as_float_array(z)), z)


def j1_over_z(z):
    """J1(z)/z, continuous at z = 0 with value 1/2."""
    arr = _as_float_array(z)
    out = np.empty_like(arr)
    small = np.abs(arr) < 1e-2
    zs2 = arr[small] ** 2
    # truncation error below 1e-16 relative for |z| < 1e-2
    out[small] = 0.5 - zs2 / 16.0 + zs2 * zs2 / 384.0
    zb = arr[~small]
    out[~small] = _sp.j1(zb) / zb
    return _maybe_scalar(out, z)
