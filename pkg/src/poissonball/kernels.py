"""Poisson kernel and Green function of the unit ball, with x-gradients.

All functions broadcast over leading axes: ``x`` of shape (..., n) and
``eta``/``y`` of shape (..., n) give results of shape (...) for values
and (..., n) for gradients.
"""

import numpy as np

from .core import DomainError, SingularityError, green_constant

DIAGONAL_GUARD = 1e-12


def _sq(v):
    return np.einsum("...i,...i->...", v, v)


def _ipow(base, k):
    out = np.ones_like(base)
    for _ in range(k):
        out = out * base
    return out


def _pow_sq(s2, p):
    """|v|**p from s2 = |v|**2, integer p >= 0; integer powers by multiplication."""
    if p % 2 == 0:
        return _ipow(s2, p // 2)
    return _ipow(s2, p // 2) * np.sqrt(s2)


def renormalize_boundary(eta):
    """Project boundary points exactly onto the unit sphere."""
    eta = np.asarray(eta, dtype=float)
    return eta / np.sqrt(_sq(eta))[..., None]


def _check_interior(x):
    r2 = _sq(x)
    if np.any(r2 >= 1.0):
        raise DomainError("point is not in the open unit ball")
    return r2


def poisson_kernel(x, eta):
    """P(x, eta) = (1 - |x|^2) / |x - eta|^n for |x| < 1, |eta| = 1."""
    x = np.asarray(x, dtype=float)
    eta = renormalize_boundary(eta)
    n = x.shape[-1]
    r2 = _check_interior(x)
    d2 = _sq(x - eta)
    return (1.0 - r2) / _pow_sq(d2, n)


def poisson_kernel_gradient(x, eta):
    """Gradient of P(x, eta) in x.

    -2x / |x-eta|^n - n (1-|x|^2)(x-eta) / |x-eta|^{n+2}
    """
    x = np.asarray(x, dtype=float)
    eta = renormalize_boundary(eta)
    n = x.shape[-1]
    r2 = _check_interior(x)
    diff = x - eta
    d2 = _sq(diff)
    dn = _pow_sq(d2, n)
    return (-2.0 * x / dn[..., None]
            - n * ((1.0 - r2) / (dn * d2))[..., None] * diff)


def _reflected_sq(x, y):
    # 1 + |x|^2 |y|^2 - 2<x,y> = |x|^2 |y - x/|x|^2|^2, positive for interior pairs
    return 1.0 + _sq(x) * _sq(y) - 2.0 * np.einsum("...i,...i->...", x, y)


def green_function(x, y):
    """Green function G(x, y) of the unit ball (positive, zero on the sphere)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[-1]
    d2 = _sq(x - y)
    if np.any(d2 < DIAGONAL_GUARD ** 2):
        raise SingularityError("green_function evaluated on the diagonal x = y")
    cn = green_constant(n)
    return cn * (1.0 / _pow_sq(d2, n - 2) - 1.0 / _pow_sq(_reflected_sq(x, y), n - 2))


def green_function_gradient(x, y):
    """Gradient of G(x, y) in x.

    -c_n (n-2) (x-y)/|x-y|^n + c_n (n-2) (|y|^2 x - y) / (1 + |x|^2|y|^2 - 2<x,y>)^{n/2}

    The sign makes G decrease away from the pole, as it must for a
    positive kernel that blows up at y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[-1]
    diff = x - y
    d2 = _sq(diff)
    if np.any(d2 < DIAGONAL_GUARD ** 2):
        raise SingularityError("green_function_gradient evaluated on the diagonal x = y")
    k = green_constant(n) * (n - 2)
    refl = _reflected_sq(x, y)
    y2 = _sq(y)
    return (-k * diff / _pow_sq(d2, n)[..., None]
            + k * (y2[..., None] * x - y) / _pow_sq(refl, n)[..., None])
