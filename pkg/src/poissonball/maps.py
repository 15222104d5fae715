"""Closed-form test maps and Poisson-inequality certificates.

Polynomial maps of degree <= 2 have constant Laplacian, so the
certificate |Lap u| <= a |grad u|^2 + b is exact with b = |Lap u| for any
a >= 0.  Those, linear maps, radial stretches and Moebius automorphisms
of the ball are the instance families the verifiers run on.
"""

from dataclasses import dataclass

import numpy as np

from .core import InputError, operator_norm, operator_norms
from .potential import SmoothMap


@dataclass(frozen=True)
class PoissonCertificate:
    """Constants (a, b) with |Lap u| <= a |grad u|^2 + b.

    ``sup_check`` is the empirical max of |Lap u| - a|grad u|^2 - b over
    the sample points used to build the certificate (<= 0 when it holds).
    |grad u| is the operator norm.
    """

    a: float
    b: float
    sup_check: float = 0.0

    def holds(self, tol=1e-9):
        return self.sup_check <= tol


def quadratic_map(Q, L=None, c=None, name="quadratic"):
    """u_j(x) = x^t Q_j x + L_j x + c_j with Q of shape (m, n, n)."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 3 or Q.shape[1] != Q.shape[2]:
        raise InputError(f"Q must have shape (m, n, n), got {Q.shape}")
    m, n, _ = Q.shape
    S = Q + Q.transpose(0, 2, 1)
    L = np.zeros((m, n)) if L is None else np.asarray(L, dtype=float).reshape(m, n)
    c = np.zeros(m) if c is None else np.asarray(c, dtype=float).reshape(m)
    lap = np.trace(S, axis1=1, axis2=2)

    def value(X):
        return np.einsum("ni,jik,nk->nj", X, Q, X) + X @ L.T + c

    def gradient(X):
        return np.einsum("jik,nk->nji", S, X) + L

    def laplacian(X):
        return np.broadcast_to(lap, (len(X), m))

    u = SmoothMap(n, m, value, gradient, laplacian, name=name)
    u.coefficients = (Q, L, c)
    return u


def linear_map(A, b=None, name="linear"):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    return quadratic_map(np.zeros((m, n, n)), A, b, name=name)


def identity(n):
    return linear_map(np.eye(n), name="identity")


def dilation(n, c):
    return linear_map(c * np.eye(n), name=f"dilation {c:g}")


def coordinate(n, i=0, m=1):
    """x -> x_i e_1 in R^m: the harmonic extension of eta -> eta_i."""
    A = np.zeros((m, n))
    A[0, i] = 1.0
    return linear_map(A, name=f"x{i + 1}")


def squared_norm(n, scale=1.0, shift=0.0, m=1):
    """x -> scale (|x|^2 - shift) e_1; Laplacian 2 n scale e_1."""
    Q = np.zeros((m, n, n))
    Q[0] = scale * np.eye(n)
    c = np.zeros(m)
    c[0] = -scale * shift
    return quadratic_map(Q, None, c, name=f"{scale:g}(|x|^2-{shift:g})")


def sup_bound(u):
    """Upper bound of |u| on the closed unit ball for a quadratic_map."""
    Q, L, c = u.coefficients
    per = [operator_norm(Qj) + np.linalg.norm(Lj) + abs(cj) for Qj, Lj, cj in zip(Q, L, c)]
    return float(np.linalg.norm(per))


def random_quadratic(n, m, rng, harmonic=False, sup=0.9, source=1.0):
    """Random harmonic-plus-quadratic map with |u| <= sup on the closed ball.

    ``harmonic`` removes the trace of every quadratic part; otherwise
    ``source`` scales the isotropic |x|^2 component added to each row.
    """
    Q = rng.standard_normal((m, n, n))
    Q = 0.5 * (Q + Q.transpose(0, 2, 1))
    Q -= np.trace(Q, axis1=1, axis2=2)[:, None, None] / n * np.eye(n)
    if not harmonic:
        Q += source * rng.standard_normal(m)[:, None, None] * np.eye(n)
    L = rng.standard_normal((m, n))
    c = 0.3 * rng.standard_normal(m)
    u = quadratic_map(Q, L, c)
    s = sup / sup_bound(u)
    return quadratic_map(s * Q, s * L, s * c, name="harmonic" if harmonic else "harmonic+quadratic")


def radial_stretch(n, s):
    """u(x) = |x|^{s-1} x; distortion max(s, 1/s)^{n-1}, Hoelder exponent min(s, 1) at 0."""

    def value(X):
        r = np.linalg.norm(X, axis=1, keepdims=True)
        return np.where(r > 0, r, 1.0) ** (s - 1) * X     # u(0) = 0

    def gradient(X):
        r = np.linalg.norm(X, axis=1)
        xh = X / r[:, None]
        return (r ** (s - 1))[:, None, None] * (
            np.eye(n) + (s - 1) * np.einsum("ni,nj->nij", xh, xh))

    def laplacian(X):
        r = np.linalg.norm(X, axis=1, keepdims=True)
        return (s - 1) * (s + n - 1) * r ** (s - 3) * X

    return SmoothMap(n, n, value, gradient, laplacian, name=f"radial stretch {s:g}")


def plane_wave(k, amplitude=1.0):
    """u(x) = amplitude sin(k.x) e_1 in R^1; Laplacian -|k|^2 u."""
    k = np.asarray(k, dtype=float)
    k2 = k @ k

    def value(X):
        return amplitude * np.sin(X @ k)[:, None]

    def gradient(X):
        return amplitude * np.cos(X @ k)[:, None, None] * k

    def laplacian(X):
        return -k2 * value(X)

    return SmoothMap(k.size, 1, value, gradient, laplacian, name="plane wave")


def mobius(a):
    """Moebius automorphism of B^n sending 0 to -a; derivatives by differences."""
    a = np.asarray(a, dtype=float)
    n = a.size
    a2 = a @ a

    def value(X):
        diff = X - a
        num = (1 - a2) * diff - (diff * diff).sum(1, keepdims=True) * a
        den = 1 - 2 * (X @ a) + (X * X).sum(1) * a2
        return num / den[:, None]

    return SmoothMap(n, n, value, name="moebius")


def certify(u, points, a=0.0, b=None):
    """Poisson-inequality certificate for ``u`` sampled at ``points``.

    With ``b`` omitted, the smallest b making the inequality hold on the
    samples is returned.
    """
    G = u.grad(points)
    g2 = operator_norms(G) ** 2
    lap = np.linalg.norm(u.lap(points), axis=1)
    excess = lap - a * g2
    if b is None:
        b = max(float(excess.max()), 0.0)
    return PoissonCertificate(float(a), float(b), float((excess - b).max()))


def constant_laplacian_certificate(u, a=0.0):
    """Exact certificate for a quadratic_map: b = |Lap u|."""
    Q, _, _ = u.coefficients
    lap = 2.0 * np.trace(Q, axis1=1, axis2=2)
    return PoissonCertificate(float(a), float(np.linalg.norm(lap)), 0.0)


def random_sphere_points(n, count, rng):
    X = rng.standard_normal((count, n))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def random_ball_points(n, count, rng, radius=1.0, center=None):
    """Uniform samples of the closed ball B(center, radius)."""
    X = random_sphere_points(n, count, rng) * (radius * rng.random(count) ** (1.0 / n))[:, None]
    return X if center is None else X + np.asarray(center, dtype=float)
