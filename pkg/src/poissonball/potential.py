"""Representation formula on the unit ball.

    u(x) = P[f](x) - int_B G(x, y) g(y) dy      solves  Lap u = g,  u = f on S^{n-1}

with P[f] the Poisson integral against the normalised surface measure.
"""

import warnings

import numpy as np

from .core import DomainError, InputError, green_constant
from .kernels import (green_function, green_function_gradient, poisson_kernel,
                      poisson_kernel_gradient)
from .quadrature import aligned_sphere_rule, build_singular_ball_rule, build_sphere_rule

DEFAULT_LEVEL = 8
FD_GRADIENT_STEP = 1e-5
FD_LAPLACIAN_STEP = 1e-3


class QuadratureAccuracyWarning(UserWarning):
    pass


class SmoothMap:
    """A C^2 map u: B^n -> R^m with value, gradient and Laplacian oracles.

    ``value`` must be vectorised: an (N, n) array of points maps to an
    (N, m) array.  ``gradient`` (-> (N, m, n), rows indexed by target
    components) and ``laplacian`` (-> (N, m)) are optional; missing ones
    fall back to central differences and are flagged through
    :attr:`fd_gradient` / :attr:`fd_laplacian` so callers can widen
    tolerances.

    Calling the map, :meth:`grad` or :meth:`lap` on a single point of
    shape (n,) drops the leading axis.
    """

    def __init__(self, n, m, value, gradient=None, laplacian=None, name="",
                 h_grad=FD_GRADIENT_STEP, h_lap=FD_LAPLACIAN_STEP):
        self.n, self.m = int(n), int(m)
        self._value = value
        self._gradient = gradient
        self._laplacian = laplacian
        self.name = name
        self.h_grad = h_grad
        self.h_lap = h_lap

    def __repr__(self):
        return f"SmoothMap({self.name or 'anonymous'}, n={self.n}, m={self.m})"

    @property
    def fd_gradient(self):
        return self._gradient is None

    @property
    def fd_laplacian(self):
        return self._laplacian is None

    def _batch(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise InputError(f"{self!r} expects points in R^{self.n}, got {x.shape}")
        return x.ndim == 1, np.atleast_2d(x)

    def _eval(self, X):
        return np.asarray(self._value(X), dtype=float).reshape(len(X), self.m)

    def __call__(self, x):
        single, X = self._batch(x)
        out = self._eval(X)
        return out[0] if single else out

    def grad(self, x):
        single, X = self._batch(x)
        if self._gradient is not None:
            out = np.asarray(self._gradient(X), dtype=float).reshape(len(X), self.m, self.n)
        else:
            h = self.h_grad
            out = np.empty((len(X), self.m, self.n))
            for i in range(self.n):
                e = np.zeros(self.n)
                e[i] = h
                out[:, :, i] = (self._eval(X + e) - self._eval(X - e)) / (2 * h)
        return out[0] if single else out

    def lap(self, x):
        single, X = self._batch(x)
        if self._laplacian is not None:
            out = np.asarray(self._laplacian(X), dtype=float).reshape(len(X), self.m)
        else:
            h = self.h_lap
            centre = self._eval(X)
            out = np.zeros((len(X), self.m))
            for i in range(self.n):
                e = np.zeros(self.n)
                e[i] = h
                out += self._eval(X + e) - 2 * centre + self._eval(X - e)
            out /= h * h
        return out[0] if single else out


class BoundaryData:
    """Boundary values f: S^{n-1} -> R^m, optionally with a C^{1,alpha} extension.

    ``extension`` is a :class:`SmoothMap` defined on the closed ball whose
    trace is f; when present its gradient is used by the Hoelder-norm
    estimator.  ``holder`` optionally records known (alpha, K) with
    |f|_{1,alpha} <= K.
    """

    def __init__(self, n, m, f, extension=None, holder=None):
        self.n, self.m = int(n), int(m)
        self._f = f
        self.extension = extension
        if holder is not None:
            alpha, K = holder
            if not (0.0 < alpha <= 1.0) or K < 0:
                raise InputError(f"invalid Hoelder metadata {holder!r}")
        self.holder = holder

    @classmethod
    def from_map(cls, u, holder=None):
        """Trace of a map that is continuous up to the sphere."""
        return cls(u.n, u.m, u, extension=u, holder=holder)

    def __call__(self, eta):
        eta = np.atleast_2d(np.asarray(eta, dtype=float))
        return np.asarray(self._f(eta), dtype=float).reshape(len(eta), self.m)


def _as_boundary(f, n):
    if isinstance(f, BoundaryData):
        return f
    if isinstance(f, SmoothMap):
        return BoundaryData.from_map(f)
    # bare callable; infer m from one evaluation
    probe = np.asarray(f(np.eye(n)[:1]), dtype=float)
    m = probe.size
    return BoundaryData(n, m, f)


def _as_source(g, n):
    if isinstance(g, SmoothMap):
        return g
    if isinstance(g, (int, float, np.integer, np.floating)):
        c = float(g)
        return SmoothMap(n, 1, lambda X: np.full((len(X), 1), c), name=f"const {c}")
    raise InputError("source must be a SmoothMap or a constant")


def _squeeze(v, m):
    return float(v[0]) if m == 1 else v


def _margin_for(level):
    return 0.05 * DEFAULT_LEVEL / level


def _point(x, n=None):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or (n is not None and x.size != n):
        raise InputError(f"expected a single point in R^{n}, got shape {x.shape}")
    r = np.linalg.norm(x)
    if r >= 1.0:
        raise DomainError(f"|x| = {r} is not inside the unit ball")
    return x, r


def poisson_integral(f, x, level=DEFAULT_LEVEL, rule=None):
    """P[f](x) = int P(x, eta) f(eta) d sigma(eta) with d sigma normalised.

    Uses a rule aligned with x (see :func:`aligned_sphere_rule`) unless an
    explicit ``rule`` is given.  Emits :class:`QuadratureAccuracyWarning`
    when x is within the resolution margin of the sphere.
    """
    x, r = _point(x)
    n = x.size
    f = _as_boundary(f, n)
    if rule is None:
        rule = aligned_sphere_rule(n, level, x)
    if 1.0 - r < _margin_for(rule.level):
        warnings.warn(f"|x| = {r:.4f} is close to the sphere for level {rule.level}",
                      QuadratureAccuracyWarning, stacklevel=2)
    eta = rule.nodes
    w = rule.normalized_weights * poisson_kernel(x, eta)
    return _squeeze(np.sum(w[:, None] * f(eta), axis=0), f.m)


def poisson_gradient(f, x, level=DEFAULT_LEVEL, rule=None):
    """Jacobian (m x n) of the harmonic extension P[f] at x."""
    x, r = _point(x)
    n = x.size
    f = _as_boundary(f, n)
    if rule is None:
        rule = aligned_sphere_rule(n, level, x)
    eta = rule.nodes
    Px = poisson_kernel_gradient(x, eta) * rule.normalized_weights[:, None]   # (N, n)
    return f(eta).T @ Px


def green_potential(g, x, level=DEFAULT_LEVEL, rule=None):
    """int_B G(x, y) g(y) dy via a polar rule centred at x."""
    x, _ = _point(x)
    n = x.size
    g = _as_source(g, n)
    if rule is None:
        rule = build_singular_ball_rule(n, level, x)
    y = rule.nodes
    w = rule.weights * green_function(x, y)
    return _squeeze(np.sum(w[:, None] * g(y), axis=0), g.m)


def solve_dirichlet(f, g, x, level=DEFAULT_LEVEL):
    """Value at x of the solution of Lap u = g in B^n, u = f on S^{n-1}."""
    x, _ = _point(x)
    n = x.size
    f = _as_boundary(f, n)
    g = _as_source(g, n)
    if g.m != f.m and g.m != 1:
        raise InputError(f"boundary data has {f.m} components, source has {g.m}")
    p = np.atleast_1d(poisson_integral(f, x, level))
    q = np.atleast_1d(green_potential(g, x, level))
    return _squeeze(p - q, f.m)


def dirichlet_solution(f, g, level=DEFAULT_LEVEL):
    """The solution of the Dirichlet problem as a :class:`SmoothMap`.

    Derivatives fall back to finite differences of the quadrature.
    """
    n = f.n if isinstance(f, (BoundaryData, SmoothMap)) else g.n
    f = _as_boundary(f, n)

    def value(X):
        return np.array([np.atleast_1d(solve_dirichlet(f, g, xi, level)) for xi in X])

    return SmoothMap(n, f.m, value, name="dirichlet solution")


def mean_value_residual(u, x, rho, level=DEFAULT_LEVEL):
    """Defect of the Green mean-value identity on the ball B(x, rho).

    Compares the spherical mean int (u(x + rho eta) - u(x)) d sigma(eta)
    with int_{|y-x|<=rho} (c_n|y-x|^{2-n} - c_n rho^{2-n}) Lap u(y) dy
    and returns the norm of the difference.
    """
    x, r = _point(x, u.n)
    n = u.n
    if rho <= 0 or r + rho >= 1.0:
        raise DomainError(f"ball B(x, {rho}) is not contained in B^n")
    sphere = build_sphere_rule(n, level)
    lhs = np.sum(sphere.normalized_weights[:, None] * (u(x + rho * sphere.nodes) - u(x)), axis=0)
    ball = build_singular_ball_rule(n, level, x, radius=rho)
    y = ball.nodes
    cn = green_constant(n)
    dist = np.linalg.norm(y - x, axis=1)
    kern = cn * (dist ** (2 - n) - rho ** (2 - n))
    rhs = np.sum((ball.weights * kern)[:, None] * u.lap(y), axis=0)
    return float(np.linalg.norm(lhs - rhs))


def gradient_representation(u, x, level=DEFAULT_LEVEL):
    """Recover grad u(x) from the trace of u and Lap u.

    grad u(x) h = int P_x(x, eta) h u(eta) d sigma - int_B G_x(x, y) h Lap u(y) dy,
    returned as an (m, n) matrix.
    """
    x, _ = _point(x, u.n)
    n = u.n
    harmonic = poisson_gradient(BoundaryData.from_map(u), x, level)
    rule = build_singular_ball_rule(n, level, x)
    y = rule.nodes
    Gx = green_function_gradient(x, y) * rule.weights[:, None]          # (N, n)
    return harmonic - u.lap(y).T @ Gx
