"""Numerical checks of gradient estimates for |Lap u| <= a |grad u|^2 + b.

Each ``verify_*`` function evaluates both sides of one inequality on a
concrete instance and returns :class:`EstimateReport` objects.  Sup-type
quantities (max over a sphere, K_max, M) are sampled, so they are lower
bounds of the true suprema; where a sampled max enters a right-hand side
it is inflated by :data:`SUP_INFLATION`.

Norm conventions: the certificate and M use the operator norm of grad u;
energy integrals use the Frobenius norm, which dominates it, so every
check is at least as strict as with the operator norm.
"""

import json
import math
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import golden

from .core import (DomainError, admissibility_threshold, green_constant,
                   operator_norm, operator_norms, schwarz_constant, surface_measure)
from .maps import random_ball_points, random_sphere_points
from .potential import BoundaryData, SmoothMap, poisson_integral
from .quadrature import build_singular_ball_rule, build_sphere_rule

DEFAULT_TOL = 1e-6
SUP_INFLATION = 1.05
RANDOM_SPHERE_FACTOR = 10


class ParameterError(ValueError):
    pass


@dataclass
class EstimateReport:
    """One verified inequality instance lhs <= rhs."""

    name: str
    n: int
    lhs: float
    rhs: float
    params: dict = field(default_factory=dict)
    tolerance: float = DEFAULT_TOL

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        # nan marks an infeasible instance; an infinite rhs is a vacuous bound
        return bool(self.margin >= -self.tolerance)

    def row(self):
        return {
            "name": self.name,
            "n": self.n,
            "params": json.dumps(self.params, sort_keys=True, default=_json_default),
            "lhs": repr(float(self.lhs)),
            "rhs": repr(float(self.rhs)),
            "margin": repr(float(self.margin)),
            "pass": int(self.passed),
        }


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(type(obj))


Substitution = namedtuple("Substitution", "alpha beta gamma")


def theorem_substitutions(kind, a, b):
    """Constants (alpha, beta, gamma) of an auxiliary function phi = G(u).

    ``squared_modulus``: G(u) = |u|^2 for maps into the closed unit ball,
    giving (2, 2(1-a), 2b); needs a < 1.
    ``exponential``: G(t) = exp(2at) for scalar maps into [-1, 1], giving
    (2a e^{2a}, 2a^2 e^{-2a}, 2ab e^{2a}); needs a > 0.
    """
    if kind == "squared_modulus":
        if a >= 1:
            raise ParameterError(f"squared_modulus substitution needs a < 1, got {a}")
        return Substitution(2.0, 2.0 * (1.0 - a), 2.0 * b)
    if kind == "exponential":
        if a <= 0:
            raise ParameterError(f"exponential substitution needs a > 0, got {a}")
        e = math.exp(2 * a)
        return Substitution(2 * a * e, 2 * a * a / e, 2 * a * b * e)
    raise ParameterError(f"unknown substitution {kind!r}")


def auxiliary_laplacian(u, x, kind, a=None):
    """Lap phi for phi = G(u(x)) by the chain rule, with G from ``kind``."""
    val, G, lap = u(x), u.grad(x), u.lap(x)
    if kind == "squared_modulus":
        return 2.0 * np.sum(G * G, axis=(-2, -1)) + 2.0 * np.sum(val * lap, axis=-1)
    if kind == "exponential":
        chi, g2, d = val[..., 0], np.sum(G * G, axis=(-2, -1)), lap[..., 0]
        e = np.exp(2 * a * chi)
        return 4 * a * a * e * g2 + 2 * a * e * d
    raise ParameterError(f"unknown substitution {kind!r}")


def auxiliary_map(u, kind, a=None):
    """phi = G(u) as a SmoothMap with finite-difference derivatives."""
    if kind == "squared_modulus":
        f = lambda X: np.sum(u(X) ** 2, axis=1, keepdims=True)
    else:
        f = lambda X: np.exp(2 * a * u(X)[:, :1])
    return SmoothMap(u.n, 1, f, name=f"{kind}({u.name})")


def check_chain_rule(u, x, kind="squared_modulus", a=None, tol=1e-4):
    """Finite-difference Lap phi against the chain-rule expression."""
    x = np.asarray(x, dtype=float)
    fd = auxiliary_map(u, kind, a).lap(x)[0]
    exact = auxiliary_laplacian(u, x, kind, a)
    return EstimateReport("chain_rule", u.n, abs(fd - exact), tol,
                          {"kind": kind, "x": x, "fd": fd, "exact": exact}, tolerance=0.0)


def check_substitution_inequality(u, kind, a, b, points):
    """Lap phi >= beta |grad u|^2 - gamma at every sample point."""
    sub = theorem_substitutions(kind, a, b)
    lap_phi = auxiliary_laplacian(u, points, kind, a)
    G = u.grad(points)
    g2 = np.sum(G * G, axis=(-2, -1))
    deficit = sub.beta * g2 - sub.gamma - lap_phi
    return EstimateReport("substitution_inequality", u.n, float(deficit.max()), 0.0,
                          {"kind": kind, "a": a, "b": b, "samples": len(points)})


# -- energy and gradient lemmas -------------------------------------------------

def _sphere_sup(u, x, rho, level, rng):
    # max |u(x + rho eta) - u(x)| over rule nodes plus random directions
    nodes = build_sphere_rule(u.n, level).nodes
    extra = random_sphere_points(u.n, RANDOM_SPHERE_FACTOR * len(nodes), rng)
    eta = np.concatenate([nodes, extra])
    return float(np.max(np.linalg.norm(u(x + rho * eta) - u(x), axis=1)))


def verify_energy_bound(u, x, rho, rho1, sub, level=8, seed=0):
    """Dirichlet energy of u on B(x, rho1) against the mean-value bound.

    lhs = int_{|y-x|<=rho1} c_n |grad u|^2 dy,
    rhs = rho1^{n-2} rho^{n-2} / (rho^{n-2} - rho1^{n-2})
          * (gamma rho^2 / (2 n beta) + alpha/beta * max_{|y-x|=rho} |u(y) - u(x)|).
    ``sub`` carries alpha, beta, gamma (a :class:`Substitution` or
    :class:`MainLemmaParams`).
    """
    x = np.asarray(x, dtype=float)
    n = u.n
    if not 0 < rho1 < rho:
        raise ParameterError(f"need 0 < rho1 < rho, got rho1={rho1}, rho={rho}")
    if np.linalg.norm(x) + rho >= 1.0:
        raise DomainError("B(x, rho) must lie inside the unit ball")
    rule = build_singular_ball_rule(n, level, x, radius=rho1)
    G = u.grad(rule.nodes)
    lhs = green_constant(n) * float(np.sum(rule.weights * np.sum(G * G, axis=(1, 2))))
    osc = SUP_INFLATION * _sphere_sup(u, x, rho, level, np.random.default_rng(seed))
    p, p1 = rho ** (n - 2), rho1 ** (n - 2)
    rhs = p1 * p / (p - p1) * (sub.gamma * rho ** 2 / (2 * n * sub.beta)
                               + sub.alpha / sub.beta * osc)
    return EstimateReport("energy_bound", n, lhs, rhs,
                          {"map": u.name, "x": x, "rho": rho, "rho1": rho1,
                           "alpha": sub.alpha, "beta": sub.beta, "gamma": sub.gamma})


def verify_gradient_bound(Y, x0, rho, Z=None, level=8):
    """Interior gradient bounds for a map Y into the closed unit ball.

    Returns two reports for |grad Y(x0)|: one against
    (n/rho) mean_{|y-x0|=rho} |Y - Z| + S, one against gamma_n/rho + S, where
    S = (1/omega) int_{|y-x0|<=rho} (|y-x0|^{1-n} - |y-x0|/rho^n) |Lap Y| dy.
    """
    x0 = np.asarray(x0, dtype=float)
    n = Y.n
    Z = np.zeros(Y.m) if Z is None else np.asarray(Z, dtype=float).reshape(Y.m)
    if rho <= 0 or np.linalg.norm(x0) + rho >= 1.0:
        raise DomainError("B(x0, rho) must lie inside the unit ball")
    sphere = build_sphere_rule(n, level)
    on_sphere = Y(x0 + rho * sphere.nodes)
    ball = build_singular_ball_rule(n, level, x0, radius=rho)
    inside = Y(ball.nodes)
    sup = max(np.linalg.norm(on_sphere, axis=1).max(), np.linalg.norm(inside, axis=1).max())
    if sup > 1.0 + 1e-12:
        raise DomainError(f"map leaves the closed unit ball (|Y| = {sup:.6g})")

    mean = float(np.sum(sphere.normalized_weights * np.linalg.norm(on_sphere - Z, axis=1)))
    dist = np.linalg.norm(ball.nodes - x0, axis=1)
    kern = dist ** (1 - n) - dist / rho ** n
    source = float(np.sum(ball.weights * kern * np.linalg.norm(Y.lap(ball.nodes), axis=1)))
    source /= surface_measure(n)
    lhs = operator_norm(Y.grad(x0))
    tol = DEFAULT_TOL + (1e-5 if Y.fd_gradient else 0.0)
    params = {"map": Y.name, "x0": x0, "rho": rho, "Z": Z, "source_term": source}
    full = EstimateReport("gradient_bound", n, lhs, n / rho * mean + source,
                          dict(params, mean_oscillation=mean), tol)
    schwarz = EstimateReport("gradient_bound_schwarz", n, lhs,
                             schwarz_constant(n) / rho + source, params, tol)
    return full, schwarz


# -- main lemma -------------------------------------------------------------------

@dataclass
class MainLemmaParams:
    """Inputs of the quadratic inequality A M^2 - M + B >= 0 for M.

    ``d`` bounds the distance of the maximiser to the boundary of the
    working ball (d <= r0), ``K_max`` bounds max_{|x-x0|<=r0} |u(x)-u(x0)|.
    ``epsilon`` None means the Schwarz constant alone is used in B.
    """

    alpha: float
    beta: float
    gamma: float
    theta: float
    lam: float
    d: float
    r0: float
    K_max: float
    epsilon: float | None = None

    def __post_init__(self):
        if not 0 < self.lam < self.theta < 1:
            raise ParameterError(f"need 0 < lambda < theta < 1, got "
                                 f"lambda={self.lam}, theta={self.theta}")
        if not 0 < self.d <= self.r0:
            raise ParameterError(f"need 0 < d <= r0, got d={self.d}, r0={self.r0}")


def lemma_coefficients(p, cert, n):
    """(A, B) with A M^2 - M + B >= 0."""
    a, b = cert.a, cert.b
    th, lam, d = p.theta, p.lam, p.d
    gn = schwarz_constant(n)
    first = gn if p.epsilon is None else min(n * p.epsilon, gn)
    A = a * (lam - lam ** (n + 1) / ((n + 1) * th ** n)) / (1 - lam) ** 2
    energy = p.gamma * th * th * d * d / (2 * p.beta * n) + 2 * p.K_max * p.alpha / p.beta
    ratio = math.expm1(n * math.log(th / lam))          # (theta/lambda)^n - 1
    B = (first / th + b * n / (n + 1) * d * d * th
         + (n - 2) * a * lam / th ** 2 * ratio / (1 - th ** (n - 2)) * energy)
    return A, B


def main_lemma_bound(p, cert, n):
    """Smaller root 2B / (1 + sqrt(1 - 4AB)) of A M^2 - M + B, or None if 4AB >= 1."""
    A, B = lemma_coefficients(p, cert, n)
    disc = 1.0 - 4.0 * A * B
    if disc <= 0.0:
        return None
    return float(2.0 * B / (1.0 + math.sqrt(disc)))


def search_theta(cert, n, sub, d, r0, K_max, epsilon=None, theta_max=0.999, grid_size=400):
    """Pick theta (with lambda = sin theta) minimising the bound on M.

    The root bound is only valid for theta inside an interval (0, theta_0]
    on which 4AB < 1, so the search is restricted to the longest feasible
    prefix of a log-spaced grid and refined by golden-section search.
    Returns (params, bound) or None when even the smallest theta fails.
    """
    thetas = np.geomspace(1e-7, theta_max, grid_size)

    def make(th):
        return MainLemmaParams(sub.alpha, sub.beta, sub.gamma, th, math.sin(th),
                               d, r0, K_max, epsilon)

    bounds = []
    for th in thetas:
        val = main_lemma_bound(make(th), cert, n)
        if val is None:
            break
        bounds.append(val)
    if not bounds:
        return None
    j = int(np.argmin(bounds))
    best_th, best = float(thetas[j]), bounds[j]
    if 0 < j < len(bounds) - 1:
        f = lambda th: main_lemma_bound(make(th), cert, n) or math.inf
        th = float(golden(f, brack=(thetas[j - 1], thetas[j], thetas[j + 1]), tol=1e-10))
        val = main_lemma_bound(make(th), cert, n)
        if val is not None and val < best:
            best_th, best = th, val
    return make(best_th), best


def modulus_of_continuity(u, eps, samples=600, seed=0, safety=1.5, center=None, radius=1.0):
    """Empirical delta_u(eps): pairs closer than it move by at most eps.

    The smallest sampled distance between points whose images differ by
    more than eps, divided by ``safety``.
    """
    rng = np.random.default_rng(seed)
    X = random_ball_points(u.n, samples, rng, radius, center)
    V = u(X)
    dx = np.linalg.norm(X[:, None] - X[None], axis=2)
    dv = np.linalg.norm(V[:, None] - V[None], axis=2)
    bad = dx[dv > eps]
    return (float(bad.min()) if bad.size else 2.0 * radius) / safety


def _working_ball_samples(n, x0, r0, level, rng, count):
    sphere = build_sphere_rule(n, level).nodes
    radii = r0 * np.linspace(0.0, 1.0, 2 * level, endpoint=False)
    grid = x0 + (radii[:, None, None] * sphere[None]).reshape(-1, n)
    return np.concatenate([grid, random_ball_points(n, count, rng, r0, x0)])


def measure_M(u, x0, r0, level=8, seed=0, count=2000):
    """Sampled M = max_{|x-x0|<r0} (r0 - |x-x0|) |grad u(x)| and K_max."""
    rng = np.random.default_rng(seed)
    X = _working_ball_samples(u.n, x0, r0, level, rng, count)
    G = u.grad(X)
    norms = operator_norms(G)
    M = float(np.max((r0 - np.linalg.norm(X - x0, axis=1)) * norms))
    shell = x0 + r0 * build_sphere_rule(u.n, level).nodes
    K = float(np.max(np.linalg.norm(u(np.concatenate([X, shell])) - u(x0), axis=1)))
    return M, K


def verify_main_lemma(u, x0, r0, cert, kind="squared_modulus", level=8, seed=0,
                      epsilon=None):
    """Bound M and |grad u(x0)| through the quadratic inequality.

    Returns two reports (M against the bound, |grad u(x0)| against bound/r0),
    or a single failing report when no admissible theta exists.
    """
    x0 = np.asarray(x0, dtype=float)
    n = u.n
    M, K = measure_M(u, x0, r0, level, seed)
    K *= SUP_INFLATION
    sub = theorem_substitutions(kind, cert.a, cert.b)
    theta_max = 0.999
    if epsilon is not None:
        delta = modulus_of_continuity(u, epsilon, seed=seed)
        theta_max = min(theta_max, delta / r0)
    found = search_theta(cert, n, sub, r0, r0, K, epsilon, theta_max)
    params = {"map": u.name, "x0": x0, "r0": r0, "a": cert.a, "b": cert.b, "kind": kind,
              "K_max": K, "a_over_Cn": cert.a / admissibility_threshold(n)}
    if found is None:
        return [EstimateReport("main_lemma_M", n, M, math.nan, dict(params, feasible=False))]
    p, bound = found
    A, B = lemma_coefficients(p, cert, n)
    params.update(feasible=True, theta=p.theta, four_AB=4 * A * B)
    grad0 = operator_norm(u.grad(x0))
    return [EstimateReport("main_lemma_M", n, M, bound, params),
            EstimateReport("main_lemma_gradient", n, grad0, bound / r0, params)]


# -- boundary comparison lemmas -----------------------------------------------------

def _trace(u):
    return BoundaryData.from_map(u)


def verify_lemma9(u, x, t, cert, level=8):
    """|u(x) - u(t)| against the harmonic comparison with Y = P[u], F = P[|u|^2]."""
    a, b = cert.a, cert.b
    if not 0 <= a < 0.5:
        raise ParameterError(f"comparison needs 0 <= a < 1/2, got a={a}")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    t = t / np.linalg.norm(t)
    n = u.n
    ut = u(t)
    Y = np.atleast_1d(poisson_integral(_trace(u), x, level))
    F = poisson_integral(lambda E: np.sum(u(E) ** 2, axis=1), x, level)
    lhs = float(np.linalg.norm(u(x) - ut))
    rhs = ((1 - a) / (1 - 2 * a) * np.linalg.norm(Y - ut)
           + a / (2 * (1 - 2 * a)) * abs(F - ut @ ut)
           + b / (2 * n * (1 - 2 * a)) * (1 - x @ x))
    return EstimateReport("lemma9", n, lhs, float(rhs),
                          {"map": u.name, "x": x, "t": t, "a": a, "b": b})


def verify_lemma15(chi, x, t, cert, level=8):
    """|chi(x) - chi(t)| against the comparison with P[exp(+-a chi)]."""
    a, b = cert.a, cert.b
    if a <= 0:
        raise ParameterError("exponential comparison needs a > 0")
    if chi.m != 1:
        raise ParameterError("chi must be scalar")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    t = t / np.linalg.norm(t)
    n = chi.n
    ct = float(chi(t)[0])
    hp = poisson_integral(lambda E: np.exp(a * chi(E)[:, 0]), x, level)
    hm = poisson_integral(lambda E: np.exp(-a * chi(E)[:, 0]), x, level)
    lhs = abs(float(chi(x)[0]) - ct)
    rhs = math.exp(a) / a * (abs(hp - math.exp(a * ct)) + abs(hm - math.exp(-a * ct))
                             + 2 * a * b / n * math.exp(a) * (1 - np.linalg.norm(x)))
    return EstimateReport("lemma15", n, lhs, float(rhs),
                          {"map": chi.name, "x": x, "t": t, "a": a, "b": b})


# -- boundary regularity --------------------------------------------------------------

def _nested_points(n, samples, seed):
    # prefix-stable: the first k points do not depend on ``samples``
    Z = np.random.default_rng([seed, 0]).standard_normal((samples, n))
    U = np.random.default_rng([seed, 1]).random(samples)
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    radius = np.where(np.arange(samples) % 2 == 0, 1.0, U ** (1.0 / n))
    return Z * radius[:, None]


def _tangential_gradient(f, eta, h=1e-5):
    # gradient of the 0-homogeneous extension f(x/|x|), tangent to the sphere
    g = lambda X: f(X / np.linalg.norm(X, axis=1, keepdims=True))
    n = eta.shape[1]
    out = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out.append((g(eta + e) - g(eta - e)) / (2 * h))
    return np.stack(out, axis=-1)                         # (N, m, n)


def holder_seminorm(f, alpha, samples=400, seed=0):
    """Sampled estimate of |f|_{1,alpha}.

    sup|f| + sum_i sup|D_i f| + sum_i sup |D_i f(x) - D_i f(y)| / |x-y|^alpha.
    With an extension attached to ``f`` the derivatives are those of the
    extension sampled over the closed ball (half the points on the
    sphere); otherwise tangential finite differences on the sphere are
    used.  Both are lower-bound estimators and nondecreasing in
    ``samples`` (the sample set only grows).
    """
    if not 0 < alpha <= 1:
        raise ParameterError(f"alpha must be in (0, 1], got {alpha}")
    X = _nested_points(f.n, samples, seed)
    if f.extension is not None:
        vals, D = f.extension(X), f.extension.grad(X)
    else:
        X = X / np.linalg.norm(X, axis=1, keepdims=True)
        vals, D = f(X), _tangential_gradient(f, X)
    total = float(np.linalg.norm(vals, axis=1).max())
    total += float(np.linalg.norm(D, axis=1).max(axis=0).sum())
    iu, ju = np.triu_indices(len(X), k=1)
    dist = np.linalg.norm(X[iu] - X[ju], axis=1) ** alpha
    for i in range(f.n):
        jump = np.linalg.norm(D[iu, :, i] - D[ju, :, i], axis=1)
        total += float(np.max(jump / dist)) if len(dist) else 0.0
    return total
