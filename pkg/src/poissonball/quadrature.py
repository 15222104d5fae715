"""Deterministic quadrature on S^{n-1}, B^n and balls around a kernel pole.

Sphere rules are tensor products in hyperspherical coordinates

    eta = (cos t_1, sin t_1 cos t_2, ..., sin t_1 ... sin t_{n-2} (cos p, sin p)),

with Gauss-Gegenbauer nodes in each cos t_k (weight sin^{n-1-k} t_k is
absorbed exactly) and the trapezoid rule in the azimuth p.  A rule of
level L has L nodes per polar angle and 2L azimuthal nodes, so it is
exact for polynomials of degree <= 2L - 1 restricted to the sphere.

Weights always carry the *unnormalised* surface measure (they sum to
omega_{n-1}).  Code that integrates against the probability measure
d sigma divides by omega_{n-1} through :attr:`SphereRule.normalized_weights`.
"""

import functools
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .core import DomainError, InputError, surface_measure

SUPPORTED_DIMS = range(3, 7)
CACHE_ENV = "POISSONBALL_RULE_CACHE"

# graded rule for kernels peaked at a direction: first panel width is the
# distance to the sphere, later panels grow geometrically
_GRADE_RATIO = 2.0
_GRADE_EXTRA_ORDER = 4


class CapabilityError(NotImplementedError):
    pass


@dataclass(frozen=True)
class SphereRule:
    n: int
    level: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "sphere"

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def normalized_weights(self):
        return self.weights / surface_measure(self.n)

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class BallRule:
    n: int
    level: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "ball"

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class SingularBallRule:
    """Polar rule about ``center`` for integrands with a pole there.

    Nodes are ``center + rho * eta`` with ``eta`` from a sphere rule; the
    radial variable is split at ``inner_radius`` into an inner ball and an
    outer shell reaching the region boundary (the unit sphere when
    ``radius`` is None, otherwise the sphere |y - center| = radius).  The
    Jacobian rho^{n-1} sits in the weights, which cancels a |y-center|^{2-n}
    (even |y-center|^{1-n}) pole.
    """

    n: int
    level: int
    center: np.ndarray
    inner_radius: float
    radius: float | None
    nodes: np.ndarray
    weights: np.ndarray
    n_inner: int
    kind: str = "singular"

    def __post_init__(self):
        for a in (self.center, self.nodes, self.weights):
            a.setflags(write=False)

    def __len__(self):
        return len(self.weights)


def _check_dim_level(n, level):
    if n not in SUPPORTED_DIMS:
        raise CapabilityError(f"quadrature supports n in 3..6, got n={n}")
    if int(level) != level or level < 1:
        raise InputError(f"level must be a positive integer, got {level!r}")


@functools.lru_cache(maxsize=64)
def _sphere_tensor(n, level):
    """Nodes and weights of the level-L tensor rule on S^{n-1}, n >= 2."""
    if n == 2:
        m = 2 * level
        phi = 2.0 * np.pi * np.arange(m) / m
        nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        return nodes, np.full(m, 2.0 * np.pi / m)
    a = (n - 3) / 2.0
    t, w = roots_jacobi(level, a, a)
    sub_nodes, sub_w = _sphere_tensor(n - 1, level)
    s = np.sqrt(1.0 - t * t)
    nodes = np.concatenate(
        [np.repeat(t, len(sub_w))[:, None],
         (s[:, None, None] * sub_nodes[None, :, :]).reshape(-1, n - 1)], axis=1)
    weights = np.outer(w, sub_w).ravel()
    return nodes, weights


def build_sphere_rule(n, level):
    """Tensor-product rule on S^{n-1}; exact to polynomial degree 2*level - 1."""
    _check_dim_level(n, level)
    nodes, weights = _sphere_tensor(n, level)
    return SphereRule(n, level, nodes.copy(), weights.copy())


def _graded_polar(scale, order):
    """Composite Gauss-Legendre nodes on [0, pi] graded towards 0."""
    gx, gw = np.polynomial.legendre.leggauss(order)
    breaks = [0.0]
    h = scale
    while breaks[-1] + h < np.pi * 0.999:
        breaks.append(breaks[-1] + h)
        h *= _GRADE_RATIO
    breaks.append(np.pi)
    th, w = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        th.append(0.5 * (lo + hi) + 0.5 * (hi - lo) * gx)
        w.append(0.5 * (hi - lo) * gw)
    return np.concatenate(th), np.concatenate(w)


@functools.lru_cache(maxsize=256)
def _aligned_tensor(n, level, scale):
    # rule whose first polar angle is measured from e_1 and graded towards it
    th, w = _graded_polar(scale, level + _GRADE_EXTRA_ORDER)
    w = w * np.sin(th) ** (n - 2)
    sub_nodes, sub_w = _sphere_tensor(n - 1, level)
    s = np.sin(th)
    nodes = np.concatenate(
        [np.repeat(np.cos(th), len(sub_w))[:, None],
         (s[:, None, None] * sub_nodes[None, :, :]).reshape(-1, n - 1)], axis=1)
    return nodes, np.outer(w, sub_w).ravel()


def householder_to(direction):
    """Orthogonal symmetric matrix H with H e_1 = direction (unit vector)."""
    d = np.asarray(direction, dtype=float)
    n = d.size
    v = -d.copy()
    v[0] += 1.0
    vv = v @ v
    if vv < 1e-28:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(v, v) / vv


def aligned_sphere_rule(n, level, x):
    """Sphere rule resolving the Poisson-kernel peak of an interior point x.

    The first polar angle is measured from x/|x| and discretised by a
    composite Gauss-Legendre rule whose first panel has width 1 - |x|,
    with panel widths doubling towards the antipode.  Returns the plain
    tensor rule when x = 0.
    """
    _check_dim_level(n, level)
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r >= 1.0:
        raise DomainError("aligned_sphere_rule needs |x| < 1")
    if r == 0.0:
        return build_sphere_rule(n, level)
    nodes, weights = _aligned_tensor(n, level, max(1.0 - r, 1e-6))
    H = householder_to(x / r)
    return SphereRule(n, level, nodes @ H, weights.copy(), kind="aligned")


def build_ball_rule(n, level):
    """Radial Gauss-Jacobi (weight r^{n-1}) times the sphere rule."""
    _check_dim_level(n, level)
    s, w = roots_jacobi(level, 0.0, n - 1.0)
    r = 0.5 * (1.0 + s)
    wr = w * 0.5 ** n
    sn, sw = _sphere_tensor(n, level)
    nodes = (r[:, None, None] * sn[None, :, :]).reshape(-1, n)
    weights = np.outer(wr, sw).ravel()
    return BallRule(n, level, nodes, weights)


def _ray_exit(center, eta):
    # distance from an interior center to the unit sphere along each eta
    p = eta @ center
    return -p + np.sqrt(p * p + 1.0 - center @ center)


def build_singular_ball_rule(n, level, center, radius=None, inner_radius=None,
                             radial_order=None):
    """Polar rule about ``center`` over B^n (radius None) or B(center, radius).

    ``radial_order`` Gauss-Legendre nodes are used on each radial piece
    (default 2*level).  The default inner radius is half the distance
    from the center to the region boundary.
    """
    _check_dim_level(n, level)
    c = np.array(center, dtype=float)
    if c.shape != (n,):
        raise InputError(f"center must have shape ({n},), got {c.shape}")
    dist = 1.0 - np.linalg.norm(c)
    if radius is None:
        if dist <= 0.0:
            raise DomainError("center must be inside the unit ball")
        reach = dist
    else:
        if radius <= 0.0:
            raise DomainError("radius must be positive")
        reach = float(radius)
    delta = 0.5 * reach if inner_radius is None else float(inner_radius)
    if not 0.0 < delta < reach:
        raise DomainError(f"inner radius {delta} not in (0, {reach})")
    q = 2 * level if radial_order is None else int(radial_order)
    gx, gw = np.polynomial.legendre.leggauss(q)
    eta, sw = _sphere_tensor(n, level)

    # inner ball: rho in [0, delta]
    rho_in = 0.5 * delta * (1.0 + gx)
    w_in = 0.5 * delta * gw * rho_in ** (n - 1)
    in_nodes = c + (rho_in[:, None, None] * eta[None, :, :]).reshape(-1, n)
    in_w = np.outer(w_in, sw).ravel()

    # outer shell: rho in [delta, R(eta)]
    R = _ray_exit(c, eta) if radius is None else np.full(len(sw), reach)
    half = 0.5 * (R - delta)
    rho_out = delta + half[None, :] * (1.0 + gx[:, None])          # (q, N)
    w_out = half[None, :] * gw[:, None] * rho_out ** (n - 1) * sw[None, :]
    out_nodes = c + (rho_out[:, :, None] * eta[None, :, :]).reshape(-1, n)

    nodes = np.concatenate([in_nodes, out_nodes])
    weights = np.concatenate([in_w, w_out.ravel()])
    return SingularBallRule(n, level, c, delta, None if radius is None else reach,
                            nodes, weights, len(in_w))


def _reduce(weights, values):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        return float(np.sum(weights * values))
    return np.sum(weights.reshape((-1,) + (1,) * (values.ndim - 1)) * values, axis=0)


def integrate(rule, f, normalized=False):
    """Apply ``rule`` to a vectorised integrand f: (N, n) -> (N,) or (N, ...)."""
    w = rule.normalized_weights if normalized else rule.weights
    return _reduce(w, f(np.asarray(rule.nodes)))


def integrate_singular(f, x, rule):
    """Integral of f, singular like |y - x|^{2-n} at x, with a polar rule about x."""
    if not np.allclose(rule.center, x, atol=1e-15, rtol=0.0):
        raise InputError("singular rule is centred at a different point")
    return integrate(rule, f)


# -- serialisation -----------------------------------------------------------
#
# Flat CSV: one header comment "# poissonball-rule kind=<k> n=<n> level=<L>",
# then one row per node: n coordinates followed by the weight.

def save_rule(rule, path):
    header = f"poissonball-rule kind={rule.kind} n={rule.n} level={rule.level}"
    data = np.column_stack([rule.nodes, rule.weights])
    np.savetxt(path, data, delimiter=",", header=header, fmt="%.17e")


def load_rule(path):
    with open(path) as fh:
        first = fh.readline()
    if not first.startswith("# poissonball-rule"):
        raise InputError(f"{path} is not a rule file")
    meta = dict(tok.split("=") for tok in first[2:].split()[1:])
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    n, level = int(meta["n"]), int(meta["level"])
    if data.shape[1] != n + 1:
        raise InputError(f"{path}: expected {n + 1} columns, got {data.shape[1]}")
    nodes, weights = np.ascontiguousarray(data[:, :n]), np.ascontiguousarray(data[:, n])
    cls = BallRule if meta["kind"] == "ball" else SphereRule
    return cls(n, level, nodes, weights)


def cached_rule(kind, n, level, cache_dir=None):
    """Sphere or ball rule, read from / written to a CSV cache directory.

    The directory defaults to the POISSONBALL_RULE_CACHE environment
    variable; without either the rule is simply built.
    """
    build = {"sphere": build_sphere_rule, "ball": build_ball_rule}[kind]
    cache_dir = cache_dir or os.environ.get(CACHE_ENV)
    if not cache_dir:
        return build(n, level)
    path = os.path.join(cache_dir, f"{kind}_n{n}_L{level}.csv")
    if os.path.exists(path):
        return load_rule(path)
    rule = build(n, level)
    os.makedirs(cache_dir, exist_ok=True)
    save_rule(rule, path)
    return rule
