"""Quasiconformal distortion, distance functions of C^2 domains, and the
composition chi = -d(u(x)) used to transfer Poisson inequalities to the
boundary.

Domains are immutable oracles for the signed distance d (positive
inside), the nearest boundary point y(x), the inward unit normal nu(y)
and the principal curvatures kappa_i(y) (positive for convex domains).
Work happens on the collar {0 < d < mu} with mu = COLLAR_FRACTION * reach,
where d is C^2 and 1 - kappa_i d stays away from zero.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import (DomainError, InputError, cross_product, linear_distortion,
                   min_stretch, operator_norm, operator_norms)
from .estimates import DEFAULT_TOL, EstimateReport, ParameterError
from .maps import random_ball_points, random_sphere_points
from .potential import SmoothMap
from .quadrature import CapabilityError

COLLAR_FRACTION = 0.8
FD_HESSIAN_STEP = 1e-4
FD_GRADIENT_STEP = 1e-5


class ProjectionError(ArithmeticError):
    pass


# -- distortion -------------------------------------------------------------------

@dataclass(frozen=True)
class DistortionReport:
    grad_norm: float
    min_stretch: float
    jacobian: float
    K_estimate: float
    degenerate: bool = False


def distortion(u, x):
    """Pointwise distortion of a map R^n -> R^n from its Jacobian matrix."""
    if u.m != u.n:
        raise InputError("distortion needs a map R^n -> R^n")
    A = u.grad(np.asarray(x, dtype=float))
    big, small = operator_norm(A), min_stretch(A)
    J = float(np.linalg.det(A))
    K = linear_distortion(A)
    return DistortionReport(big, small, J, K, degenerate=not math.isfinite(K))


def cross_inequality_check(A, vectors, K=None):
    """K^{1-n}|A|^{n-1}|v_1 x ... x v_{n-1}| <= |A v_1 x ... x A v_{n-1}| <= |A|^{n-1}|v_1 x ...|.

    Returns (lower, upper) reports.  ``K`` defaults to the distortion of A;
    a value below it is rejected.
    """
    A = np.asarray(A, dtype=float)
    V = np.asarray(vectors, dtype=float)
    n = A.shape[0]
    KA = linear_distortion(A)
    if K is None:
        K = KA
    elif K < KA * (1 - 1e-12):
        raise ParameterError(f"K = {K} is below the distortion {KA} of A")
    norm = operator_norm(A)
    base = np.linalg.norm(cross_product(V))
    image = np.linalg.norm(cross_product(V @ A.T))
    # roundoff in either cross product scales with prod |v_i|, not with |v_1 x ...|
    scale = max(norm ** (n - 1) * float(np.prod(np.linalg.norm(V, axis=1))), 1e-300)
    tol = 1e-9 * scale
    params = {"K": K, "A_norm": norm}
    lower = EstimateReport("cross_lower", n, K ** (1 - n) * norm ** (n - 1) * base, image,
                           params, tol)
    upper = EstimateReport("cross_upper", n, image, norm ** (n - 1) * base, params, tol)
    return lower, upper


def conformal_cross_equality(A, vectors, tol=1e-9):
    """For A = c Q with Q orthogonal both cross-product bounds are equalities."""
    A = np.asarray(A, dtype=float)
    V = np.asarray(vectors, dtype=float)
    n = A.shape[0]
    base = np.linalg.norm(cross_product(V))
    image = np.linalg.norm(cross_product(V @ A.T))
    expected = operator_norm(A) ** (n - 1) * base
    return EstimateReport("cross_conformal_equality", n, abs(image - expected),
                          tol * max(expected, 1.0), {"c": operator_norm(A)}, tolerance=0.0)


# -- domains -------------------------------------------------------------------------

def _tangent_frame(nu):
    # (N, n-1, n) orthonormal bases of the planes orthogonal to each nu
    N, n = nu.shape
    out = np.empty((N, n - 1, n))
    for k in range(N):
        q, _ = np.linalg.qr(np.column_stack([nu[k], np.eye(n)]))
        out[k] = q[:, 1:n].T
    return out


class C2Domain:
    """Bounded domain with C^2 boundary; subclasses supply the oracles."""

    n: int
    kappa0: float
    is_convex: bool = True

    @property
    def reach(self):
        return 1.0 / self.kappa0

    @property
    def collar(self):
        return COLLAR_FRACTION * self.reach

    # subclass oracles
    def projection(self, X):
        raise NotImplementedError

    def inward_normal(self, Y):
        raise NotImplementedError

    def shape_operator(self, Y):
        raise NotImplementedError

    def inside(self, X):
        raise NotImplementedError

    def _points(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[-1] != self.n:
            raise InputError(f"expected points in R^{self.n}, got shape {X.shape}")
        return X

    def signed_distance(self, X):
        single = np.asarray(X).ndim == 1
        X = self._points(X)
        d = np.linalg.norm(X - self.projection(X), axis=1)
        d = np.where(self.inside(X), d, -d)
        return float(d[0]) if single else d

    def principal_curvatures(self, Y):
        """(kappa, tau): curvatures (N, n-1) ascending and principal directions (N, n-1, n)."""
        Y = self._points(Y)
        nu = self.inward_normal(Y)
        T = _tangent_frame(nu)
        S = np.einsum("kai,kij,kbj->kab", T, self.shape_operator(Y), T)
        kappa, vec = np.linalg.eigh(S)
        return kappa, np.einsum("kab,kai->kbi", vec, T)

    def distance_gradient(self, X):
        return self.inward_normal(self.projection(self._points(X)))

    def distance_hessian(self, X):
        """D^2 d = sum_i -kappa_i / (1 - kappa_i d) tau_i tau_i^t on the collar."""
        X = self._points(X)
        Y = self.projection(X)
        d = np.linalg.norm(X - Y, axis=1)
        kappa, tau = self.principal_curvatures(Y)
        coef = -kappa / (1.0 - kappa * d[:, None])
        return np.einsum("ka,kai,kaj->kij", coef, tau, tau)

    def check_collar(self, X):
        d = self.signed_distance(self._points(X))
        if np.any(d <= 0) or np.any(d >= self.collar):
            raise DomainError(f"points outside the collar 0 < d < {self.collar:.6g}")
        return d

    def sample_boundary(self, count, rng):
        raise NotImplementedError

    def sample_collar(self, count, rng, depth=None):
        """Points y + s nu(y) with y on the boundary and s uniform in (0, depth)."""
        depth = self.collar if depth is None else depth
        Y = self.sample_boundary(count, rng)
        s = depth * (1.0 - rng.random(count))
        return Y + s[:, None] * self.inward_normal(Y)

    def sample_interior(self, count, rng):
        raise NotImplementedError


class BallDomain(C2Domain):
    def __init__(self, n, R=1.0, center=None):
        if R <= 0:
            raise InputError(f"radius must be positive, got {R}")
        self.n, self.R = int(n), float(R)
        self.center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        self.kappa0 = 1.0 / self.R

    def __repr__(self):
        return f"ball:{self.R:g}"

    def inside(self, X):
        return np.linalg.norm(X - self.center, axis=1) < self.R

    def signed_distance(self, X):
        single = np.asarray(X).ndim == 1
        d = self.R - np.linalg.norm(self._points(X) - self.center, axis=1)
        return float(d[0]) if single else d

    def projection(self, X):
        X = self._points(X)
        v = X - self.center
        r = np.linalg.norm(v, axis=1, keepdims=True)
        if np.any(r == 0):
            raise ProjectionError("the centre has no unique nearest boundary point")
        return self.center + self.R * v / r

    def inward_normal(self, Y):
        v = self._points(Y) - self.center
        return -v / np.linalg.norm(v, axis=1, keepdims=True)

    def shape_operator(self, Y):
        N = len(self._points(Y))
        return np.broadcast_to(np.eye(self.n) / self.R, (N, self.n, self.n))

    def sample_boundary(self, count, rng):
        return self.center + self.R * random_sphere_points(self.n, count, rng)

    def sample_interior(self, count, rng):
        return random_ball_points(self.n, count, rng, self.R, self.center)


class EllipsoidDomain(C2Domain):
    """{sum (x_i / a_i)^2 < 1}; reach a_min^2 / a_max."""

    def __init__(self, semiaxes, max_iter=100):
        a = np.asarray(semiaxes, dtype=float)
        if a.ndim != 1 or a.size < 2 or np.any(a <= 0):
            raise InputError(f"semiaxes must be positive, got {semiaxes!r}")
        self.a, self.n = a, a.size
        self.kappa0 = float(a.max() / a.min() ** 2)
        self.max_iter = max_iter

    def __repr__(self):
        return "ellipsoid:" + ",".join(f"{v:g}" for v in self.a)

    def inside(self, X):
        return np.sum((X / self.a) ** 2, axis=1) < 1.0

    def projection(self, X):
        """Nearest boundary points by safeguarded Newton on the Lagrange multiplier.

        y_i = a_i^2 x_i / (a_i^2 + t) with t the root of
        F(t) = sum (a_i x_i / (a_i^2 + t))^2 - 1, decreasing on (-a_min^2, inf).
        """
        X = self._points(X)
        a2 = self.a ** 2
        amin2 = a2.min()

        def F(t):
            return np.sum((self.a * X / (a2 + t[:, None])) ** 2, axis=1) - 1.0

        def dF(t):
            return -2.0 * np.sum((self.a * X) ** 2 / (a2 + t[:, None]) ** 3, axis=1)

        N = len(X)
        lo = np.full(N, -amin2 * (1 - 1e-14))
        hi = np.maximum(np.linalg.norm(X, axis=1) * self.a.max(), 0.0)
        while np.any(F(hi) > 0):
            hi = np.where(F(hi) > 0, 2 * hi + 1, hi)
        Flo = F(lo)
        degenerate = Flo <= 0       # x on a symmetry plane of the shortest axis
        t = np.where(degenerate, lo, hi)
        active = ~degenerate
        for _ in range(self.max_iter):
            if not np.any(active):
                break
            f = F(t)
            lo = np.where(active & (f > 0), t, lo)
            hi = np.where(active & (f <= 0), t, hi)
            step = t - f / dF(t)
            bad = ~((step > lo) & (step < hi))
            new = np.where(bad, 0.5 * (lo + hi), step)
            done = np.abs(new - t) <= 1e-15 * np.maximum(1.0, np.abs(t))
            t = np.where(active, new, t)
            active &= ~done
        if np.any(active):
            idx = np.flatnonzero(active)
            raise ProjectionError(f"projection did not converge at points {idx[:5]}; "
                                  f"last t = {t[idx[:5]]}, bracket widths {(hi - lo)[idx[:5]]}")
        Y = a2 * X / (a2 + t[:, None])
        if np.any(degenerate):
            Y[degenerate] = self._degenerate_projection(X[degenerate])
        return Y

    def _degenerate_projection(self, X):
        # t = -a_min^2: free coordinates along the shortest axes
        a2 = self.a ** 2
        short = np.isclose(a2, a2.min())
        out = np.empty_like(X)
        for k, x in enumerate(X):
            y = np.zeros_like(x)
            y[~short] = a2[~short] * x[~short] / (a2[~short] - a2.min())
            rest = 1.0 - np.sum((y[~short] / self.a[~short]) ** 2)
            free = x[short]
            nf = np.linalg.norm(free)
            direction = free / nf if nf > 0 else np.eye(short.sum())[0]
            y[short] = self.a[short] * math.sqrt(max(rest, 0.0)) * direction
            out[k] = y
        return out

    def inward_normal(self, Y):
        g = self._points(Y) / self.a ** 2
        return -g / np.linalg.norm(g, axis=1, keepdims=True)

    def shape_operator(self, Y):
        # Hessian of sum (x_i/a_i)^2 over its gradient norm; restricted to the tangent plane
        g = 2 * self._points(Y) / self.a ** 2
        gn = np.linalg.norm(g, axis=1)
        H = 2 * np.diag(1 / self.a ** 2)
        return H[None] / gn[:, None, None]

    def sample_boundary(self, count, rng):
        return self.a * random_sphere_points(self.n, count, rng)

    def sample_interior(self, count, rng):
        X = []
        total = 0
        while total < count:
            cand = self.a.max() * random_ball_points(self.n, 2 * count, rng)
            cand = cand[self.inside(cand)]
            X.append(cand)
            total += len(cand)
        return np.concatenate(X)[:count]


def ball_domain(R=1.0, n=3):
    return BallDomain(n, R)


def ellipsoid_domain(semiaxes):
    return EllipsoidDomain(semiaxes)


def parse_domain(text, n=3):
    """``ball:R`` or ``ellipsoid:a1,...,an``; the ellipsoid fixes its own dimension."""
    kind, _, args = text.strip().partition(":")
    try:
        values = [float(v) for v in args.split(",")] if args else []
    except ValueError:
        raise InputError(f"bad domain parameters in {text!r}") from None
    if kind == "ball":
        if len(values) != 1:
            raise InputError("ball takes exactly one radius, e.g. ball:1")
        return BallDomain(n, values[0])
    if kind == "ellipsoid":
        return EllipsoidDomain(values)
    raise InputError(f"unknown domain type {kind!r}; expected ball or ellipsoid")


# -- distance identities -----------------------------------------------------------

def _fd_hessian(f, x, h):
    n = x.size
    E = np.eye(n) * h
    H = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        H[i, i] = (f(x + E[i]) - 2 * f0 + f(x - E[i])) / h ** 2
        for j in range(i):
            H[i, j] = H[j, i] = (f(x + E[i] + E[j]) - f(x + E[i] - E[j])
                                 - f(x - E[i] + E[j]) + f(x - E[i] - E[j])) / (4 * h * h)
    return H


def _fd_gradient(f, x, h):
    E = np.eye(x.size) * h
    return np.array([(f(x + e) - f(x - e)) / (2 * h) for e in E])


def distance_identities(dom, x, h=FD_HESSIAN_STEP, tol=1e-3):
    """Finite-difference Hessian of d against -kappa_i/(1 - kappa_i d) and 0.

    The report's lhs is the largest of: eigenvalue mismatch, trace
    mismatch against the Laplacian identity, misalignment of the null
    eigenvector with the normal, and | |grad d| - 1 |.
    """
    x = np.asarray(x, dtype=float)
    d = float(dom.check_collar(x)[0])
    y = dom.projection(x[None])
    kappa, _ = dom.principal_curvatures(y)
    kappa = kappa[0]
    nu = dom.inward_normal(y)[0]
    expected = np.sort(np.append(-kappa / (1 - kappa * d), 0.0))
    H = _fd_hessian(dom.signed_distance, x, h)
    vals, vecs = np.linalg.eigh(H)
    eig_err = float(np.max(np.abs(np.sort(vals) - expected)))
    trace_err = abs(float(np.trace(H)) - float(np.sum(-kappa / (1 - kappa * d))))
    null = vecs[:, np.argmin(np.abs(vals))]
    align_err = 1.0 - abs(float(null @ nu))
    grad = _fd_gradient(dom.signed_distance, x, FD_GRADIENT_STEP)
    grad_err = abs(np.linalg.norm(grad) - 1.0)
    normal_err = float(np.linalg.norm(grad - nu))
    worst = max(eig_err, trace_err, align_err, grad_err, normal_err)
    return EstimateReport("distance_identities", dom.n, worst, tol,
                          {"domain": repr(dom), "x": x, "d": d, "kappa": kappa,
                           "eig_err": eig_err, "trace_err": trace_err,
                           "align_err": align_err, "grad_norm_err": grad_err,
                           "normal_err": normal_err},
                          tolerance=0.0)


def lipschitz_check(dom, X, Y):
    """|d(x) - d(y)| <= |x - y| over pairs; lhs/rhs at the tightest pair."""
    dx = np.abs(dom.signed_distance(X) - dom.signed_distance(Y))
    dist = np.linalg.norm(np.asarray(X) - np.asarray(Y), axis=1)
    k = int(np.argmax(dx - dist))
    return EstimateReport("distance_lipschitz", dom.n, float(dx[k]), float(dist[k]),
                          {"domain": repr(dom), "pairs": len(dist),
                           "max_ratio": float(np.max(dx / np.maximum(dist, 1e-300)))},
                          tolerance=1e-12)


def gradient_norm_check(dom, X, tol=1e-6):
    """| |grad d| - 1 | by central differences at collar points."""
    dom.check_collar(X)
    err = max(abs(np.linalg.norm(_fd_gradient(dom.signed_distance, x, FD_GRADIENT_STEP)) - 1.0)
              for x in X)
    return EstimateReport("distance_gradient_norm", dom.n, float(err), tol,
                          {"domain": repr(dom), "samples": len(X)}, tolerance=0.0)


def subharmonicity_check(dom, X):
    """Laplacian of -d is nonnegative on collar points of a convex domain."""
    lap = -np.trace(dom.distance_hessian(X), axis1=1, axis2=2)
    return EstimateReport("minus_d_subharmonic", dom.n, -float(lap.min()), 0.0,
                          {"domain": repr(dom), "samples": len(X)})


# -- chi = -d(u) -----------------------------------------------------------------------

def chi_compose(u, dom):
    """The scalar map chi(x) = -d(u(x)) with chain-rule derivatives.

    grad chi = -(grad u)^t nu and
    Lap chi = sum_i kappa_i / (1 - kappa_i d) |(grad u)^t tau_i|^2 - <nu, Lap u>,
    with nu, kappa_i, tau_i taken at the nearest boundary point of u(x).
    """
    if u.m != dom.n:
        raise InputError(f"u maps into R^{u.m}, domain lives in R^{dom.n}")

    def geometry(X):
        U = u(X)
        d = dom.check_collar(U)
        Y = dom.projection(U)
        return d, dom.inward_normal(Y), Y

    def value(X):
        return -dom.signed_distance(u(X))[:, None]

    def gradient(X):
        _, nu, _ = geometry(X)
        return -np.einsum("kji,kj->ki", u.grad(X), nu)[:, None, :]

    def laplacian(X):
        d, nu, Y = geometry(X)
        kappa, tau = dom.principal_curvatures(Y)
        G = u.grad(X)
        proj = np.einsum("kji,kaj->kai", G, tau)          # (grad u)^t tau_a
        curv = np.sum(kappa / (1 - kappa * d[:, None]) * np.sum(proj ** 2, axis=2), axis=1)
        return (curv - np.sum(nu * u.lap(X), axis=1))[:, None]

    return SmoothMap(u.n, 1, value, gradient, laplacian, name=f"-d({u.name})")


def _pointwise_K(u, X):
    return np.array([linear_distortion(A) for A in u.grad(X)])


def gradient_sandwich_check(u, dom, X, K=None):
    """|grad chi| <= |grad u| <= K^{2/n} |grad chi|; two reports at the worst points.

    ``K`` defaults to the pointwise distortion of u, which is never larger
    than a global constant.
    """
    n = dom.n
    chi = chi_compose(u, dom)
    gchi = np.linalg.norm(chi.grad(X)[:, 0, :], axis=1)
    gu = operator_norms(u.grad(X))
    Kx = _pointwise_K(u, X) if K is None else np.full(len(X), float(K))
    upper = Kx ** (2.0 / n) * gchi
    i = int(np.argmax(gchi - gu))
    j = int(np.argmax(gu - upper))
    tol = DEFAULT_TOL + (1e-5 if u.fd_gradient else 0.0)
    params = {"map": u.name, "domain": repr(dom), "samples": len(X)}
    return (EstimateReport("sandwich_lower", n, float(gchi[i]), float(gu[i]), params, tol),
            EstimateReport("sandwich_upper", n, float(gu[j]), float(upper[j]),
                           dict(params, K=float(Kx[j])), tol))


def laplacian_transfer_check(u, dom, cert, X, K=None):
    """|Lap chi| <= K^{4/n} (a + n kappa0 / (1 - mu kappa0)) |grad chi|^2 + b at collar points."""
    n = dom.n
    chi = chi_compose(u, dom)
    lap = np.abs(chi.lap(X)[:, 0])
    g2 = np.sum(chi.grad(X)[:, 0, :] ** 2, axis=1)
    Kx = _pointwise_K(u, X) if K is None else np.full(len(X), float(K))
    mu, k0 = dom.collar, dom.kappa0
    a1 = Kx ** (4.0 / n) * (cert.a + n * k0 / (1 - mu * k0))
    bound = a1 * g2 + cert.b
    j = int(np.argmax(lap - bound))
    tol = DEFAULT_TOL + (1e-4 if u.fd_laplacian else 0.0)
    return EstimateReport("laplacian_transfer", n, float(lap[j]), float(bound[j]),
                          {"map": u.name, "domain": repr(dom), "a": cert.a, "b": cert.b,
                           "K": float(Kx[j]), "samples": len(X)}, tol)


def chi_laplacian_fd_check(u, dom, X, h=1e-3, tol=1e-3):
    """Assembled Lap chi against second differences of -d(u(x))."""
    chi = chi_compose(u, dom)
    fd = SmoothMap(u.n, 1, chi._value, h_lap=h).lap(X)[:, 0]
    err = np.abs(fd - chi.lap(X)[:, 0])
    return EstimateReport("chi_laplacian_fd", u.n, float(err.max()), tol,
                          {"map": u.name, "domain": repr(dom), "samples": len(X)},
                          tolerance=0.0)


# -- boundary Jacobian and Hoelder exponent ---------------------------------------------

def sampled_distortion(u, count=200, seed=0, radius=1.0):
    """max of the pointwise distortion over random points of B(0, radius)."""
    X = random_ball_points(u.n, count, np.random.default_rng(seed), radius)
    return float(max(1.0, _pointwise_K(u, X).max()))


def boundary_jacobian_bound(u, dom, t, K=None, r=1 - 1e-3):
    """J_u(r t) >= dist(u(0), boundary)^n / (2K)^{n^2 - n} near the sphere."""
    if not dom.is_convex:
        raise CapabilityError("the boundary Jacobian bound needs a convex target")
    n = u.n
    t = np.asarray(t, dtype=float)
    t = t / np.linalg.norm(t)
    if K is None:
        K = max(sampled_distortion(u, radius=r), linear_distortion(u.grad(r * t)))
    dist = dom.signed_distance(u(np.zeros(n)))
    bound = dist ** n / (2 * K) ** (n * n - n)
    J = float(np.linalg.det(u.grad(r * t)))
    return EstimateReport("boundary_jacobian", n, bound, J,
                          {"map": u.name, "domain": repr(dom), "t": t, "r": r, "K": K,
                           "dist": dist})


def mori_exponent_probe(u, K, samples=400, seed=0, bound=math.inf):
    """Fit M_1 = max |u(x) - u(y)| / |x - y|^{K^{1/(1-n)}} over sampled pairs.

    Pairs include the origin, where radial maps are least regular.  The
    report passes when the fitted constant is finite and below ``bound``.
    """
    n = u.n
    if K < 1:
        raise ParameterError(f"distortion must be >= 1, got {K}")
    expo = K ** (1.0 / (1 - n))
    X = random_ball_points(n, samples, np.random.default_rng(seed))
    X = np.concatenate([np.zeros((1, n)), X])
    V = u(X)
    iu, ju = np.triu_indices(len(X), k=1)
    quot = np.linalg.norm(V[iu] - V[ju], axis=1) / np.linalg.norm(X[iu] - X[ju], axis=1) ** expo
    M1 = float(quot.max())
    return EstimateReport("mori_exponent", n, M1, bound,
                          {"map": u.name, "K": K, "exponent": expo, "pairs": len(quot)})
