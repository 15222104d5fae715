"""Instance families behind ``poissonball verify`` and the acceptance tests.

Every task is a module-level function of (index, ...) that rebuilds its
instance from ``numpy.random.default_rng([seed, index])``, so results
depend only on the arguments and can be computed in any process and in
any order.
"""

import functools
import math

import numpy as np

from . import estimates as est
from . import qcgeom as qc
from .core import admissibility_threshold
from .maps import (PoissonCertificate, constant_laplacian_certificate, certify, dilation, identity,
                   mobius, plane_wave, quadratic_map, radial_stretch, random_ball_points,
                   random_quadratic, random_sphere_points, squared_norm)
from .potential import mean_value_residual

SUITES = ("energy", "gradient", "meanvalue", "mainlemma", "lemma9", "lemma15",
          "geometry", "qc")
MEAN_VALUE_BUDGET = 1e-8
MAIN_LEMMA_A_VALUES = 20


def _rng(seed, index):
    return np.random.default_rng([seed, index])


def _inner_ball(n, rng, max_radius):
    """Random centre x with |x| <= max_radius and a radius rho keeping B(x, rho) inside B^n."""
    x = random_ball_points(n, 1, rng, max_radius)[0]
    room = 1.0 - np.linalg.norm(x) - 0.02
    return x, rng.uniform(0.2, 1.0) * room


# -- analytic lemmas -------------------------------------------------------------------

def energy_task(index, n, level, seed):
    rng = _rng(seed, index)
    u = random_quadratic(n, 2, rng, harmonic=index % 3 == 0)
    a = rng.uniform(0.0, 0.5)
    cert = constant_laplacian_certificate(u, a)
    x, rho = _inner_ball(n, rng, 0.5)
    rho1 = rho * rng.uniform(0.1, 0.9)
    sub = est.theorem_substitutions("squared_modulus", cert.a, cert.b)
    return [est.verify_energy_bound(u, x, rho, rho1, sub, level, seed=index)]


def gradient_task(index, n, level, seed):
    rng = _rng(seed, index)
    Y = random_quadratic(n, 2, rng, harmonic=index % 3 == 0)
    x0, rho = _inner_ball(n, rng, 0.5)
    Z = Y(x0) if index % 2 else np.zeros(2)
    return list(est.verify_gradient_bound(Y, x0, rho, Z, level))


def meanvalue_task(index, n, level, seed):
    rng = _rng(seed, index)
    if index % 2 == 0:
        u = random_quadratic(n, 2, rng)
    else:
        k = rng.standard_normal(n)
        u = plane_wave(3.0 * rng.random() * k / np.linalg.norm(k))
    x, rho = _inner_ball(n, rng, 0.5)
    res = mean_value_residual(u, x, rho, level)
    return [est.EstimateReport("mean_value", n, res, MEAN_VALUE_BUDGET,
                               {"map": u.name, "x": x, "rho": rho}, tolerance=0.0)]


def _boundary_pair(n, rng, index):
    t = random_sphere_points(n, 1, rng)[0]
    if index % 4 in (1, 3):
        x = rng.uniform(0.5, 0.9) * t          # approach t along the radius
    else:
        x = random_ball_points(n, 1, rng, 0.9)[0]
    return x, t


def lemma9_task(index, n, level, seed):
    rng = _rng(seed, index)
    a = rng.uniform(0.0, 0.45)
    if index % 2 == 0:
        scale, shift = rng.uniform(0.1, 0.5), rng.uniform(0.0, 1.0)
        u = squared_norm(n, scale, shift)
        cert = PoissonCertificate(a, 2 * n * scale)
    else:
        u = random_quadratic(n, 2, rng, harmonic=index % 3 == 0)
        cert = constant_laplacian_certificate(u, a)
    x, t = _boundary_pair(n, rng, index)
    return [est.verify_lemma9(u, x, t, cert, level)]


def lemma15_task(index, n, level, seed):
    rng = _rng(seed, index)
    a = (0.5, 1.0, 2.0)[index % 3]
    if index % 2 == 0:
        chi = squared_norm(n, 0.5, 1.0)            # (|x|^2 - 1)/2, Laplacian n
        cert = PoissonCertificate(a, float(n))
    else:
        chi = random_quadratic(n, 1, rng, harmonic=index % 4 == 1)
        cert = constant_laplacian_certificate(chi, a)
    x, t = _boundary_pair(n, rng, index)
    return [est.verify_lemma15(chi, x, t, cert, level)]


def main_lemma_a(index, n, a_frac):
    fracs = np.linspace(0.05, a_frac, MAIN_LEMMA_A_VALUES)
    return float(fracs[index % MAIN_LEMMA_A_VALUES] * admissibility_threshold(n))


def mainlemma_task(index, n, level, seed, a_frac=0.99):
    """Main-lemma bound on a harmonic+quadratic map, plus the substitution checks."""
    rng = _rng(seed, index)
    a = main_lemma_a(index, n, a_frac)
    u = random_quadratic(n, 2, rng)
    cert = constant_laplacian_certificate(u, a)
    x0 = random_ball_points(n, 1, rng, 0.3)[0]
    r0 = 1.0 - np.linalg.norm(x0)
    reports = est.verify_main_lemma(u, x0, r0, cert, level=level, seed=index)

    # feasibility with the epsilon of the small-oscillation regime
    eps = (n + 1) / (4 * a * n * n + 1)
    sub = est.theorem_substitutions("squared_modulus", cert.a, cert.b)
    K = reports[0].params["K_max"]
    found = est.search_theta(cert, n, sub, r0, r0, K, epsilon=eps)
    if found is None:
        four_ab, theta = math.nan, math.nan
    else:
        A, B = est.lemma_coefficients(found[0], cert, n)
        four_ab, theta = 4 * A * B, found[0].theta
    reports.append(est.EstimateReport("main_lemma_feasible_eps", n, four_ab, 1.0,
                                      {"a": a, "epsilon": eps, "theta": theta},
                                      tolerance=0.0))

    X = random_ball_points(n, 200, rng)
    reports.append(est.check_chain_rule(u, X[0]))
    reports.append(est.check_substitution_inequality(u, "squared_modulus", cert.a, cert.b, X))
    return reports


# -- geometry and q.c. --------------------------------------------------------------------

def ellipsoid_for(n):
    return qc.EllipsoidDomain(np.linspace(1.2, 0.9, n))


def geometry_identity_task(index, domain, n, seed):
    dom = qc.parse_domain(domain, n)
    x = dom.sample_collar(1, _rng(seed, index))[0]
    return [qc.distance_identities(dom, x)]


def geometry_global_task(index, domain, n, seed, pairs=10_000, collar_samples=1000):
    dom = qc.parse_domain(domain, n)
    rng = _rng(seed, index)
    X, Y = dom.sample_interior(pairs, rng), dom.sample_interior(pairs, rng)
    C = dom.sample_collar(collar_samples, rng)
    reports = [qc.lipschitz_check(dom, X, Y), qc.gradient_norm_check(dom, C)]
    if dom.is_convex:
        reports.append(qc.subharmonicity_check(dom, C))
    return reports


def random_matrix(n, rng, conformal=False):
    if conformal:
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        return rng.uniform(0.2, 3.0) * Q
    return rng.standard_normal((n, n))


def cross_task(index, n, seed):
    rng = _rng(seed, index)
    conformal = index % 10 == 0
    A = random_matrix(n, rng, conformal)
    V = rng.standard_normal((n - 1, n))
    reports = list(qc.cross_inequality_check(A, V))
    if conformal:
        reports.append(qc.conformal_cross_equality(A, V))
    return reports


def composed_maps(n, rng):
    Q = rng.standard_normal((n, n, n))
    near_identity = quadratic_map(0.05 * (Q + Q.transpose(0, 2, 1)), np.eye(n),
                                  name="near-identity quadratic")
    a = np.zeros(n)
    a[0] = 0.3
    return [identity(n), dilation(n, 0.9), mobius(a), radial_stretch(n, 0.8), near_identity]


def composed_task(index, n, seed, samples=200):
    """Gradient sandwich, Laplacian transfer and chi Laplacian on collar samples."""
    rng = _rng(seed, index)
    maps = composed_maps(n, _rng(seed, 0))
    domains = [qc.BallDomain(n, 1.0), ellipsoid_for(n)]
    u = maps[index % len(maps)]
    dom = domains[(index // len(maps)) % len(domains)]
    X = 1.3 * random_ball_points(n, 20 * samples, rng)
    d = dom.signed_distance(u(X))
    X = X[(d > 0.02 * dom.collar) & (d < 0.98 * dom.collar)][:samples]
    cert = certify(u, X, a=0.0)
    return [*qc.gradient_sandwich_check(u, dom, X),
            qc.laplacian_transfer_check(u, dom, cert, X),
            qc.chi_laplacian_fd_check(u, dom, X[:50])]


def jacobian_task(index, n, seed, points=20):
    rng = _rng(seed, index)
    kind = index % 3
    if kind == 0:
        u, dom, K = identity(n), qc.BallDomain(n, 1.0), 1.0
    elif kind == 1:
        c = rng.uniform(0.3, 2.0)
        u, dom, K = dilation(n, c), qc.BallDomain(n, c), 1.0
    else:
        a = random_ball_points(n, 1, rng, 0.5)[0]
        u, dom, K = mobius(a), qc.BallDomain(n, 1.0), None
    return [qc.boundary_jacobian_bound(u, dom, t, K)
            for t in random_sphere_points(n, points, rng)]


def mori_task(index, n, seed):
    s = (1.0, 0.5, 0.8, 2.0)[index % 4]
    u = identity(n) if s == 1.0 else radial_stretch(n, s)
    K = qc.sampled_distortion(u, seed=seed)
    return [qc.mori_exponent_probe(u, K, seed=seed)]


# -- assembly -----------------------------------------------------------------------------

def suite_tasks(suite, n=3, level=8, seed=0, count=100, a_frac=0.99, domain="ball:1"):
    """List of zero-argument callables, each returning a list of reports."""
    p = functools.partial
    if suite == "energy":
        return [p(energy_task, i, n, level, seed) for i in range(count)]
    if suite == "gradient":
        return [p(gradient_task, i, n, level, seed) for i in range(count)]
    if suite == "meanvalue":
        return [p(meanvalue_task, i, n, level, seed) for i in range(count)]
    if suite == "lemma9":
        return [p(lemma9_task, i, n, level, seed) for i in range(count)]
    if suite == "lemma15":
        return [p(lemma15_task, i, n, level, seed) for i in range(count)]
    if suite == "mainlemma":
        return [p(mainlemma_task, i, n, level, seed, a_frac) for i in range(count)]
    if suite == "geometry":
        return ([p(geometry_global_task, 0, domain, n, seed)]
                + [p(geometry_identity_task, i, domain, n, seed) for i in range(1, count + 1)])
    if suite == "qc":
        return ([p(cross_task, i, n, seed) for i in range(count)]
                + [p(composed_task, i, n, seed) for i in range(10)]
                + [p(jacobian_task, i, n, seed) for i in range(3)]
                + [p(mori_task, i, n, seed) for i in range(4)])
    raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")


def _call(task):
    return task()


def run_tasks(tasks, jobs=1):
    """Run tasks (in parallel when jobs > 1); results keep task order."""
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_call, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        chunks = [task() for task in tasks]
    return [report for chunk in chunks for report in chunk]
