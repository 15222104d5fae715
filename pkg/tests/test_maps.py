import numpy as np
import pytest

from poissonball.core import InputError, operator_norm
from poissonball.maps import (PoissonCertificate, certify, constant_laplacian_certificate,
                              dilation, identity, linear_map, mobius, plane_wave, quadratic_map,
                              radial_stretch, random_ball_points, random_quadratic,
                              random_sphere_points, squared_norm, sup_bound)
from poissonball.potential import SmoothMap


def fd_version(u):
    return SmoothMap(u.n, u.m, u._value, h_lap=1e-3)


@pytest.mark.parametrize("make", [
    lambda r: random_quadratic(3, 2, r),
    lambda r: random_quadratic(4, 1, r, harmonic=True),
    lambda r: radial_stretch(3, 0.6),
    lambda r: radial_stretch(4, 1.7),
    lambda r: plane_wave(r.standard_normal(3)),
])
def test_analytic_derivatives_match_differences(make, rng):
    u = make(rng)
    ref = fd_version(u)
    X = random_ball_points(u.n, 10, rng) * 0.8 + 0.1
    np.testing.assert_allclose(u.grad(X), ref.grad(X), atol=1e-7)
    np.testing.assert_allclose(u.lap(X), ref.lap(X), atol=5e-5)


def test_quadratic_map_shape_check():
    with pytest.raises(InputError):
        quadratic_map(np.zeros((3, 3)))


def test_random_quadratic_is_bounded(rng):
    for harmonic in (True, False):
        u = random_quadratic(3, 2, rng, harmonic=harmonic, sup=0.9)
        assert sup_bound(u) == pytest.approx(0.9)
        X = np.concatenate([random_ball_points(3, 2000, rng), random_sphere_points(3, 2000, rng)])
        assert np.linalg.norm(u(X), axis=1).max() <= 0.9
        if harmonic:
            np.testing.assert_allclose(u.lap(X[:5]), 0.0, atol=1e-14)


def test_constant_laplacian_certificate(rng):
    u = random_quadratic(3, 2, rng)
    cert = constant_laplacian_certificate(u, a=0.1)
    assert cert.b == pytest.approx(np.linalg.norm(u.lap(np.zeros(3))))
    sampled = certify(u, random_ball_points(3, 100, rng), a=0.1, b=cert.b)
    assert sampled.holds()


def test_certify_finds_smallest_b(rng):
    u = radial_stretch(3, 0.5)
    X = random_ball_points(3, 200, rng) * 0.5 + np.array([0.5, 0, 0])
    cert = certify(u, X, a=0.3)
    assert cert.holds() and cert.b >= 0
    assert not PoissonCertificate(0.3, cert.b * 0.5 - 1e-3, cert.sup_check + 1).holds()


def test_linear_maps():
    x = np.array([0.1, -0.2, 0.3])
    np.testing.assert_allclose(identity(3)(x), x)
    np.testing.assert_allclose(dilation(3, 2.0).grad(x), 2 * np.eye(3))
    u = linear_map([[1.0, 2.0, 0.0]], [0.5])
    assert u(x)[0] == pytest.approx(0.5 + 0.1 - 0.4)


def test_squared_norm():
    u = squared_norm(3, 0.5, 1.0)
    assert u(np.array([1.0, 0, 0]))[0] == pytest.approx(0.0)
    assert u.lap(np.zeros(3))[0] == pytest.approx(3.0)


def test_mobius_is_automorphism(rng):
    a = np.array([0.3, -0.2, 0.1])
    u = mobius(a)
    np.testing.assert_allclose(u(np.zeros(3)), -a, atol=1e-15)
    eta = random_sphere_points(3, 50, rng)
    np.testing.assert_allclose(np.linalg.norm(u(eta), axis=1), 1.0, atol=1e-12)
    X = random_ball_points(3, 50, rng, 0.95)
    assert np.all(np.linalg.norm(u(X), axis=1) < 1)
    # conformal: Jacobian is a multiple of an orthogonal matrix
    for A in u.grad(X[:5]):
        s = np.linalg.svd(A, compute_uv=False)
        assert s[0] / s[-1] == pytest.approx(1.0, abs=1e-7)


def test_radial_stretch_origin_and_norm():
    u = radial_stretch(3, 0.5)
    np.testing.assert_array_equal(u(np.zeros(3)), 0.0)
    x = np.array([0.0, 0.25, 0.0])
    assert np.linalg.norm(u(x)) == pytest.approx(0.5)
    assert operator_norm(u.grad(x)) == pytest.approx(0.25 ** -0.5)
