import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from poissonball.core import DomainError, admissibility_threshold, schwarz_constant
from poissonball.estimates import (EstimateReport, MainLemmaParams, ParameterError,
                                   check_chain_rule, check_substitution_inequality,
                                   holder_seminorm, lemma_coefficients, main_lemma_bound,
                                   modulus_of_continuity, search_theta, theorem_substitutions,
                                   verify_energy_bound, verify_gradient_bound, verify_lemma9,
                                   verify_lemma15, verify_main_lemma)
from poissonball.maps import (PoissonCertificate, constant_laplacian_certificate, coordinate,
                              linear_map, random_ball_points, random_quadratic,
                              random_sphere_points, squared_norm)
from poissonball.potential import BoundaryData, SmoothMap


def constant_map(n, c):
    return linear_map(np.zeros((1, n)), [c], name="constant")


# -- reports and substitutions ---------------------------------------------------------

def test_report_pass_semantics():
    assert EstimateReport("x", 3, 1.0, 1.0).passed
    assert EstimateReport("x", 3, 1.0 + 5e-7, 1.0).passed
    assert not EstimateReport("x", 3, 1.0 + 5e-6, 1.0).passed
    assert not EstimateReport("x", 3, 1.0, math.nan).passed
    assert EstimateReport("x", 3, 1.0, math.inf).passed
    row = EstimateReport("x", 3, 0.5, 1.0, {"v": np.arange(2)}).row()
    assert row["params"] == '{"v": [0, 1]}' and row["pass"] == 1 and row["margin"] == "0.5"


def test_substitution_constants():
    assert theorem_substitutions("squared_modulus", 0.0, 1.5) == (2.0, 2.0, 3.0)
    s = theorem_substitutions("exponential", 0.5, 2.0)
    assert s.alpha == pytest.approx(math.e)
    assert s.beta == pytest.approx(0.5 / math.e)
    assert s.gamma == pytest.approx(2.0 * math.e)
    with pytest.raises(ParameterError):
        theorem_substitutions("squared_modulus", 1.0, 0.0)
    with pytest.raises(ParameterError):
        theorem_substitutions("exponential", 0.0, 0.0)
    with pytest.raises(ParameterError):
        theorem_substitutions("cubic", 0.1, 0.0)


def test_chain_rule_squared_modulus():
    u = squared_norm(3, 1.0)
    for x in (np.array([0.1, 0.2, 0.3]), np.array([-0.4, 0.0, 0.5])):
        assert check_chain_rule(u, x).passed


def test_chain_rule_exponential(rng):
    chi = random_quadratic(3, 1, rng)
    assert check_chain_rule(chi, np.array([0.2, -0.1, 0.3]), "exponential", a=0.7).passed


@pytest.mark.parametrize("kind,a", [("squared_modulus", 0.3), ("exponential", 1.0)])
def test_substitution_inequality(kind, a, rng):
    u = random_quadratic(3, 2 if kind == "squared_modulus" else 1, rng)
    cert = constant_laplacian_certificate(u, a)
    assert check_substitution_inequality(u, kind, a, cert.b, random_ball_points(3, 300, rng)).passed


# -- energy and gradient bounds ------------------------------------------------------------

def test_energy_bound_constant_map():
    r = verify_energy_bound(constant_map(3, 0.4), np.zeros(3), 0.5, 0.25,
                            theorem_substitutions("squared_modulus", 0.0, 0.0))
    assert r.lhs == 0.0 and r.passed


def test_energy_bound_harmonic_coordinate():
    u = coordinate(3)
    r = verify_energy_bound(u, np.zeros(3), 0.5, 0.25,
                            theorem_substitutions("squared_modulus", 0.0, 0.0))
    # c_3 * volume of B(0, 1/4) and the closed-form right side with max |y_1| = 1/2
    assert r.lhs == pytest.approx((4 * math.pi / 3 * 0.25 ** 3) / (4 * math.pi), rel=1e-12)
    # (1/8) / (1/4) * 1.05 * sampled max |y_1| with the true max 1/2
    assert 0.26 <= r.rhs <= 0.5 * 1.05 * 0.5
    assert r.passed


def test_energy_bound_square_norm(rng):
    u = squared_norm(3, 1.0)
    sub = theorem_substitutions("squared_modulus", 0.0, 6.0)
    for _ in range(50):
        x = random_ball_points(3, 1, rng, 0.4)[0]
        rho = rng.uniform(0.1, 0.95 - np.linalg.norm(x))
        assert verify_energy_bound(u, x, rho, rho * rng.uniform(0.1, 0.9), sub).passed


def test_energy_bound_parameter_errors():
    sub = theorem_substitutions("squared_modulus", 0.0, 0.0)
    with pytest.raises(ParameterError):
        verify_energy_bound(coordinate(3), np.zeros(3), 0.3, 0.3, sub)
    with pytest.raises(DomainError):
        verify_energy_bound(coordinate(3), np.array([0.5, 0, 0]), 0.6, 0.3, sub)


def test_gradient_bound_harmonic_coordinate():
    full, schwarz = verify_gradient_bound(coordinate(3), np.zeros(3), 0.9)
    assert full.lhs == pytest.approx(1.0)
    assert schwarz.rhs == pytest.approx(1.5 / 0.9, rel=1e-12)
    # (3/rho) * mean |rho eta_1| = 3 * 1/2
    # |eta_1| has a kink on the equator, so the rule is only accurate to about 1e-2
    assert full.rhs == pytest.approx(1.5, rel=2e-2)
    assert full.passed and schwarz.passed


def test_gradient_bound_constant_map():
    full, schwarz = verify_gradient_bound(constant_map(3, 0.3), np.zeros(3), 0.5, Z=[0.3])
    assert full.lhs == 0.0 and full.rhs == pytest.approx(0.0, abs=1e-15)
    assert schwarz.rhs == pytest.approx(schwarz_constant(3) / 0.5)


def test_gradient_bound_half_square_norm():
    Y = squared_norm(3, 0.5)
    x0 = np.array([0.2, 0, 0])
    full, schwarz = verify_gradient_bound(Y, x0, 0.3, Z=Y(x0))
    # source term: (1/omega) int (r^{-2} - r/rho^3) * 3 dy = 3 * (3/4) rho
    assert full.params["source_term"] == pytest.approx(9 * 0.3 / 4, rel=1e-12)
    assert full.passed and schwarz.passed


def test_gradient_bound_needs_unit_range():
    with pytest.raises(DomainError):
        verify_gradient_bound(squared_norm(3, 2.0), np.zeros(3), 0.9)


def test_harmonic_schwarz_form(rng):
    # with a = b = 0 the bound is |grad u(x0)| <= gamma_n / rho
    for _ in range(20):
        u = random_quadratic(4, 2, rng, harmonic=True)
        x0 = random_ball_points(4, 1, rng, 0.3)[0]
        _, schwarz = verify_gradient_bound(u, x0, 0.95 - np.linalg.norm(x0))
        assert schwarz.params["source_term"] < 1e-12 and schwarz.passed


# -- main lemma -----------------------------------------------------------------------------

def params(theta=0.3, K=0.5, d=0.7, eps=None):
    return MainLemmaParams(2.0, 1.5, 0.4, theta, math.sin(theta), d, 0.8, K, eps)


def test_main_lemma_params_validation():
    with pytest.raises(ParameterError):
        MainLemmaParams(2, 2, 0, 0.3, 0.3, 0.5, 0.8, 1.0)
    with pytest.raises(ParameterError):
        MainLemmaParams(2, 2, 0, 0.3, 0.4, 0.5, 0.8, 1.0)
    with pytest.raises(ParameterError):
        MainLemmaParams(2, 2, 0, 0.3, 0.2, 0.9, 0.8, 1.0)


def test_main_lemma_linear_limit():
    p = params()
    A, B = lemma_coefficients(p, PoissonCertificate(0.0, 0.3), 3)
    assert A == 0.0
    assert main_lemma_bound(p, PoissonCertificate(0.0, 0.3), 3) == pytest.approx(B)
    assert main_lemma_bound(p, PoissonCertificate(1e-12, 0.3), 3) == pytest.approx(B, rel=1e-9)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_small_theta_limit(n):
    a = 0.1
    cert = PoissonCertificate(a, 0.0)
    limit = 4 * a * n * schwarz_constant(n) / (n + 1)
    A, B = lemma_coefficients(params(theta=1e-6), cert, n)
    assert 4 * A * B == pytest.approx(limit, rel=1e-4)
    eps = 0.05
    A, B = lemma_coefficients(params(theta=1e-6, eps=eps), cert, n)
    assert 4 * A * B == pytest.approx(min(4 * a * eps * n * n / (n + 1), limit), rel=1e-4)


@given(st.floats(0.01, 0.2), st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 2.0),
       st.floats(0.0, 2.0), st.floats(0.01, 0.9))
def test_main_lemma_bound_monotone(a, b, db, K, dK, theta):
    n = 3
    lo = main_lemma_bound(params(theta, K), PoissonCertificate(a, b), n)
    hi_b = main_lemma_bound(params(theta, K), PoissonCertificate(a, b + db), n)
    hi_K = main_lemma_bound(params(theta, K + dK), PoissonCertificate(a, b), n)
    if lo is None:
        assert hi_b is None and hi_K is None
        return
    for hi in (hi_b, hi_K):
        assert hi is None or hi >= lo * (1 - 1e-14)


@pytest.mark.parametrize("n", [3, 4])
def test_feasibility_is_sharp_at_threshold(n):
    C = admissibility_threshold(n)
    for frac, feasible in [(0.5, True), (0.99, True), (0.999, True), (1.001, False),
                           (1.2, False)]:
        a = frac * C
        sub = theorem_substitutions("squared_modulus", a, 0.5)
        found = search_theta(PoissonCertificate(a, 0.5), n, sub, 0.8, 0.8, 0.5)
        assert (found is not None) == feasible, frac
        if found is not None:
            A, B = lemma_coefficients(found[0], PoissonCertificate(a, 0.5), n)
            assert 4 * A * B < 1


def test_above_threshold_with_large_epsilon_is_infeasible():
    n = 3
    a = 0.9
    sub = theorem_substitutions("squared_modulus", a, 0.1)
    assert search_theta(PoissonCertificate(a, 0.1), n, sub, 0.8, 0.8, 1.0, epsilon=10.0) is None


def test_small_epsilon_rescues_large_a():
    # the epsilon form of B allows any a once eps is small enough
    n = 3
    a = 2 * admissibility_threshold(n)
    eps = (n + 1) / (4 * a * n * n + 1)
    sub = theorem_substitutions("squared_modulus", a, 0.1)
    assert search_theta(PoissonCertificate(a, 0.1), n, sub, 0.8, 0.8, 0.5, epsilon=eps)


def test_golden_refinement_improves_grid():
    n, a = 3, 0.05
    cert = PoissonCertificate(a, 1.0)
    sub = theorem_substitutions("squared_modulus", a, 1.0)
    p, bound = search_theta(cert, n, sub, 0.8, 0.8, 0.5)
    grid = np.geomspace(1e-7, 0.999, 400)
    best_grid = min(main_lemma_bound(MainLemmaParams(*sub, t, math.sin(t), 0.8, 0.8, 0.5), cert, n)
                    or math.inf for t in grid)
    assert bound <= best_grid


def test_verify_main_lemma_harmonic_quadratic(rng):
    for n in (3, 4):
        u = random_quadratic(n, 2, rng)
        cert = constant_laplacian_certificate(u, 0.9 * admissibility_threshold(n))
        reports = verify_main_lemma(u, np.zeros(n), 1.0, cert)
        assert [r.name for r in reports] == ["main_lemma_M", "main_lemma_gradient"]
        assert all(r.passed for r in reports)
        assert reports[0].params["four_AB"] < 1


def test_verify_main_lemma_with_epsilon(rng):
    u = random_quadratic(3, 2, rng)
    cert = constant_laplacian_certificate(u, 0.1)
    reports = verify_main_lemma(u, np.zeros(3), 1.0, cert, epsilon=0.05)
    assert all(r.passed for r in reports)
    assert reports[0].params["theta"] <= modulus_of_continuity(u, 0.05)


def test_verify_main_lemma_reports_infeasible(rng):
    u = random_quadratic(3, 2, rng)
    cert = constant_laplacian_certificate(u, 0.5)
    (r,) = verify_main_lemma(u, np.zeros(3), 1.0, cert)
    assert r.params["feasible"] is False and not r.passed


# -- boundary comparison lemmas --------------------------------------------------------------

def test_lemma9_harmonic_equality(rng):
    u = random_quadratic(3, 2, rng, harmonic=True)
    for _ in range(5):
        t = random_sphere_points(3, 1, rng)[0]
        x = random_ball_points(3, 1, rng, 0.8)[0]
        r = verify_lemma9(u, x, t, PoissonCertificate(0.0, 0.0))
        assert r.rhs == pytest.approx(r.lhs, abs=1e-12)


def test_lemma9_coordinate_closed_form():
    t = np.array([1.0, 0, 0])
    r = verify_lemma9(coordinate(3), 0.8 * t, t, PoissonCertificate(0.0, 0.0))
    assert r.lhs == pytest.approx(0.2) and r.rhs == pytest.approx(0.2, abs=1e-12)
    r = verify_lemma9(coordinate(3), 0.8 * t, t, PoissonCertificate(0.25, 0.0))
    # Y = 0.8, F = P[eta_1^2](x) = 1/3 + (2/3) * 0.64
    F = 1 / 3 + 2 / 3 * 0.64
    assert r.rhs == pytest.approx(0.75 / 0.5 * 0.2 + 0.25 / 1.0 * abs(F - 1), abs=1e-12)


def test_lemma9_square_norm_family(rng):
    for _ in range(100):
        scale, shift = rng.uniform(0.1, 0.5), rng.uniform(0, 1)
        u = squared_norm(3, scale, shift)
        cert = PoissonCertificate(rng.uniform(0, 0.45), 6 * scale)
        t = random_sphere_points(3, 1, rng)[0]
        x = random_ball_points(3, 1, rng, 0.9)[0]
        assert verify_lemma9(u, x, t, cert).passed


def test_lemma9_rejects_large_a():
    with pytest.raises(ParameterError):
        verify_lemma9(coordinate(3), np.zeros(3), np.eye(3)[0], PoissonCertificate(0.5, 0.0))


def test_lemma15_small_a_expansion(rng):
    # h^{+-} = exp(+-a chi) + O(a^2) for harmonic chi, so rhs / lhs -> 2
    chi = random_quadratic(3, 1, rng, harmonic=True)
    t = np.array([0.0, 1.0, 0.0])
    x = np.array([0.1, 0.5, -0.2])
    r = verify_lemma15(chi, x, t, PoissonCertificate(1e-3, 0.0))
    assert r.rhs / r.lhs == pytest.approx(2.0, rel=1e-2)


def test_lemma15_constant():
    chi = constant_map(3, 0.3)
    x = np.array([0.2, 0.1, 0.0])
    for a in (0.5, 1.0):
        r = verify_lemma15(chi, x, np.eye(3)[0], PoissonCertificate(a, 1.0))
        assert r.lhs == 0.0
        assert r.rhs == pytest.approx(2 / 3 * math.exp(2 * a) * (1 - np.linalg.norm(x)),
                                      rel=1e-10)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_lemma15_half_square_norm(a, rng):
    chi = squared_norm(3, 0.5, 1.0)
    for _ in range(100):
        t = random_sphere_points(3, 1, rng)[0]
        x = random_ball_points(3, 1, rng, 0.9)[0]
        assert verify_lemma15(chi, x, t, PoissonCertificate(a, 3.0)).passed


def test_lemma15_errors():
    with pytest.raises(ParameterError):
        verify_lemma15(coordinate(3), np.zeros(3), np.eye(3)[0], PoissonCertificate(0.0, 0.0))
    with pytest.raises(ParameterError):
        verify_lemma15(random_quadratic(3, 2, np.random.default_rng(0)), np.zeros(3),
                       np.eye(3)[0], PoissonCertificate(1.0, 0.0))


# -- boundary regularity ---------------------------------------------------------------------

def test_holder_constant():
    f = BoundaryData(3, 1, lambda E: np.full(len(E), -0.7))
    assert holder_seminorm(f, 0.5) == pytest.approx(0.7)
    assert holder_seminorm(BoundaryData.from_map(constant_map(3, -0.7)), 0.5) == pytest.approx(0.7)


def test_holder_coordinate():
    est = holder_seminorm(BoundaryData.from_map(coordinate(3)), 0.5, samples=2000)
    assert 2 - 2e-2 <= est <= 2


def test_holder_tangential_convention():
    # without an extension the tangential gradient e_1 - eta_1 eta is used; it is not constant
    est = holder_seminorm(BoundaryData(3, 1, lambda E: E[:, 0]), 1.0)
    assert est > 2


def test_holder_monotone_in_samples():
    f = BoundaryData.from_map(random_quadratic(3, 2, np.random.default_rng(3)))
    values = [holder_seminorm(f, 0.7, samples=k) for k in (10, 50, 100, 400)]
    assert values == sorted(values)


def test_holder_bounds_lipschitz_quotient(rng):
    u = random_quadratic(3, 2, rng)
    K = holder_seminorm(BoundaryData.from_map(u), 0.5)
    X, Y = random_sphere_points(3, 10_000, rng), random_sphere_points(3, 10_000, rng)
    lhs = np.linalg.norm(u(X) - u(Y), axis=1)
    assert np.all(lhs <= K * np.linalg.norm(X - Y, axis=1))


def test_holder_alpha_range():
    with pytest.raises(ParameterError):
        holder_seminorm(BoundaryData.from_map(coordinate(3)), 0.0)


def test_modulus_of_continuity(rng):
    u = random_quadratic(3, 2, rng)
    deltas = [modulus_of_continuity(u, eps) for eps in (0.4, 0.2, 0.1, 0.05, 0.01)]
    assert all(d > 0 for d in deltas)
    assert deltas == sorted(deltas, reverse=True)
    # pairs closer than delta move by at most eps
    X = random_ball_points(3, 600, np.random.default_rng(0))
    V = u(X)
    close = np.linalg.norm(X[:, None] - X[None], axis=2) < deltas[2]
    assert np.all(np.linalg.norm(V[:, None] - V[None], axis=2)[close] <= 0.1)
