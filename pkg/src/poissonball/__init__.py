"""Poisson kernel, Green function and gradient-estimate checks on the unit ball.

Quadrature-based representation formulas for Lap u = g on B^n, numerical
verification of a priori gradient bounds for maps with
|Lap u| <= a |grad u|^2 + b, and the quasiconformal and distance-function
geometry used to transfer them to C^2 target domains.
"""

from .core import (DomainError, InputError, SingularityError, admissibility_threshold,
                   ball_volume, cross_product, green_constant, linear_distortion,
                   min_stretch, operator_norm, operator_norms, schwarz_constant,
                   surface_measure)
from .kernels import (green_function, green_function_gradient, poisson_kernel,
                      poisson_kernel_gradient)
from .quadrature import (BallRule, CapabilityError, SingularBallRule, SphereRule,
                         aligned_sphere_rule, build_ball_rule, build_singular_ball_rule,
                         build_sphere_rule, cached_rule, integrate, integrate_singular,
                         load_rule, save_rule)
from .potential import (BoundaryData, QuadratureAccuracyWarning, SmoothMap,
                        dirichlet_solution, gradient_representation, green_potential,
                        mean_value_residual, poisson_gradient, poisson_integral,
                        solve_dirichlet)
from .maps import PoissonCertificate, certify, constant_laplacian_certificate
from .estimates import (EstimateReport, MainLemmaParams, ParameterError, Substitution,
                        holder_seminorm, lemma_coefficients, main_lemma_bound,
                        modulus_of_continuity, search_theta, theorem_substitutions,
                        verify_energy_bound, verify_gradient_bound, verify_lemma9,
                        verify_lemma15, verify_main_lemma)
from .qcgeom import (BallDomain, DistortionReport, EllipsoidDomain, ProjectionError,
                     ball_domain, boundary_jacobian_bound, chi_compose,
                     cross_inequality_check, distance_identities, distortion,
                     ellipsoid_domain, mori_exponent_probe, parse_domain)

__all__ = [
    "DomainError",
    "InputError",
    "SingularityError",
    "admissibility_threshold",
    "ball_volume",
    "cross_product",
    "green_constant",
    "linear_distortion",
    "min_stretch",
    "operator_norm",
    "operator_norms",
    "schwarz_constant",
    "surface_measure",
    "green_function",
    "green_function_gradient",
    "poisson_kernel",
    "poisson_kernel_gradient",
    "BallRule",
    "CapabilityError",
    "SingularBallRule",
    "SphereRule",
    "aligned_sphere_rule",
    "build_ball_rule",
    "build_singular_ball_rule",
    "build_sphere_rule",
    "cached_rule",
    "integrate",
    "integrate_singular",
    "load_rule",
    "save_rule",
    "BoundaryData",
    "QuadratureAccuracyWarning",
    "SmoothMap",
    "dirichlet_solution",
    "gradient_representation",
    "green_potential",
    "mean_value_residual",
    "poisson_gradient",
    "poisson_integral",
    "solve_dirichlet",
    "PoissonCertificate",
    "certify",
    "constant_laplacian_certificate",
    "EstimateReport",
    "MainLemmaParams",
    "ParameterError",
    "Substitution",
    "holder_seminorm",
    "lemma_coefficients",
    "main_lemma_bound",
    "modulus_of_continuity",
    "search_theta",
    "theorem_substitutions",
    "verify_energy_bound",
    "verify_gradient_bound",
    "verify_lemma9",
    "verify_lemma15",
    "verify_main_lemma",
    "BallDomain",
    "DistortionReport",
    "EllipsoidDomain",
    "ProjectionError",
    "ball_domain",
    "boundary_jacobian_bound",
    "chi_compose",
    "cross_inequality_check",
    "distance_identities",
    "distortion",
    "ellipsoid_domain",
    "mori_exponent_probe",
    "parse_domain",
]

__version__ = "0.1.0"
