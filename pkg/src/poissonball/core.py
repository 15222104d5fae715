"""Dimension-generic constants and small-matrix functionals.

Everything here operates on tiny dense arrays (n <= 8), so the
implementations favour clarity over speed.
"""

import math

import numpy as np


class DomainError(ValueError):
    """Argument lies outside the mathematical domain of an operation."""


class InputError(ValueError):
    """Malformed input (wrong shape, non-finite entries, ...)."""


class SingularityError(ArithmeticError):
    """A kernel was evaluated on (or numerically at) its singular set."""


def surface_measure(n):
    """Surface measure of the unit sphere S^{n-1} in R^n.

    Returns 2 pi^{n/2} / Gamma(n/2).
    """
    if int(n) != n or n < 2:
        raise DomainError(f"surface_measure needs an integer n >= 2, got {n!r}")
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def ball_volume(n):
    return surface_measure(n) / n


def green_constant(n):
    """Normalisation c_n = 1/((n-2) omega_{n-1}) of the ball Green function."""
    if int(n) != n or n <= 2:
        raise DomainError(f"green_constant needs n >= 3, got {n!r}")
    return 1.0 / ((n - 2) * surface_measure(n))


def schwarz_constant(n):
    """Sharp bound gamma_n for |grad H(0)| over harmonic H with |H| <= 1.

    gamma_n = 2 Gamma(1 + n/2) / (sqrt(pi) Gamma((n + 1)/2)), which is
    strictly smaller than sqrt(n).
    """
    if int(n) != n or n < 2:
        raise DomainError(f"schwarz_constant needs n >= 2, got {n!r}")
    g = 2.0 * math.gamma(1 + n / 2) / (math.sqrt(math.pi) * math.gamma((n + 1) / 2))
    assert g < math.sqrt(n)
    return g


def admissibility_threshold(n):
    """Threshold C_n on the quadratic coefficient a of |Lap u| <= a|grad u|^2 + b.

    Below it the gradient estimate does not depend on u.  Satisfies
    C_n * 4 n gamma_n / (n + 1) == 1.
    """
    if int(n) != n or n < 3:
        raise DomainError(f"admissibility_threshold needs n >= 3, got {n!r}")
    return ((n + 1) * math.sqrt(math.pi) * math.gamma((n + 1) / 2)
            / (8 * n * math.gamma(n / 2 + 1)))


def _as_matrix(A):
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2:
        raise InputError(f"expected a matrix, got array of shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix has non-finite entries")
    return A


def _gram_eigenvalues(A):
    # eigenvalues of A^t A in ascending order, clipped at 0 against roundoff
    return np.clip(np.linalg.eigvalsh(A.T @ A), 0.0, None)


def operator_norm(A):
    """|A| = max{|Ax| : |x| = 1}, the largest singular value."""
    A = _as_matrix(A)
    return float(math.sqrt(_gram_eigenvalues(A)[-1]))


def operator_norms(stack):
    """Largest singular value of every matrix in a (..., m, n) stack."""
    return np.linalg.norm(np.asarray(stack, dtype=float), ord=2, axis=(-2, -1))


def min_stretch(A):
    """l(A) = inf{|Ax| : |x| = 1} for a square matrix A."""
    A = _as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise InputError(f"min_stretch needs a square matrix, got {A.shape}")
    return float(math.sqrt(_gram_eigenvalues(A)[0]))


def linear_distortion(A):
    """Smallest K with |A|^n / K <= |det A| <= K l(A)^n.

    Returns inf for a singular matrix.
    """
    A = _as_matrix(A)
    n = A.shape[0]
    J = abs(float(np.linalg.det(A)))
    big, small = operator_norm(A), min_stretch(A)
    if J == 0.0 or small == 0.0:
        return math.inf
    return max(big ** n / J, J / small ** n, 1.0)


def cross_product(*vectors):
    """Generalised cross product of n-1 vectors in R^n.

    Component i is the signed cofactor obtained by expanding the
    determinant whose rows are v_1, ..., v_{n-1} and, last, the standard
    basis vectors.  For n = 3 this is the right-hand-rule product.

    Accepts either n-1 separate vectors or a single (n-1, n) array.
    """
    if len(vectors) == 1:
        V = np.asarray(vectors[0], dtype=float)
    else:
        V = np.array([np.asarray(v, dtype=float) for v in vectors])
    if V.ndim != 2 or V.shape[0] != V.shape[1] - 1:
        raise InputError(f"need n-1 vectors of length n, got shape {V.shape}")
    n = V.shape[1]
    out = np.empty(n)
    for i in range(n):
        minor = np.delete(V, i, axis=1)
        # (-1)^{n+i} with 1-based row n and column i+1
        out[i] = (-1) ** (n + i + 1) * np.linalg.det(minor)
    return out
