"""Gradient of bounded harmonic functions at the centre of the ball.

For |f| <= 1 on the sphere the harmonic extension satisfies
|grad P[f](0)| <= gamma_n, and data equal to the sign of one coordinate
comes arbitrarily close.  This script prints gamma_n next to the value
reached by that extremal data at increasing quadrature levels, and the
best value found over smooth random data.

    python3 demos/schwarz_constant.py
"""

import numpy as np

from poissonball import BoundaryData, poisson_gradient, schwarz_constant
from poissonball.maps import random_sphere_points


def hemisphere(n):
    return BoundaryData(n, 1, lambda E: np.sign(E[:, -1])[:, None])


def ridge(v, k):
    return BoundaryData(v.size, 1, lambda E: np.tanh(k * (E @ v))[:, None])


def main():
    rng = np.random.default_rng(0)
    for n in (3, 4, 5):
        gn = schwarz_constant(n)
        print(f"n = {n}: gamma_n = {gn:.6f}, sqrt(n) = {np.sqrt(n):.6f}")
        for level in (4, 8, 12, 16):
            g = np.linalg.norm(poisson_gradient(hemisphere(n), np.zeros(n), level))
            print(f"  hemisphere data, level {level:2d}: {g:.6f}")
        best = max(np.linalg.norm(poisson_gradient(ridge(v, k), np.zeros(n), 12))
                   for v in random_sphere_points(n, 30, rng) for k in (1.0, 4.0, 8.0))
        print(f"  best tanh ridge (k <= 8):  {best:.6f}")


if __name__ == "__main__":
    main()
