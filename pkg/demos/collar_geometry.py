"""Distance function of an ellipsoid and the composed function chi = -d(u).

Inside the collar of width 0.8 / kappa0 the Hessian of d has eigenvalues
-kappa_i / (1 - kappa_i d) and 0.  This script checks them against finite
differences at a few collar points, then composes d with a map that is
close to the identity and compares the chain-rule Laplacian of chi with
second differences.

    python3 demos/collar_geometry.py
"""

import numpy as np

from poissonball import EllipsoidDomain, chi_compose, distance_identities
from poissonball.maps import mobius
from poissonball.potential import SmoothMap


def main():
    rng = np.random.default_rng(1)
    dom = EllipsoidDomain([1.2, 1.05, 0.9])
    print(f"{dom!r}: kappa0 = {dom.kappa0:.4f}, collar width = {dom.collar:.4f}")
    for x in dom.sample_collar(5, rng):
        r = distance_identities(dom, x)
        print(f"  d = {r.params['d']:.4f}  kappa = {np.round(r.params['kappa'], 4)}  "
              f"worst identity error = {r.lhs:.1e}")

    u = mobius([0.2, 0.0, 0.1])
    chi = chi_compose(u, dom)
    X = dom.sample_collar(400, rng)
    X = X[(dom.signed_distance(u(X)) > 0.05) & (dom.signed_distance(u(X)) < 0.9 * dom.collar)][:5]
    fd = SmoothMap(3, 1, chi, h_lap=1e-3).lap(X)[:, 0]
    for x, exact, approx in zip(X, chi.lap(X)[:, 0], fd):
        print(f"  x = {np.round(x, 3)}  Lap chi = {exact: .6f}  second differences = {approx: .6f}")


if __name__ == "__main__":
    main()
