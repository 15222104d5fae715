"""Where the main gradient bound stops being available.

For a map with |Lap u| <= a |grad u|^2 + b the bound on
M = max (r0 - |x - x0|) |grad u| needs a parameter theta with 4AB < 1.
The smallest attainable 4AB tends to a / C_n as theta -> 0, so a
certificate exists exactly when a < C_n.  This script sweeps a / C_n and
prints the optimal theta, the value of 4AB and the resulting bound on M.

    python3 demos/admissibility_threshold.py
"""

from poissonball import (PoissonCertificate, admissibility_threshold, lemma_coefficients,
                         search_theta, theorem_substitutions)


def main(n=3, b=0.5, r0=0.8, K=0.5):
    C = admissibility_threshold(n)
    print(f"n = {n}, C_n = {C:.6f}, b = {b}, r0 = {r0}, K_max = {K}")
    print(f"{'a/C_n':>7} {'theta':>11} {'4AB':>9} {'bound on M':>12}")
    for frac in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999, 1.0, 1.05):
        a = frac * C
        cert = PoissonCertificate(a, b)
        found = search_theta(cert, n, theorem_substitutions("squared_modulus", a, b), r0, r0, K)
        if found is None:
            print(f"{frac:7.3f} {'-':>11} {'-':>9} {'infeasible':>12}")
            continue
        p, bound = found
        A, B = lemma_coefficients(p, cert, n)
        print(f"{frac:7.3f} {p.theta:11.3e} {4 * A * B:9.6f} {bound:12.4f}")


if __name__ == "__main__":
    main()
