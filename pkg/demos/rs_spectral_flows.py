"""Ruijsenaars-Schneider particles: spectral data, the inverse map and the flows it linearizes.

Run: python demos/rs_spectral_flows.py
"""

import numpy as np

from baeflows.rs_hierarchy import lax_flow_check
from baeflows.rs_spectral import (
    PhasePoint,
    aligned_points,
    direct_transform,
    hamiltonians,
    inverse_transform,
    lax_matrix,
)


def main():
    p = PhasePoint((0.3 + 0.1j, 2.7 - 0.2j, -3.1 + 0.05j), (1.1, -0.7 + 0.2j, 0.6))
    L = lax_matrix(p)
    print("Lax matrix eigenvalues:", np.round(np.linalg.eigvals(L), 6))

    s = direct_transform(p)
    print("spectral data mu:", np.round(s.mu, 6))
    print("spectral data a: ", np.round(s.a, 6))

    _, q = inverse_transform(s)
    up, gp, uq, gq = aligned_points(p, q)
    print(f"round trip error in positions {np.abs(uq - up).max():.1e}, in gamma {np.abs(gq - gp).max():.1e}")

    # the inverse map at nonzero times moves the particles; the traces of L^m stay put
    h0 = np.array(hamiltonians(L))
    for t1 in (0.25, 0.5, 1.0):
        _, pt = inverse_transform(s, (t1,))
        drift = np.abs(np.array(hamiltonians(lax_matrix(pt))) - h0).max()
        print(f"t1 = {t1}: positions {np.round(pt.numeric()[0], 4)}, trace drift {drift:.1e}")

    for m in (1, 2):
        rep = lax_flow_check(s, m)
        print(f"flow {m}: dL/dt - [M, L] = {rep.lax_residual:.1e}, velocity residual {rep.velocity_residual:.1e}")


if __name__ == "__main__":
    main()
