"""Random phase-space points shared by the spectral and hierarchy tests."""

from fractions import Fraction

import numpy as np

from baeflows.rs_spectral import PhasePoint, lax_matrix


def random_exact_point(rng, k, span=12):
    while True:
        u = [Fraction(rng.randint(-span * 3, span * 3), rng.randint(1, 3)) for _ in range(k)]
        g = [Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 4)) for _ in range(k)]
        try:
            return PhasePoint(tuple(u), tuple(g))
        except ValueError:
            continue


def random_generic_point(rng, k, gap=1e-2):
    """Complex point whose Lax eigenvalues are well separated."""
    while True:
        u = np.array([complex(rng.uniform(-4, 4) * k, rng.uniform(-1, 1)) for _ in range(k)])
        g = np.array([complex(rng.uniform(0.3, 1.5) * rng.choice([-1, 1]), rng.uniform(-0.5, 0.5)) for _ in range(k)])
        diffs = np.abs(u[:, None] - u[None, :] + np.eye(k) * 10)
        if diffs.min() < 0.5 or np.abs(diffs - 1).min() < 0.3:
            continue
        p = PhasePoint(tuple(u), tuple(g))
        mu = np.linalg.eigvals(lax_matrix(p))
        sep = min((abs(a - b) for i, a in enumerate(mu) for b in mu[i + 1:]), default=1.0)
        if sep > gap * max(1.0, np.abs(mu).max()) and np.abs(mu).min() > 1e-2:
            return p
