"""Rational Ruijsenaars-Schneider phase space and its spectral transforms.

A phase point is (u, gamma) with Lax matrix L_ij = gamma_i / (u_i - u_j - 1).
The direct transform sends a point with simple Lax spectrum to (mu, a); the
inverse rebuilds y(x, t) = det T(x, t) and reads u, gamma from its roots.  The
extended transforms replace a_j by a subspace W_j of polynomials in
w = z - mu_j + 1 of degree < 2 m_j, which also covers multiple eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import null_space, subspace_angles

from .errors import (
    DegenerateSpectrum,
    NormalizationFailure,
    RankDeficiency,
    RootCollision,
    SingularSystem,
)
from .exactcore import Rat, cofactor_det, det, rat, scalar_from_json, scalar_to_json

CLUSTER_TOL = 1e-7


@dataclass(frozen=True)
class PhasePoint:
    """Positions u and residues gamma; entries are exact rationals or complex numbers."""

    u: tuple
    gamma: tuple

    def __post_init__(self):
        if len(self.u) != len(self.gamma):
            raise ValueError("u and gamma differ in length")
        object.__setattr__(self, "u", tuple(_scalar(v) for v in self.u))
        object.__setattr__(self, "gamma", tuple(_scalar(v) for v in self.gamma))
        if any(g == 0 for g in self.gamma):
            raise ValueError("gamma entries must be nonzero")
        for i in range(self.k):
            for j in range(self.k):
                if i != j and (self.u[i] == self.u[j] or self.u[i] == self.u[j] + 1):
                    raise ValueError("positions collide or differ by one")

    @property
    def k(self) -> int:
        return len(self.u)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Rat) for v in self.u + self.gamma)

    def numeric(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([complex(v) for v in self.u]), np.array([complex(v) for v in self.gamma])

    def to_json(self) -> dict:
        return {"u": [scalar_to_json(v) for v in self.u], "gamma": [scalar_to_json(v) for v in self.gamma]}

    @classmethod
    def from_json(cls, data: dict) -> "PhasePoint":
        return cls(tuple(scalar_from_json(v) for v in data["u"]), tuple(scalar_from_json(v) for v in data["gamma"]))


def _scalar(v: Any) -> Any:
    if isinstance(v, (complex, float, np.complexfloating, np.floating)):
        return complex(v)
    return rat(v)


@dataclass(frozen=True)
class GenericSpectrum:
    mu: tuple
    a: tuple

    def to_json(self) -> dict:
        return {"mu": [scalar_to_json(complex(v)) for v in self.mu], "a": [scalar_to_json(complex(v)) for v in self.a]}

    @classmethod
    def from_json(cls, data: dict) -> "GenericSpectrum":
        return cls(tuple(scalar_from_json(v) for v in data["mu"]), tuple(scalar_from_json(v) for v in data["a"]))


@dataclass(frozen=True)
class ExtendedSpectrum:
    """Distinct eigenvalues, multiplicities and subspace bases.

    ``W[j]`` is an (m_j, 2 m_j) array whose rows hold coefficients of
    polynomials in w = z - mu_j + 1, lowest power first.
    """

    mu: tuple
    m: tuple
    W: tuple = field(default_factory=tuple)

    @property
    def k(self) -> int:
        return sum(self.m)

    def to_json(self) -> dict:
        return {
            "mu": [scalar_to_json(complex(v)) for v in self.mu],
            "m": list(self.m),
            "W": [[[scalar_to_json(complex(v)) for v in row] for row in np.atleast_2d(Wj)] for Wj in self.W],
        }


# ---------------------------------------------------------------------------
# Lax matrix identities


def lax_matrix(p: PhasePoint):
    """Exact nested lists for rational points, a complex array otherwise."""
    if p.exact:
        return [[p.gamma[i] / (p.u[i] - p.u[j] - 1) for j in range(p.k)] for i in range(p.k)]
    u, g = p.numeric()
    return g[:, None] / (u[:, None] - u[None, :] - 1)


def displacement_residual(p: PhasePoint):
    """[U, L] - L - Gamma F, where F is the all-ones matrix."""
    L = lax_matrix(p)
    if p.exact:
        return [
            [(p.u[i] - p.u[j]) * L[i][j] - L[i][j] - p.gamma[i] for j in range(p.k)]
            for i in range(p.k)
        ]
    u, g = p.numeric()
    return (u[:, None] - u[None, :]) * L - L - g[:, None] * np.ones((p.k, p.k))


def closed_lax_determinant(p: PhasePoint):
    """prod gamma_i * prod_{i<j} (u_i-u_j)^2 / ((u_i-u_j)^2 - 1), the Cauchy product form."""
    out = rat(1) if p.exact else 1.0 + 0j
    for g in p.gamma:
        out = out * g
    for i in range(p.k):
        for j in range(i + 1, p.k):
            d = p.u[i] - p.u[j]
            out = out * d * d / (d * d - 1)
    return out


def lax_determinant(p: PhasePoint):
    return det(lax_matrix(p)) if p.exact else complex(np.linalg.det(lax_matrix(p)))


def lax_determinant_oracle(p: PhasePoint):
    return cofactor_det(lax_matrix(p)) if p.exact else cofactor_det(lax_matrix(p).tolist())


def rs_rhs(p: PhasePoint) -> tuple[list, list]:
    """Hamiltonian flow of H = sum gamma_i.

    du_i = gamma_i and dgamma_i = -sum_j gamma_i gamma_j (1/(d-1) + 1/(d+1) - 2/d)
    with d = u_i - u_j; this sign keeps tr L^m constant.
    """
    du = list(p.gamma)
    dg = []
    for i in range(p.k):
        acc = rat(0) if p.exact else 0j
        for j in range(p.k):
            if j != i:
                d = p.u[i] - p.u[j]
                acc = acc - p.gamma[i] * p.gamma[j] * (1 / (d - 1) + 1 / (d + 1) - 2 / d)
        dg.append(acc)
    return du, dg


def hamiltonians(L: np.ndarray, m_max: int = 3) -> list[complex]:
    """tr L^m for m = 1..m_max."""
    out = []
    P = np.eye(L.shape[0], dtype=complex)
    for _ in range(m_max):
        P = P @ L
        out.append(complex(np.trace(P)))
    return out


# ---------------------------------------------------------------------------
# generic direct transform


def _eigen(L: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu, V = np.linalg.eig(L)
    return mu, V


def _check_distinct(mu: np.ndarray, tol: float) -> None:
    scale = max(1.0, float(np.max(np.abs(mu))))
    for i in range(len(mu)):
        for j in range(i + 1, len(mu)):
            if abs(mu[i] - mu[j]) <= tol * scale:
                raise DegenerateSpectrum("Lax matrix has a repeated eigenvalue", witness=[complex(v) for v in mu])


def direct_transform(p: PhasePoint, tol: float = CLUSTER_TOL, consistency_tol: float = 1e-6) -> GenericSpectrum:
    """Eigenvalues mu and the constants a_j from the resolvent expansion at z = mu_j - 1."""
    u, g = p.numeric()
    L = np.asarray(lax_matrix(p), dtype=complex) if p.exact else lax_matrix(p)
    mu, V = _eigen(L)
    _check_distinct(mu, tol)
    coords = np.linalg.solve(V, g)
    a = []
    for j in range(p.k):
        nu = V[:, j].sum()
        if abs(nu) <= 1e-12 * np.linalg.norm(V[:, j]):
            raise NormalizationFailure("eigenvector coordinates sum to zero", witness=j)
        c = -mu[j] * V[:, j] / nu
        residue = V[:, j] * coords[j]
        if not np.allclose(c, residue, rtol=consistency_tol, atol=consistency_tol * np.abs(c).max()):
            raise NormalizationFailure("resolvent residue is not the normalized eigenvector", witness=j)
        d = np.zeros(p.k, dtype=complex)
        for l in range(p.k):
            if l != j:
                d += V[:, l] * coords[l] / (mu[j] - mu[l])
        i = int(np.argmax(np.abs(c)))
        aj = -(d[i] + u[i] * c[i] / mu[j]) / c[i]
        big = np.abs(c) > 1e-3 * np.abs(c).max()
        others = -(d[big] + u[big] * c[big] / mu[j]) / c[big]
        if np.max(np.abs(others - aj)) > consistency_tol * max(1.0, abs(aj)):
            raise NormalizationFailure("a_j differs across components", witness=(j, others.tolist()))
        a.append(complex(aj))
    return GenericSpectrum(tuple(complex(m) for m in mu), tuple(a))


# ---------------------------------------------------------------------------
# generic inverse transform


def _time_shift(mu: complex, t: Sequence[complex]) -> complex:
    return sum(s * ts * (mu - 1) ** (s - 1) for s, ts in enumerate(t, start=1))


def t_matrix(s: GenericSpectrum, x: complex, t: Sequence[complex] = ()) -> np.ndarray:
    mu = np.asarray(s.mu, dtype=complex)
    k = len(mu)
    T = np.zeros((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            T[i, j] = s.a[i] + x / mu[i] + _time_shift(mu[i], t) if i == j else 1 / (mu[i] - mu[j])
    return T


def _principal_minor_sum(T: np.ndarray) -> complex:
    k = T.shape[0]
    if k == 1:
        return 1.0 + 0j
    idx = np.arange(k)
    return complex(sum(np.linalg.det(T[np.ix_(idx != i, idx != i)]) for i in range(k)))


def inverse_transform(s: GenericSpectrum, t: Sequence[complex] = (), tol: float = 1e-9) -> tuple[Polynomial, PhasePoint]:
    """y(x) = det T(x, t); u are its roots and gamma_i = -d_{t1} y / y' at u_i."""
    mu = np.asarray(s.mu, dtype=complex)
    k = len(mu)
    if len(set(np.round(mu, 14))) != k:
        raise DegenerateSpectrum("spectrum has repeated entries")
    B = t_matrix(s, 0.0, t)
    roots = np.linalg.eigvals(-np.diag(mu) @ B)
    lead = complex(np.prod(1 / mu))
    y = Polynomial(np.poly(roots)[::-1] * lead)
    _check_roots(roots, tol)
    gamma = []
    for i, ui in enumerate(roots):
        dy = lead * np.prod([ui - roots[l] for l in range(k) if l != i])
        dt = _principal_minor_sum(t_matrix(s, ui, t))
        gamma.append(-dt / dy)
    return y, PhasePoint(tuple(complex(r) for r in roots), tuple(complex(g) for g in gamma))


def _check_roots(roots: np.ndarray, tol: float) -> None:
    scale = max(1.0, float(np.max(np.abs(roots)))) if len(roots) else 1.0
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            d = roots[i] - roots[j]
            if min(abs(d), abs(d - 1), abs(d + 1)) <= tol * scale:
                raise RootCollision("reconstructed positions coincide or differ by one", witness=[complex(r) for r in roots])


def gamma_finite_difference(s: GenericSpectrum, t: Sequence[complex] = (), h: float = 1e-6) -> PhasePoint:
    """gamma by central differences of the roots in t1; a cross-check of the implicit formula."""
    t = list(t) + [0] * max(0, 1 - len(t))
    _, base = inverse_transform(s, t)
    tp, tm = list(t), list(t)
    tp[0] += h
    tm[0] -= h
    _, plus = inverse_transform(s, tp)
    _, minus = inverse_transform(s, tm)
    up, um = match_order(base.u, plus.u), match_order(base.u, minus.u)
    g = [(a - b) / (2 * h) for a, b in zip(up, um)]
    return PhasePoint(base.u, tuple(g))


def match_order(reference: Sequence, values: Sequence) -> list:
    """Permute ``values`` so each entry sits next to its nearest reference entry."""
    rest = [complex(v) for v in values]
    out = []
    for r in reference:
        i = min(range(len(rest)), key=lambda j: abs(rest[j] - complex(r)))
        out.append(rest.pop(i))
    return out


def aligned_points(p: PhasePoint, q: PhasePoint) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(u_p, g_p, u_q, g_q) with q reordered to match p."""
    up, gp = p.numeric()
    uq, gq = q.numeric()
    order = []
    rest = list(range(len(uq)))
    for v in up:
        i = min(rest, key=lambda j: abs(uq[j] - v))
        rest.remove(i)
        order.append(i)
    return up, gp, uq[order], gq[order]


# ---------------------------------------------------------------------------
# extended transforms


def cluster_eigenvalues(values: Sequence[complex], tol: float = CLUSTER_TOL) -> list[tuple[complex, int]]:
    """Group eigenvalues lying within a relative distance tol; return (mean, multiplicity)."""
    vals = [complex(v) for v in values]
    scale = max(1.0, max(abs(v) for v in vals)) if vals else 1.0
    clusters: list[list[complex]] = []
    for v in vals:
        for c in clusters:
            if any(abs(v - w) <= tol * scale for w in c):
                c.append(v)
                break
        else:
            clusters.append([v])
    return [(complex(np.mean(c)), len(c)) for c in clusters]


def _binomial_series(x: complex, mu: complex, order: int) -> np.ndarray:
    """Coefficients of (1 + w/mu)^x in w up to w^order."""
    out = np.zeros(order + 1, dtype=complex)
    term = 1.0 + 0j
    for r in range(order + 1):
        out[r] = term
        term = term * (x - r) / ((r + 1) * mu)
    return out


def _series_mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    return np.convolve(a, b)[: order + 1]


def _hat_lax_det(u: np.ndarray, g: np.ndarray, x: complex, z: complex) -> complex:
    k = len(u)
    L = g[:, None] / (u[:, None] - u[None, :] - 1)
    H = np.zeros((k + 1, k + 1), dtype=complex)
    H[0, 0] = 1
    H[0, 1:] = 1 / (x - u)
    H[1:, 0] = -g
    H[1:, 1:] = (1 + z) * np.eye(k) - L
    return complex(np.linalg.det(H))


def _taylor_in_w(u: np.ndarray, g: np.ndarray, x: complex, mu: complex, order: int) -> np.ndarray:
    """Coefficients of det Lhat(x, mu - 1 + w), a polynomial of degree k in w."""
    k = len(u)
    npts = k + 1
    radius = 1.0
    nodes = radius * np.exp(2j * np.pi * np.arange(npts) / npts)
    vals = np.array([_hat_lax_det(u, g, x, mu - 1 + w) for w in nodes])
    coeffs = np.fft.fft(vals) / npts / radius ** np.arange(npts)
    out = np.zeros(order + 1, dtype=complex)
    out[: min(order + 1, npts)] = coeffs[: min(order + 1, npts)]
    return out


def _other_cluster_factor(mus: Sequence[complex], ms: Sequence[int], j: int, order: int) -> np.ndarray:
    """Series in w of prod_{l != j} (w + mu_j - mu_l)^(-m_l), the local normalizer at cluster j."""
    out = np.zeros(order + 1, dtype=complex)
    out[0] = 1
    for l, (mu_l, m_l) in enumerate(zip(mus, ms)):
        if l == j:
            continue
        c = mus[j] - mu_l
        inv = np.array([(-1) ** r / c ** (r + 1) for r in range(order + 1)], dtype=complex)
        for _ in range(m_l):
            out = _series_mul(out, inv, order)
    return out


def _sample_points(u: np.ndarray, count: int) -> list[complex]:
    """Non-integer sample positions away from the poles x = u_i."""
    base = [0.37 + 0.61 * i + 0.23j * ((-1) ** i) for i in range(count)]
    return [x + 0.5 if np.min(np.abs(x - u), initial=np.inf) < 0.1 else x for x in base]


def extended_direct(p: PhasePoint, tol: float = CLUSTER_TOL, rank_tol: float = 1e-7,
                    clusters: Sequence[tuple[complex, int]] | None = None) -> ExtendedSpectrum:
    """Subspaces W_j of C[w]_{2 m_j} annihilating every residue res g Psi_j / w^{2 m_j}.

    Psi_j is Psi = det Lhat (1+z)^x divided by the factors (z - mu_l + 1)^{m_l}
    of det L(z) for the other clusters l != j.  These are holomorphic and
    nonvanishing at z = mu_j - 1, so they only rescale W_j by an invertible
    multiplication, and with them the generic subspace is exactly
    span{a_j w + 1}.

    ``clusters`` may supply known (mu_j, m_j) pairs, e.g. from an exact
    characteristic polynomial, instead of numeric clustering.
    """
    u, g = p.numeric()
    L = np.asarray(lax_matrix(p), dtype=complex) if p.exact else lax_matrix(p)
    if clusters is None:
        clusters = cluster_eigenvalues(np.linalg.eigvals(L), tol)
    all_mu = [complex(c[0]) for c in clusters]
    all_m = [int(c[1]) for c in clusters]
    mus, ms, Ws = [], [], []
    for j, (mu, m) in enumerate(clusters):
        order = 2 * m - 1
        norm = _other_cluster_factor(all_mu, all_m, j, order)
        rows = []
        for x in _sample_points(u, 2 * m + 2 * p.k):
            E = _series_mul(_binomial_series(x, mu, order), norm, order)
            P = _taylor_in_w(u, g, x, mu, order)
            EP = _series_mul(E, P, order)
            # g(w) = sum_s g_s w^s pairs with the coefficient of w^(2m-1-s) in E*P
            rows.append([EP[order - s] for s in range(2 * m)])
        A = np.array(rows)
        A = A / np.linalg.norm(A, axis=1, keepdims=True)
        sv = np.linalg.svd(A, compute_uv=False)
        nullity = int(np.sum(sv <= rank_tol * sv[0]))
        if nullity != m:
            raise RankDeficiency(f"nullspace has dimension {nullity}, expected {m}", witness=sv.tolist())
        basis = null_space(A, rcond=rank_tol).T
        mus.append(complex(mu))
        ms.append(m)
        Ws.append(basis)
    return ExtendedSpectrum(tuple(mus), tuple(ms), tuple(Ws))


def generic_subspace(a_j: complex) -> np.ndarray:
    """Row basis of span{a_j w + 1}."""
    return np.array([[1.0 + 0j, complex(a_j)]])


def subspace_angle(A: np.ndarray, B: np.ndarray) -> float:
    """Largest principal angle between the row spaces of A and B."""
    return float(np.max(subspace_angles(np.atleast_2d(A).T, np.atleast_2d(B).T)))


def contains_vectors(W: np.ndarray, vectors: np.ndarray, tol: float = 1e-7) -> bool:
    """True when every row of ``vectors`` lies in the row space of W."""
    Q, _ = np.linalg.qr(np.atleast_2d(W).T)
    V = np.atleast_2d(vectors).T
    resid = V - Q @ (Q.conj().T @ V)
    return bool(np.linalg.norm(resid) <= tol * max(1.0, np.linalg.norm(V)))


def _exp_time_series(mu: complex, t: Sequence[complex], order: int) -> np.ndarray:
    """Coefficients in w of exp(sum t_j ((mu - 1 + w)^j - (mu - 1)^j))."""
    expo = np.zeros(order + 1, dtype=complex)
    for j, tj in enumerate(t, start=1):
        if tj == 0:
            continue
        for r in range(1, min(j, order) + 1):
            expo[r] += tj * math.comb(j, r) * (mu - 1) ** (j - r)
    out = np.zeros(order + 1, dtype=complex)
    out[0] = 1
    # exp of a series with zero constant term, by the recurrence r e_r = sum s f_s e_{r-s}
    for r in range(1, order + 1):
        out[r] = sum(s * expo[s] * out[r - s] for s in range(1, r + 1)) / r
    return out


def _binomial_poly_series(mu: complex, order: int) -> list[Polynomial]:
    """(1 + w/mu)^x coefficients in w as polynomials in x: binom(x, r) / mu^r."""
    out = []
    for r in range(order + 1):
        p = Polynomial([1.0 + 0j])
        for i in range(r):
            p = p * Polynomial([-i, 1.0])
        out.append(p / (math.factorial(r) * mu**r))
    return out


def _poly_det(M: list[list[Polynomial]]) -> Polynomial:
    """Determinant of a matrix of polynomials by expansion over column subsets."""
    k = len(M)
    dp = {0: Polynomial([1.0 + 0j])}
    for row in range(k):
        nxt: dict[int, Polynomial] = {}
        for mask, val in dp.items():
            higher = 0
            for col in reversed(range(k)):
                if mask >> col & 1:
                    higher += 1
                    continue
                sign = -1 if higher % 2 else 1
                term = val * M[row][col] * sign
                key = mask | (1 << col)
                nxt[key] = nxt[key] + term if key in nxt else term
        dp = nxt
    return dp[(1 << k) - 1]


def extended_system(s: ExtendedSpectrum, t: Sequence[complex] = (), shift: int = 0):
    """Polynomial-in-x matrix M and right side e with M xi = -e.

    Row (j, g) takes the coefficient of w^(2 m_j - 1 - shift) in
    g(w) E(x, w) z^(k-l); ``shift = 1`` gives the t1-derivative rows.
    """
    k = s.k
    M, e = [], []
    for j, (mu, m, W) in enumerate(zip(s.mu, s.m, s.W)):
        order = 2 * m - 1
        Ex = _binomial_poly_series(mu, order)
        Et = _series_mul(_exp_time_series(mu, t, order), _other_cluster_factor(s.mu, s.m, j, order), order)
        E = [sum((Ex[a] * Et[r - a] for a in range(r + 1)), Polynomial([0j])) for r in range(order + 1)]
        target = order - shift
        for gvec in np.atleast_2d(W):
            gE = [sum((gvec[sidx] * E[r - sidx] for sidx in range(min(r, len(gvec) - 1) + 1)), Polynomial([0j]))
                  for r in range(order + 1)]
            row = []
            for l in range(1, k + 1):
                zpow = _zpower(mu, k - l, order)
                row.append(sum((gE[target - r] * zpow[r] for r in range(target + 1)), Polynomial([0j])))
            zk = _zpower(mu, k, order)
            e.append(sum((gE[target - r] * zk[r] for r in range(target + 1)), Polynomial([0j])))
            M.append(row)
    if len(M) != k:
        raise SingularSystem("subspace dimensions do not add up to k")
    return M, e


def _zpower(mu: complex, n: int, order: int) -> np.ndarray:
    """(mu - 1 + w)^n in powers of w."""
    out = np.zeros(order + 1, dtype=complex)
    for r in range(min(n, order) + 1):
        out[r] = math.comb(n, r) * (mu - 1) ** (n - r)
    return out


def extended_inverse(s: ExtendedSpectrum, t: Sequence[complex] = (), tol: float = 1e-9) -> tuple[Polynomial, PhasePoint]:
    """y = det M from the subspace conditions; u its roots and gamma = d_{t1} u."""
    M, _ = extended_system(s, t)
    y = _poly_det(M).trim(tol=0)
    coef = y.coef
    scale = np.max(np.abs(coef)) if len(coef) else 0.0
    if scale == 0:
        raise SingularSystem("determinant vanishes identically")
    nz = np.nonzero(np.abs(coef) > 1e-12 * scale)[0]
    y = Polynomial(coef[: nz[-1] + 1])
    roots = y.roots()
    _check_roots(roots, tol)
    dM, _ = extended_system(s, t, shift=1)
    dy = y.deriv()
    gamma = []
    for ui in roots:
        A = np.array([[entry(ui) for entry in row] for row in M])
        D = np.array([[entry(ui) for entry in row] for row in dM])
        dt = 0j
        for r in range(len(A)):
            B = A.copy()
            B[r] = D[r]
            dt += np.linalg.det(B)
        gamma.append(-dt / dy(ui))
    return y, PhasePoint(tuple(complex(r) for r in roots), tuple(complex(g) for g in gamma))


def extended_from_generic(s: GenericSpectrum) -> ExtendedSpectrum:
    return ExtendedSpectrum(tuple(s.mu), (1,) * len(s.mu), tuple(generic_subspace(a) for a in s.a))


def monic_coefficients(y: Polynomial) -> np.ndarray:
    return y.coef / y.coef[-1]
