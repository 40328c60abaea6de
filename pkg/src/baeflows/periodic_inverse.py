"""Periodic Bethe solutions from spectral matrices: chi-polynomials, Wronskians and determinant wave functions."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from sympy import QQ
from sympy.polys.rings import PolyElement

from .bethe import SolutionTuple, is_generic
from .errors import DegenerateA, NonGenericInput, NotNilpotent, PeriodicityFailure, SingularWronskian
from .exactcore import (
    DEFAULT_TIMES,
    binomial_poly,
    det,
    frac_field,
    gen,
    matmul,
    poly_from_json,
    poly_ring,
    poly_shift,
    poly_to_json,
    rank,
    rat,
    rat_to_str,
    x_ring,
)
from .rs_spectral import PhasePoint


def family_ring(M: int = DEFAULT_TIMES):
    return poly_ring(M, ("z",))


def _t(ring, j: int) -> PolyElement:
    return gen(ring, f"t{j}")


@lru_cache(maxsize=None)
def _h(n: int, M: int) -> PolyElement:
    """Coefficient of z^n in exp(t_1 z + ... + t_M z^M), by n h_n = sum_j j t_j h_{n-j}."""
    ring = family_ring(M)
    if n == 0:
        return ring.one
    acc = ring.zero
    for j in range(1, min(n, M) + 1):
        acc += j * _t(ring, j) * _h(n - j, M)
    return acc.quo_ground(QQ(n))


@lru_cache(maxsize=None)
def chi(n: int, M: int = DEFAULT_TIMES) -> PolyElement:
    """chi_n(x, t) = sum_k h_{n-k}(t) binom(x, k)."""
    if n < 0:
        raise ValueError("chi is indexed by n >= 0")
    ring = family_ring(M)
    return sum((_h(n - k, M) * binomial_poly(k, ring) for k in range(n + 1)), ring.zero)


@dataclass(frozen=True)
class SpectralMatrixA:
    N: int
    nu: int
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(rat(v) for v in r) for r in self.rows)
        if len(rows) != self.N + self.nu:
            raise ValueError(f"expected {self.N + self.nu} rows, got {len(rows)}")
        if len({len(r) for r in rows}) != 1:
            raise ValueError("rows have different lengths")
        object.__setattr__(self, "rows", rows)

    @property
    def D(self) -> int:
        return len(self.rows[0]) - 1

    def rank_profile(self) -> list[int]:
        return [rank([list(r) for r in self.rows[: n + self.nu]]) if n + self.nu else 0 for n in range(self.N + 1)]

    def is_nondegenerate(self) -> bool:
        return all(r == n + self.nu for n, r in enumerate(self.rank_profile()))

    def to_json(self) -> dict:
        return {"N": self.N, "nu": self.nu, "rows": [[rat_to_str(v) for v in r] for r in self.rows]}

    @classmethod
    def from_json(cls, data: dict) -> "SpectralMatrixA":
        nu = int(data.get("nu", 0))
        N = int(data.get("N", len(data["rows"]) - nu))
        return cls(N, nu, tuple(tuple(r) for r in data["rows"]))


@dataclass(frozen=True)
class NilpotentSeed:
    N: int
    nu: int
    W: tuple

    def __post_init__(self):
        W = tuple(tuple(rat(v) for v in r) for r in self.W)
        size = self.N + self.nu
        if len(W) != size or any(len(r) != size for r in W):
            raise ValueError(f"seed must be {size}x{size}")
        object.__setattr__(self, "W", W)

    @property
    def V(self) -> list[list]:
        return [list(r[: self.N]) for r in self.W[: self.nu]]

    @property
    def U(self) -> list[list]:
        return [list(r[self.N:]) for r in self.W[: self.nu]]

    def to_json(self) -> dict:
        return {"N": self.N, "nu": self.nu, "W": [[rat_to_str(v) for v in r] for r in self.W]}

    @classmethod
    def from_json(cls, data: dict) -> "NilpotentSeed":
        return cls(int(data["N"]), int(data["nu"]), tuple(tuple(r) for r in data["W"]))


def f_family(A: SpectralMatrixA, M: int = DEFAULT_TIMES) -> list[PolyElement]:
    """f_k = sum_j a_{k,j} chi_j for every row of A."""
    if not A.is_nondegenerate():
        raise DegenerateA("leading row blocks of A are rank deficient", witness=A.rank_profile())
    ring = family_ring(M)
    return [sum((ring(a) * chi(j, M) for j, a in enumerate(row) if a), ring.zero) for row in A.rows]


@dataclass(frozen=True)
class BAFamily:
    """y_n(x, t) and numerators y_n R_n(x, t, z) for n = 0..N, where R_n is monic of z-degree n + nu."""

    A: SpectralMatrixA
    M: int
    y: tuple
    numerators: tuple

    @property
    def N(self) -> int:
        return self.A.N

    def R(self, n: int):
        F = frac_field(tuple(str(s) for s in family_ring(self.M).symbols))
        return F(self.numerators[n]) / F(self.y[n])

    @property
    def psi(self) -> list:
        return [self.R(n) for n in range(self.N + 1)]

    def xi(self, n: int) -> list:
        """xi_1..xi_{n+nu} with R_n = z^(n+nu) (1 + sum xi_l z^-l)."""
        ring = family_ring(self.M)
        zi = ring_z_index(ring)
        s = n + self.A.nu
        F = frac_field(tuple(str(v) for v in ring.symbols))
        coeffs = _z_coefficients(self.numerators[n], zi, s)
        return [F(coeffs[s - l]) / F(self.y[n]) for l in range(1, s + 1)]

    def y_at_zero(self, n: int) -> PolyElement:
        return restrict_to_x(self.y[n])

    def to_json(self) -> dict:
        return {
            "A": self.A.to_json(),
            "times": self.M,
            "y": [poly_to_json(p) for p in self.y],
            "numerators": [poly_to_json(p) for p in self.numerators],
        }

    @classmethod
    def from_json(cls, data: dict) -> "BAFamily":
        M = int(data["times"])
        ring = family_ring(M)
        return cls(
            SpectralMatrixA.from_json(data["A"]),
            M,
            tuple(poly_from_json(p, ring) for p in data["y"]),
            tuple(poly_from_json(p, ring) for p in data["numerators"]),
        )


def ring_z_index(ring) -> int:
    return len(ring.symbols) - 1


def _z_coefficients(p: PolyElement, zi: int, degree: int) -> list[PolyElement]:
    ring = p.ring
    out = [ring.zero for _ in range(degree + 1)]
    for monom, c in p.terms():
        rest = list(monom)
        e = rest[zi]
        rest[zi] = 0
        out[e] += ring({tuple(rest): c})
    return out


def restrict_to_x(p: PolyElement) -> PolyElement:
    """Set every variable except x to zero and return an element of QQ[x]."""
    X = x_ring()
    x = X.gens[0]
    out = X.zero
    for monom, c in p.terms():
        if not any(monom[1:]):
            out += c * x ** monom[0]
    return out


def _differences(f: PolyElement, order: int) -> list[PolyElement]:
    out = [f]
    for _ in range(order):
        out.append(poly_shift(out[-1]) - out[-1])
    return out


def build_family(A: SpectralMatrixA, M: int = DEFAULT_TIMES) -> BAFamily:
    """Solve the jet conditions for R_n, n = 0..N, as ratios of bordered discrete Wronskians."""
    fs = f_family(A, M)
    ring = family_ring(M)
    z = gen(ring, "z")
    top = A.N + A.nu
    diffs = [_differences(f, top) for f in fs]
    ys, nums = [], []
    for n in range(A.N + 1):
        s = n + A.nu
        if s == 0:
            ys.append(ring.one)
            nums.append(ring.one)
            continue
        Mn = [[diffs[k][s - l] for l in range(1, s + 1)] for k in range(s)]
        yn = det(Mn)
        if yn == 0:
            raise SingularWronskian(f"Wronskian of the first {s} rows vanishes", witness=n)
        bordered = [row + [diffs[k][s]] for k, row in enumerate(Mn)]
        bordered.append([z ** (s - l) for l in range(1, s + 1)] + [z**s])
        ys.append(yn)
        nums.append(det(bordered))
    return BAFamily(A, M, tuple(ys), tuple(nums))


def laxdd_residuals(fam: BAFamily) -> list[PolyElement]:
    """Numerators of R_{n+1} - (1+z)R_n(x+1) + v_n R_n with v_n = y_n y_{n+1}(x+1) / (y_n(x+1) y_{n+1})."""
    ring = family_ring(fam.M)
    z = gen(ring, "z")
    out = []
    for n in range(fam.N):
        yn, yn1, pn, pn1 = fam.y[n], fam.y[n + 1], fam.numerators[n], fam.numerators[n + 1]
        lhs = pn1 * poly_shift(yn)
        rhs = (1 + z) * poly_shift(pn) * yn1 - poly_shift(yn1) * pn
        out.append(lhs - rhs)
    return out


def check_periodicity(fam: BAFamily) -> bool:
    """y_N proportional to y_0 and R_N = z^N R_0."""
    ring = family_ring(fam.M)
    z = gen(ring, "z")
    y0, yN = fam.y[0], fam.y[fam.N]
    if y0 * ring(yN.LC) != yN * ring(y0.LC):
        return False
    return fam.numerators[fam.N] * y0 == z**fam.N * fam.numerators[0] * yN


def seed_to_A(seed: NilpotentSeed) -> SpectralMatrixA:
    """A = W diag(E, Q) with q_j = v_j (j <= N) and q_{N+j} = U q_j."""
    N, nu = seed.N, seed.nu
    U = seed.U
    if nu:
        power = [[QQ(int(i == j)) for j in range(nu)] for i in range(nu)]
        for _ in range(nu):
            power = matmul(power, U)
        if any(v != 0 for row in power for v in row):
            raise NotNilpotent(f"corner block is not nilpotent of order {nu}", witness=[[rat_to_str(v) for v in r] for r in U])
    V = seed.V
    cols = [[V[i][j] for i in range(nu)] for j in range(N)]
    while len(cols) < N * nu:
        q = cols[len(cols) - N]
        cols.append([sum((U[i][r] * q[r] for r in range(nu)), QQ(0)) for i in range(nu)])
    width = N * (nu + 1)
    P = [[QQ(0)] * width for _ in range(N + nu)]
    for i in range(N):
        P[i][i] = QQ(1)
    for j, q in enumerate(cols):
        for i in range(nu):
            P[N + i][N + j] = q[i]
    A = SpectralMatrixA(N, nu, tuple(tuple(r) for r in matmul([list(r) for r in seed.W], P)))
    if not A.is_nondegenerate():
        raise DegenerateA("seed produces a degenerate matrix", witness=A.rank_profile())
    return A


def m_extend(A: SpectralMatrixA, m: int) -> SpectralMatrixA:
    """Append m zero columns; the associated family does not change."""
    return SpectralMatrixA(A.N, A.nu, tuple(r + (QQ(0),) * m for r in A.rows))


def bethe_from_A(A: SpectralMatrixA, M: int = DEFAULT_TIMES) -> SolutionTuple:
    """(y_1, ..., y_N) at t = 0, monic, after checking periodicity."""
    fam = build_family(A, M)
    if not check_periodicity(fam):
        raise PeriodicityFailure("family does not extend periodically", witness=A.to_json())
    return SolutionTuple.of([fam.y_at_zero(n) for n in range(1, A.N + 1)])


def phase_point(fam: BAFamily, n: int) -> PhasePoint:
    """Roots u of y_n(x, 0) with gamma_i = -d_{t1} y_n / y_n' at (u_i, 0)."""
    if fam.M < 1:
        raise ValueError("phase points need the time t1")
    y0 = fam.y_at_zero(n)
    if y0.gcd(y0.diff(y0.ring.gens[0])).degree(0) > 0 or y0.gcd(poly_shift(y0)).degree(0) > 0:
        raise NonGenericInput(f"y_{n} at t=0 has repeated roots or roots differing by one", witness=str(y0))
    dt = restrict_to_x(fam.y[n].diff(_t(family_ring(fam.M), 1)))
    coeffs = [float(c) for c in reversed(_ascending(y0))]
    u = np.roots(coeffs).astype(complex)
    dy = np.polyder(np.array(coeffs))
    dtc = [float(c) for c in reversed(_ascending(dt))] if dt != 0 else [0.0]
    gamma = -np.polyval(dtc, u) / np.polyval(dy, u)
    return PhasePoint(tuple(u), tuple(gamma))


def _ascending(p: PolyElement) -> list:
    if p == 0:
        return [QQ(0)]
    out = [QQ(0)] * (p.degree(0) + 1)
    for (e,), c in p.terms():
        out[e] = c
    return out


def unipotency_defect(y: SolutionTuple, n: int, dps: int = 50) -> float:
    """Largest coefficient gap between det(lambda - L(u, gamma)) and (lambda - 1)^k for the n-th level.

    u are the roots of y_n and gamma_i = y_n(u_i - 1) y_{n+1}(u_i) / (y_n'(u_i) y_{n+1}(u_i - 1)),
    all computed with ``dps`` significant digits.
    """
    if not is_generic(y):
        raise NonGenericInput("(u, gamma) is undefined for a non-generic tuple", witness=y.to_json())
    with mpmath.workdps(dps):
        yn, yn1 = y.y(n), y.y(n + 1)
        k = max(yn.degree(0), 0)
        if k == 0:
            return 0.0
        cn = [mpmath.mpf(int(c.numerator)) / int(c.denominator) for c in reversed(_ascending(yn))]
        cn1 = [mpmath.mpf(int(c.numerator)) / int(c.denominator) for c in reversed(_ascending(yn1))]
        dn = [c * (len(cn) - 1 - i) for i, c in enumerate(cn[:-1])]
        u = mpmath.polyroots(cn, maxsteps=200, extraprec=4 * dps)
        ev = mpmath.polyval
        gamma = [ev(cn, r - 1) * ev(cn1, r) / (ev(dn, r) * ev(cn1, r - 1)) for r in u]
        L = mpmath.matrix(k, k)
        for i in range(k):
            for j in range(k):
                L[i, j] = gamma[i] / (u[i] - u[j] - 1)
        coeffs = _charpoly(L)
        target = [mpmath.binomial(k, j) * (-1) ** j for j in range(k + 1)]
        return float(max(abs(a - b) for a, b in zip(coeffs, target)))


def _charpoly(L) -> list:
    """Coefficients of det(lambda - L), highest first, by Faddeev-LeVerrier."""
    k = L.rows
    coeffs = [mpmath.mpf(1)]
    LM = mpmath.zeros(k, k)
    eye = mpmath.eye(k)
    for step in range(1, k + 1):
        # M_step = L M_(step-1) + c_(step-1) I, and c_step = -tr(L M_step) / step
        LM = L * (LM + coeffs[-1] * eye)
        coeffs.append(-sum(LM[i, i] for i in range(k)) / step)
    return coeffs


def family_dumps(fam: BAFamily) -> str:
    return json.dumps(fam.to_json())
