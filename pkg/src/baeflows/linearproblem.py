"""Admissible solutions of the generating linear problem attached to a Bethe tuple.

Every Baker-Akhiezer function is stored with its gauge factor z^n (1+z)^x
removed, as an element R_n of QQ(x, z).  The linear problem then reads

    z R_{n+1}(x) = (1+z) R_n(x+1) - v_n(x) R_n(x),   R_{N+n} = R_n.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
from sympy import QQ
from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement, PolyRing

from .bethe import SolutionTuple, is_generic, verify_bae
from .errors import BAENotSatisfied, NonGenericInput, RootExtractionFailure, SingularLinearSystem
from .exactcore import (
    det,
    frac_field,
    poly_coeffs,
    poly_shift,
    poly_to_json,
    ratfunc_shift,
    solve_linear,
    univariate_coeffs,
    x_ring,
)
from .generation import fertility_partner

XZ = ("x", "z")


def xz_field():
    return frac_field(XZ)


def z_ring() -> PolyRing:
    return _Z_RING


_Z_RING = PolyRing("z", QQ)


def _lift(p: PolyElement) -> FracElement:
    F = xz_field()
    return F(p.set_ring(F.ring))


@dataclass(frozen=True)
class StrippedBA:
    """R_n(x, z): the factor multiplying z^n (1+z)^x in Psi_n."""

    n: int
    R: FracElement
    q: PolyElement
    kappa: int

    def normalized(self) -> FracElement:
        """R multiplied by q(z), the representative without poles away from z = 0."""
        return self.R * xz_field()(self.q.set_ring(xz_field().ring))

    def to_json(self) -> dict:
        return {"n": self.n, "numerator": poly_to_json(self.R.numer), "denominator": poly_to_json(self.R.denom)}


@dataclass(frozen=True)
class ResidueData:
    roots: list
    gamma: list
    eps: list
    exact: bool


def v_sequence(y: SolutionTuple) -> list[FracElement]:
    """v_n = y_n(x)y_{n+1}(x+1) / (y_n(x+1)y_{n+1}(x)) for n = 1..N, in QQ(x)."""
    if not is_generic(y):
        raise NonGenericInput("potentials are only defined for generic tuples")
    F = frac_field(("x",))
    out = []
    for n in range(1, y.N + 1):
        a, b = F(y.y(n)), F(y.y(n + 1))
        out.append(a * ratfunc_shift(b) / (ratfunc_shift(a) * b))
    return out


def _v_xz(y: SolutionTuple, n: int) -> FracElement:
    a, b = _lift(y.y(n)), _lift(y.y(n + 1))
    return a * ratfunc_shift(b) / (ratfunc_shift(a) * b)


# ---------------------------------------------------------------------------
# roots and residues


def _eval(p: PolyElement, value):
    coeffs = univariate_coeffs(p)
    if isinstance(value, complex):
        return complex(np.polyval([complex(float(c)) for c in reversed(coeffs)], value))
    acc = QQ(0)
    for c in reversed(coeffs):
        acc = acc * value + c
    return acc


def _deriv(p: PolyElement) -> PolyElement:
    return p.diff(p.ring.gens[0])


def polynomial_roots(p: PolyElement, cond_limit: float = 1e10) -> tuple[list, bool]:
    """Roots of a polynomial in x; exact rationals when every numeric root rationalizes exactly."""
    coeffs = univariate_coeffs(p)
    if len(coeffs) <= 1:
        return [], True
    numeric = np.roots([complex(float(c)) for c in reversed(coeffs)])
    exact = []
    for r in numeric:
        if abs(r.imag) > 1e-9 * max(1.0, abs(r)):
            break
        guess = QQ.convert(Fraction(r.real).limit_denominator(10**6))
        if _eval(p, guess) != 0:
            break
        exact.append(guess)
    else:
        if len(set(exact)) == len(exact):
            return sorted(exact), True
    dp = _deriv(p)
    mags = [abs(float(c)) for c in coeffs]
    for r in numeric:
        dv = abs(_eval(dp, complex(r)))
        # relative condition number of the root under coefficient perturbations
        spread = sum(m * abs(r) ** i for i, m in enumerate(mags))
        if dv == 0 or spread / (dv * max(1.0, abs(r))) > cond_limit:
            raise RootExtractionFailure("roots are too ill-conditioned", witness=[complex(v) for v in numeric])
    return [complex(r) for r in numeric], False


def _match(values: Sequence, target: Sequence) -> list:
    """Reorder ``values`` to align with ``target`` by nearest neighbour."""
    rest = list(values)
    out = []
    for t in target:
        i = min(range(len(rest)), key=lambda j: abs(complex(rest[j]) - complex(t)))
        out.append(rest.pop(i))
    return out


def residues(y: SolutionTuple) -> list[ResidueData]:
    """Per n, gamma_i = res_{u_i - 1} v_n over roots of y_n and eps_i = res_{u_i} v_n over roots of y_{n+1}."""
    if not is_generic(y):
        raise NonGenericInput("residues are only defined for generic tuples")
    roots = [polynomial_roots(y.y(n)) for n in range(1, y.N + 1)]
    out = []
    for n in range(1, y.N + 1):
        yn, yn1 = y.y(n), y.y(n + 1)
        un, ex_n = roots[n - 1]
        un1, ex_n1 = roots[n % y.N]
        dn, dn1 = _deriv(yn), _deriv(yn1)
        gamma = [_eval(yn, u - 1) * _eval(yn1, u) / (_eval(dn, u) * _eval(yn1, u - 1)) for u in un]
        eps = [_eval(yn, u) * _eval(yn1, u + 1) / (_eval(yn, u + 1) * _eval(dn1, u)) for u in un1]
        out.append(ResidueData(roots=list(un), gamma=gamma, eps=eps, exact=ex_n and ex_n1))
    return out


# ---------------------------------------------------------------------------
# exact family


def residue_system(y: SolutionTuple, n: int) -> tuple[list, list]:
    """Matrix and right side over QQ[z] for the low coefficients p_r of P_n = y_n + sum p_r x^r.

    The unknowns are fixed by requiring y_n(x+1) to divide
    (1+z)P_n(x+1)y_{n+1}(x) - y_{n+1}(x+1)P_n(x).
    """
    Zr = z_ring()
    z = Zr.gens[0]
    yn, yn1 = y.y(n), y.y(n + 1)
    k = max(yn.degree(0), 0)
    modulus = poly_shift(yn)
    x = x_ring().gens[0]
    sh_next = poly_shift(yn1)

    def split(p: PolyElement) -> tuple[list, list]:
        a = univariate_coeffs((poly_shift(p) * yn1).rem(modulus))
        b = univariate_coeffs((sh_next * p).rem(modulus))
        a += [QQ(0)] * (k - len(a))
        b += [QQ(0)] * (k - len(b))
        return a[:k], b[:k]

    cols = []
    for r in range(k):
        a, b = split(x**r)
        cols.append([(1 + z) * ai - bi for ai, bi in zip(a, b)])
    a0, b0 = split(yn)
    rhs = [-((1 + z) * ai - bi) for ai, bi in zip(a0, b0)]
    M = [[col[i] for col in cols] for i in range(k)]
    return M, rhs


def residue_determinant(y: SolutionTuple, n: int) -> PolyElement:
    M, _ = residue_system(y, n)
    if not M:
        return z_ring().one
    return det(M)


def _z_order(p: PolyElement) -> int:
    return min(m[0] for m in p.monoms())


def build_psi_family(y: SolutionTuple) -> list[StrippedBA]:
    """Solve the residue conditions for each n and return the gauge-stripped family."""
    if not is_generic(y):
        raise NonGenericInput("the linear problem needs a generic tuple")
    report = verify_bae(y)
    if not report.satisfied:
        raise BAENotSatisfied("tuple does not satisfy the Bethe equations", witness=report.failing_equations)
    F = xz_field()
    Zr = z_ring()
    x = F.gens[0]
    out = []
    for n in range(1, y.N + 1):
        M, rhs = residue_system(y, n)
        yn = _lift(y.y(n))
        if not M:
            out.append(StrippedBA(n, F.one, Zr.one, 0))
            continue
        if det(M) == 0:
            raise SingularLinearSystem(f"residue system at n={n} is singular", witness=n)
        Mf = [[F(v.set_ring(F.ring)) for v in row] for row in M]
        bf = [F(v.set_ring(F.ring)) for v in rhs]
        sol = solve_linear(Mf, bf).particular
        P = yn
        for r, p in enumerate(sol):
            P = P + p * x**r
        R = P / yn
        q, kappa = _q_normalizer(sol)
        out.append(StrippedBA(n, R, q, kappa))
    return out


def _q_normalizer(coeffs: Sequence[FracElement]) -> tuple[PolyElement, int]:
    """Monic q(z) with q(0) != 0 clearing the non-origin z-poles, and the pole order at z = 0."""
    Zr = z_ring()
    lcm = Zr.one
    for c in coeffs:
        den = c.denom.set_ring(Zr) if c.denom.degree(0) <= 0 else None
        if den is None:
            raise ValueError("coefficient depends on x")
        lcm = lcm.lcm(den)
    kappa = _z_order(lcm)
    q = lcm.quo(Zr.gens[0] ** kappa)
    return q.monic(), kappa


def q_agrees(psis: Sequence[StrippedBA]) -> bool:
    """q(z) is the same polynomial for every n with k_n > 0."""
    qs = {tuple(p.q.terms()) for p in psis if p.R != 1}
    return len(qs) <= 1


def laxdd_residuals(v: Sequence[FracElement], Rs: Sequence[FracElement]) -> list[FracElement]:
    F = xz_field()
    z = F.gens[1]
    N = len(Rs)
    out = []
    for i in range(N):
        lhs = z * Rs[(i + 1) % N]
        rhs = (1 + z) * ratfunc_shift(Rs[i]) - v[i] * Rs[i]
        out.append(lhs - rhs)
    return out


def verify_laxdd(y: SolutionTuple, psis: Sequence[StrippedBA]) -> tuple[bool, list]:
    """Exact check of the stripped linear problem; returns (ok, witnesses)."""
    v = [_v_xz(y, n) for n in range(1, y.N + 1)]
    res = laxdd_residuals(v, [p.R for p in psis])
    witnesses = [(i + 1, r) for i, r in enumerate(res) if r != 0]
    return not witnesses, witnesses


def admissible(y: SolutionTuple, psis: Sequence[StrippedBA]) -> bool:
    """y_n(x) R_n(x, z) has polynomial dependence on x."""
    for n, p in enumerate(psis, start=1):
        prod = p.R * _lift(y.y(n))
        if prod.denom.degree(0) > 0:
            return False
    return True


def tends_to_one_in_z(p: StrippedBA) -> bool:
    """Numerator and denominator have equal z-degree and equal leading z-coefficients."""
    num, den = p.R.numer, p.R.denom
    dn, dd = num.degree(1), den.degree(1)
    if dn != dd:
        return False
    lead = lambda f, d: sum((f.ring({m: c}) for m, c in f.terms() if m[1] == d), f.ring.zero)
    return lead(num, dn) == lead(den, dd)


# ---------------------------------------------------------------------------
# numeric route through the matrices L^(n)(z)


def lax_system(roots: Sequence, gamma: Sequence, z: complex) -> np.ndarray:
    """(1+z)E - L with L_ij = gamma_i/(u_i - u_j - 1)."""
    u = np.asarray([complex(v) for v in roots])
    g = np.asarray([complex(v) for v in gamma])
    L = g[:, None] / (u[:, None] - u[None, :] - 1)
    return (1 + z) * np.eye(len(u)) - L


def numeric_R(y: SolutionTuple, n: int, xv: complex, zv: complex, data: Sequence[ResidueData] | None = None) -> complex:
    """R_n(x, z) from the Cauchy-type system solved at a sample z."""
    data = data or residues(y)
    d = data[(n - 1) % y.N]
    if not d.roots:
        return 1.0 + 0j
    A = lax_system(d.roots, d.gamma, zv)
    C = np.linalg.solve(A, np.asarray([complex(g) for g in d.gamma]))
    return complex(1 + sum(c / (xv - complex(u)) for c, u in zip(C, d.roots)))


def eval_xz(f: FracElement, xv: complex, zv: complex) -> complex:
    def ev(p):
        return sum(complex(float(c)) * xv ** m[0] * zv ** m[1] for m, c in p.terms())

    return ev(f.numer) / ev(f.denom)


# ---------------------------------------------------------------------------
# generation action


def action_multiplier(y: SolutionTuple, m: int, c: Any) -> tuple[SolutionTuple, FracElement]:
    """Generated tuple and g = -kappa y_{m-1}y_{m+1} / (y_m y~_m) in QQ(x)."""
    partner, kappa = fertility_partner(y, m)
    new_poly = partner + QQ.convert(c) * y.y(m)
    F = frac_field(("x",))
    g = -kappa * F(y.y(m - 1)) * F(y.y(m + 1)) / (F(y.y(m)) * F(new_poly))
    return y.replace(m, new_poly), g


def riccati_residual(y: SolutionTuple, m: int, g: FracElement) -> FracElement:
    """v_m g - v_{m-1} g(x+1) + g g(x+1)."""
    v = v_sequence(y)
    vm, vm1 = v[(m - 1) % y.N], v[(m - 2) % y.N]
    gs = ratfunc_shift(g)
    return vm * g - vm1 * gs + g * gs


def generation_action(y: SolutionTuple, psis: Sequence[StrippedBA], m: int, c: Any) -> list[StrippedBA]:
    """Family of the tuple generated at m: R~_m = R_m + g R_{m-1} / z, other slots unchanged."""
    _, g = action_multiplier(y, m, c)
    if riccati_residual(y, m, g) != 0:
        raise BAENotSatisfied("Riccati identity fails for the generation multiplier", witness=m)
    F = xz_field()
    z = F.gens[1]
    gx = F(g.numer.set_ring(F.ring)) / F(g.denom.set_ring(F.ring))
    N = y.N
    prev = psis[(m - 2) % N]
    cur = psis[(m - 1) % N]
    new = list(psis)
    R = cur.R + gx * prev.R / z
    q, kappa = _q_from_R(R)
    new[(m - 1) % N] = StrippedBA(cur.n, R, q, kappa)
    return new


def _q_from_R(R: FracElement) -> tuple[PolyElement, int]:
    """q and the origin pole order read off the z-only factor of the denominator."""
    Zr = z_ring()
    zfactor = _z_content(R.denom).set_ring(Zr)
    kappa = _z_order(zfactor)
    q = zfactor.quo(Zr.gens[0] ** kappa)
    return q.monic(), kappa


def _z_content(p: PolyElement) -> PolyElement:
    """gcd of the x-coefficients of p, a polynomial in z alone."""
    out = p.ring.zero
    for c in poly_coeffs(p, "x"):
        out = out.gcd(c) if out != 0 else c
    return out


# ---------------------------------------------------------------------------
# Miura form


def miura_residual(v: Sequence[FracElement], Rs: Sequence[FracElement]) -> list[FracElement]:
    """Residual of (1+z)Phi(x+1) = (L(z) + V(x))Phi(x) with Phi_n = z^n R_n.

    L(z) has ones on the superdiagonal and z^N in the lower-left corner, so row
    n reads Psi_n(x+1) = v_n Psi_n + Psi_{n+1} with Psi_{N+1} = z^N Psi_1.
    """
    F = xz_field()
    z = F.gens[1]
    N = len(Rs)
    phi = [z ** (n + 1) * Rs[n] for n in range(N)]
    Lz = [[F.zero] * N for _ in range(N)]
    for n in range(N - 1):
        Lz[n][n + 1] = F.one
    Lz[N - 1][0] = z**N
    out = []
    for n in range(N):
        lhs = (1 + z) * ratfunc_shift(phi[n])
        rhs = v[n] * phi[n]
        for j in range(N):
            if Lz[n][j] != 0:
                rhs = rhs + Lz[n][j] * phi[j]
        out.append(lhs - rhs)
    return out


def miura_check(y: SolutionTuple, psis: Sequence[StrippedBA], v: Sequence[FracElement] | None = None) -> bool:
    if v is None:
        v = [_v_xz(y, n) for n in range(1, y.N + 1)]
    else:
        F = xz_field()
        v = [F(f.numer.set_ring(F.ring)) / F(f.denom.set_ring(F.ring)) for f in v]
    return all(r == 0 for r in miura_residual(v, [p.R for p in psis]))
