"""Difference operators from Baker-Akhiezer series and the rational RS hierarchy flows."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np
from sympy.polys.fields import FracElement

from .errors import RootCollision
from .exactcore import ratfunc_shift
from .rs_spectral import (
    GenericSpectrum,
    PhasePoint,
    hamiltonians,
    inverse_transform,
    lax_matrix,
)


@dataclass(frozen=True)
class DiffOpX:
    """T^m + sum_{i=1..m} w_i(x) T^(m-i)."""

    m: int
    coefficients: tuple

    def apply(self, f: Callable[[int], Any]) -> Any:
        """Apply to a function given by its shifts: ``f(j)`` must return f(x + j)."""
        out = f(self.m)
        for i, w in enumerate(self.coefficients, start=1):
            out = out + w * f(self.m - i)
        return out


def build_Dm(xi: Sequence[Any], m: int, shift: Callable[[Any, int], Any] | None = None) -> DiffOpX:
    """Unique D_m with D_m Psi = z^m Psi + O(z^(k-1)) Omega for Psi = z^k Omega (1 + sum xi_s z^-s).

    ``xi`` holds xi_1, xi_2, ... as elements of a ring in which ``shift(f, j)``
    returns f(x + j); at least m entries are used (missing ones are zero).
    """
    shift = shift or (lambda f, j: ratfunc_shift(f, "x", j) if j and isinstance(f, FracElement) else f)
    zero = xi[0] * 0 if xi else 0
    xs = list(xi[:m]) + [zero] * max(0, m - len(xi))

    def xi_at(s: int, j: int):
        if s == 0:
            return zero + 1
        return shift(xs[s - 1], j)

    w = [zero + 1]
    for r in range(1, m + 1):
        # coefficient of z^(m-r) in sum_i w_i (1+z)^(m-i) (1 + sum_s xi_s(x+m-i) z^-s) minus z^m (1 + sum xi_s z^-s)
        acc = -xi_at(r, 0)
        for i in range(r):
            for s in range(0, r - i + 1):
                power = m - r + s
                if power > m - i:
                    continue
                acc = acc + w[i] * math.comb(m - i, power) * xi_at(s, m - i)
        w.append(-acc)
    return DiffOpX(m, tuple(w[1:]))


@dataclass(frozen=True)
class FlowMatrices:
    wbar: Callable[[complex], np.ndarray]
    H: tuple
    M: np.ndarray
    residues: np.ndarray


def _wbar_values(u: np.ndarray, g: np.ndarray, L: np.ndarray, m: int, x: complex) -> np.ndarray:
    """[wbar_{1,m}(x), ..., wbar_{m,m}(x)] by the recursion over powers L^(s-1) gamma."""
    powers = [g]
    for _ in range(m):
        powers.append(L @ powers[-1])
    out = np.zeros(m, dtype=complex)
    for s in range(1, m + 1):
        v = powers[s - 1]
        total = np.sum(v / (x - u) - v / (x - u + m))
        for l in range(1, s):
            total -= out[l - 1] * np.sum(powers[s - 1 - l] / (x - u + m - l))
        out[s - 1] = total
    return out


def _laurent_at(fn: Callable[[complex], np.ndarray], center: complex, radius: float, npts: int = 128) -> tuple[np.ndarray, np.ndarray]:
    """Residue and regular part at ``center`` of each component, by the trapezoid rule on a circle."""
    theta = 2j * np.pi * np.arange(npts) / npts
    pts = center + radius * np.exp(theta)
    vals = np.array([fn(p) for p in pts])
    res = np.mean(vals * (radius * np.exp(theta))[:, None], axis=0)
    reg = np.mean(vals, axis=0)
    return res, reg


def flow_matrices(p: PhasePoint, m: int) -> FlowMatrices:
    """wbar_{s,m}, H_{s,m} and M_m = sum_s H_{s,m} L^(m-s) at a phase point."""
    u, g = p.numeric()
    L = np.asarray(lax_matrix(p), dtype=complex) if p.exact else lax_matrix(p)
    k = len(u)
    fn = lambda x: _wbar_values(u, g, L, m, x)
    res = np.zeros((m, k), dtype=complex)
    reg = np.zeros((m, k), dtype=complex)
    for i in range(k):
        poles = [u[j] - n for j in range(k) for n in range(m + 1) if not (j == i and n == 0)]
        radius = 0.3 * min([abs(u[i] - q) for q in poles] + [1.0])
        res[:, i], reg[:, i] = _laurent_at(fn, u[i], radius)
    H = []
    for s in range(1, m + 1):
        Hs = np.zeros((k, k), dtype=complex)
        for i in range(k):
            for j in range(k):
                if s < m:
                    Hs[i, j] = res[s - 1, i] / (u[i] - u[j] + m - s)
                elif i == j:
                    Hs[i, j] = reg[m - 1, i]
                else:
                    Hs[i, j] = res[m - 1, i] / (u[i] - u[j])
        H.append(Hs)
    M = sum(H[s - 1] @ np.linalg.matrix_power(L, m - s) for s in range(1, m + 1))
    return FlowMatrices(fn, tuple(H), M, res[m - 1])


def bar_direction(m: int) -> list[int]:
    """Coefficients of d/dtbar_m in the basis d/dt_1..d/dt_m: binom(m, j)."""
    return [math.comb(m, j) for j in range(1, m + 1)]


@dataclass(frozen=True)
class FlowReport:
    lax_residual: float
    velocity_residual: float
    conservation: float
    gamma_identity: float
    resolvent_residual: float


def lax_flow_check(s: GenericSpectrum, m: int, h: float = 1e-5, t0: Sequence[complex] = (),
                   probe: Sequence[float] = (0.05, 0.1),
                   zbar: Sequence[complex] = (2.5 + 1.5j, -3.0 + 0.5j)) -> FlowReport:
    """Finite-difference d/dtbar_m L against [M_m, L] along the inverse spectral map.

    Also compares d/dtbar_m u_i with res wbar_{m,m} at u_i, reports the relative
    drift of tr L^p (p = 1..3) at the ``probe`` times, and the residual of
    d/dtbar_m gamma = (M_m - L^m) gamma.
    """
    direction = np.array(bar_direction(m), dtype=float)
    base = np.zeros(max(m, len(t0)), dtype=complex)
    base[: len(t0)] = t0

    def point(tau: float) -> PhasePoint:
        t = base.copy()
        t[:m] += tau * direction
        _, q = inverse_transform(s, tuple(t))
        return q

    p0 = point(0.0)
    plus, minus = point(h), point(-h)
    u0, g0 = p0.numeric()
    order_p = _order(u0, plus.numeric()[0])
    order_m = _order(u0, minus.numeric()[0])
    up, gp = plus.numeric()[0][order_p], plus.numeric()[1][order_p]
    um, gm = minus.numeric()[0][order_m], minus.numeric()[1][order_m]
    Lp = lax_matrix(PhasePoint(tuple(up), tuple(gp)))
    Lm = lax_matrix(PhasePoint(tuple(um), tuple(gm)))
    L0 = lax_matrix(p0)
    dL = (Lp - Lm) / (2 * h)
    fm = flow_matrices(p0, m)
    comm = fm.M @ L0 - L0 @ fm.M
    scale = max(1.0, float(np.abs(comm).max()))
    lax_res = float(np.abs(dL - comm).max() / scale)
    du = (up - um) / (2 * h)
    vel_res = float(np.abs(du - fm.residues).max() / max(1.0, float(np.abs(du).max())))
    H0 = np.array(hamiltonians(L0))
    drift = 0.0
    for tau in probe:
        Ht = np.array(hamiltonians(lax_matrix(point(tau))))
        drift = max(drift, float(np.max(np.abs(Ht - H0) / np.maximum(1.0, np.abs(H0)))))
    dg = (gp - gm) / (2 * h)
    ident = dg - (fm.M @ g0 - np.linalg.matrix_power(L0, m) @ g0)
    ident_res = float(np.abs(ident).max() / max(1.0, float(np.abs(dg).max())))
    eye = np.eye(len(u0))
    worst = 0.0
    for zb in zbar:
        cp = np.linalg.solve(zb * eye - Lp, gp)
        cm = np.linalg.solve(zb * eye - Lm, gm)
        c0 = np.linalg.solve(zb * eye - L0, g0)
        dc = (cp - cm) / (2 * h)
        rhs = (fm.M - np.linalg.matrix_power(L0, m)) @ c0
        worst = max(worst, float(np.abs(dc - rhs).max() / max(1.0, float(np.abs(dc).max()))))
    return FlowReport(lax_res, vel_res, drift, ident_res, worst)


def _order(reference: np.ndarray, values: np.ndarray) -> list[int]:
    rest = list(range(len(values)))
    out = []
    for r in reference:
        i = min(rest, key=lambda j: abs(values[j] - r))
        rest.remove(i)
        out.append(i)
    if len(set(np.round(values, 12))) != len(values):
        raise RootCollision("positions collide along the flow")
    return out
