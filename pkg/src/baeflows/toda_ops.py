"""Truncated pseudo-difference operators in the lattice index and the discrete mKdV flow identity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

from sympy.polys.fields import FracElement

from .errors import InconsistentWave, PoleAtSample, TruncationExceeded
from .exactcore import rat, ratfunc_eval, ratfunc_shift

DEFAULT_DEPTH = 6


@dataclass(frozen=True)
class PseudoDiffOp:
    """sum_{s=-M}^{depth} f_s T^(-s) with N-periodic coefficient sequences f_s = (f_s(0), ..., f_s(N-1)).

    T acts on the lattice index: (T f)(n) = f(n + 1).  Coefficients with s > depth are
    unknown, unless ``exact`` is set, in which case they are zero.
    """

    N: int
    M: int
    depth: int
    coeffs: dict
    exact: bool = False

    def __post_init__(self):
        if self.depth < -self.M:
            raise TruncationExceeded("operator has no known coefficients", witness=(self.M, self.depth))
        full = {}
        for s in range(-self.M, self.depth + 1):
            seq = tuple(self.coeffs.get(s, (0,) * self.N))
            if len(seq) != self.N:
                raise ValueError(f"coefficient {s} must have period {self.N}")
            full[s] = seq
        extra = [s for s in self.coeffs if s < -self.M or s > self.depth]
        if any(any(v != 0 for v in self.coeffs[s]) for s in extra):
            raise ValueError("coefficients outside the declared range")
        object.__setattr__(self, "coeffs", full)

    def coefficient(self, s: int) -> tuple:
        if s > self.depth and self.exact:
            return (0,) * self.N
        if s > self.depth:
            raise TruncationExceeded(f"coefficient of T^{-s} beyond depth {self.depth}", witness=s)
        return self.coeffs.get(s, (0,) * self.N)

    def __add__(self, other: "PseudoDiffOp") -> "PseudoDiffOp":
        _compatible(self, other)
        M = max(self.M, other.M)
        exact = self.exact and other.exact
        if exact:
            depth = max(self.depth, other.depth)
        else:
            depth = min(d.depth for d in (self, other) if not d.exact)
        coeffs = {}
        for s in range(-M, depth + 1):
            a = self.coefficient(s) if s >= -self.M else (0,) * self.N
            b = other.coefficient(s) if s >= -other.M else (0,) * self.N
            coeffs[s] = tuple(x + y for x, y in zip(a, b))
        return PseudoDiffOp(self.N, M, depth, coeffs, exact)

    def __neg__(self) -> "PseudoDiffOp":
        return PseudoDiffOp(self.N, self.M, self.depth, {s: tuple(-v for v in c) for s, c in self.coeffs.items()}, self.exact)

    def __sub__(self, other: "PseudoDiffOp") -> "PseudoDiffOp":
        return self + (-other)

    def __mul__(self, other: "PseudoDiffOp") -> "PseudoDiffOp":
        return op_multiply(self, other)

    def plus(self) -> "PseudoDiffOp":
        """Nonnegative part: the terms T^j with j >= 0, an exact operator."""
        if self.depth < 0 and not self.exact:
            raise TruncationExceeded("residue is beyond the known depth", witness=self.depth)
        return PseudoDiffOp(self.N, self.M, 0, {s: self.coefficient(s) for s in range(-self.M, 1)}, True)

    def minus(self) -> "PseudoDiffOp":
        return PseudoDiffOp(self.N, self.M, self.depth, {s: c for s, c in self.coeffs.items() if s > 0}, self.exact)

    def apply(self, phi: Callable[[int], Any], n: int) -> Any:
        """(F phi)(n) = sum_s f_s(n) phi(n - s) for an operator of finite extent (the nonnegative part)."""
        total = 0
        for s, c in self.coeffs.items():
            if c[n % self.N] != 0:
                total = total + c[n % self.N] * phi(n - s)
        return total


def _compatible(a: PseudoDiffOp, b: PseudoDiffOp) -> None:
    if a.N != b.N:
        raise ValueError("operators have different periods")


def shift_op(N: int, power: int = 1) -> PseudoDiffOp:
    """T^power as an exact operator."""
    return PseudoDiffOp(N, max(power, 0), max(-power, 0), {-power: (1,) * N}, True)


def op_multiply(a: PseudoDiffOp, b: PseudoDiffOp, depth: int | None = None) -> PseudoDiffOp:
    """Compose with T^(-i) g = (T^(-i) g) T^(-i).

    A truncated factor of depth d limits the product to depth d - M' where M'
    is the top power of the other factor.
    """
    _compatible(a, b)
    N = a.N
    bounds = []
    if not a.exact:
        bounds.append(a.depth - b.M)
    if not b.exact:
        bounds.append(b.depth - a.M)
    known = min(bounds) if bounds else a.depth + b.depth
    if depth is None:
        depth = known
    elif depth > known and bounds:
        raise TruncationExceeded(f"requested depth {depth} exceeds the known depth {known}", witness=(depth, known))
    M = a.M + b.M
    coeffs = {}
    for s in range(-M, depth + 1):
        seq = []
        for n in range(N):
            total = 0
            for i in range(-a.M, a.depth + 1):
                j = s - i
                if j < -b.M or j > b.depth:
                    continue
                f = a.coeffs[i][n]
                if f == 0:
                    continue
                g = b.coeffs[j][(n - i) % N]
                if g != 0:
                    total = total + f * g
            seq.append(total)
        coeffs[s] = tuple(seq)
    return PseudoDiffOp(N, M, depth, coeffs, not bounds)


def op_power(L: PseudoDiffOp, m: int) -> PseudoDiffOp:
    if m < 0:
        raise ValueError("only nonnegative powers")
    out = shift_op(L.N, 0)
    for _ in range(m):
        out = op_multiply(out, L)
    return out


def residue(F: PseudoDiffOp) -> tuple:
    """The coefficient of T^0."""
    return F.coefficient(0)


@dataclass(frozen=True)
class WaveFamily:
    """Psi_n = z^n (1 + sum_s xi[n][s-1] z^-s) Omega with N-periodic coefficients.

    ``complete`` means xi[n][s] vanish beyond the stored length, so every
    coefficient is known; otherwise the stored length is the truncation.
    """

    N: int
    xi: tuple
    complete: bool = True

    def coefficient(self, n: int, s: int) -> Any:
        if s == 0:
            return 1
        row = self.xi[n % self.N]
        if s <= len(row):
            return row[s - 1]
        if self.complete:
            return 0
        raise TruncationExceeded(f"wave coefficient {s} beyond truncation", witness=(n, s))

    @property
    def truncation(self) -> int | None:
        return None if self.complete else min(len(r) for r in self.xi)


def wave_from_family(fam) -> WaveFamily:
    """Wave family from a periodic determinant family (drops the z^nu offset)."""
    return WaveFamily(fam.N, tuple(tuple(fam.xi(n)) for n in range(fam.N)), True)


def wave_from_stripped(psis: Sequence) -> WaveFamily:
    """Wave family from the exact stripped functions of the linear problem (R_n polynomial in 1/z)."""
    N = len(psis)
    rows = [None] * N
    for p in psis:
        R = p.normalized()
        field = R.field
        zi = [str(s) for s in field.symbols].index("z")
        num, den = R.numer, R.denom
        dz = den.degree(zi)
        if not _monomial_in(den, zi):
            raise InconsistentWave("R_n is not a polynomial in 1/z", witness=p.n)
        base = field(_strip_z(den, zi))
        coeffs = {}
        for monom, c in num.terms():
            e = monom[zi]
            rest = list(monom)
            rest[zi] = 0
            coeffs[e] = coeffs.get(e, field.ring.zero) + field.ring({tuple(rest): c})
        if max(coeffs) != dz or field(coeffs[dz]) / base != 1:
            raise InconsistentWave("R_n does not tend to one as z grows", witness=p.n)
        rows[p.n % N] = tuple(field(coeffs.get(dz - s, field.ring.zero)) / base for s in range(1, dz + 1))
    return WaveFamily(N, tuple(rows), True)


def _monomial_in(p, zi: int) -> bool:
    degs = {m[zi] for m in p.monoms()}
    return len(degs) == 1


def _strip_z(p, zi: int):
    ring = p.ring
    out = ring.zero
    for monom, c in p.terms():
        rest = list(monom)
        rest[zi] = 0
        out += ring({tuple(rest): c})
    return out


def wave_potential(w: WaveFamily, n: int, shift: Callable[[Any, int], Any] | None = None) -> Any:
    """v_n = 1 + xi_{n,1}(x+1) - xi_{n+1,1}(x), read off the z^0 term of H Psi = 0."""
    shift = shift or _xshift
    return 1 + shift(w.coefficient(n, 1), 1) - w.coefficient(n + 1, 1)


def _xshift(f: Any, j: int) -> Any:
    if isinstance(f, FracElement):
        return ratfunc_shift(f, "x", j)
    return f


def wave_residual(w: WaveFamily, depth: int, shift: Callable[[Any, int], Any] | None = None) -> list:
    """Coefficients of z^-j, j = 1..depth, of (H Psi)_n / (z^n Omega), for every n in a period.

    With xi_{n,0} = 1 the coefficient is xi_{n+1,j+1} - xi_{n,j}(x+1) - xi_{n,j+1}(x+1) + v_n xi_{n,j}.
    """
    shift = shift or _xshift
    out = []
    for n in range(w.N):
        v = wave_potential(w, n, shift)
        for j in range(1, depth + 1):
            r = (w.coefficient(n + 1, j + 1) - shift(w.coefficient(n, j), 1)
                 - shift(w.coefficient(n, j + 1), 1) + v * w.coefficient(n, j))
            out.append(r)
    return out


def extract_L(w: WaveFamily, depth: int = DEFAULT_DEPTH, check: bool = True) -> PseudoDiffOp:
    """L = T + sum_{s=0}^{depth} w_s T^(-s) with L Psi = z Psi, solved triangularly in the tail.

    The coefficient of z^-j gives w_j(n) = xi_{n,j+1} - xi_{n+1,j+1} - sum_{s<j} w_s(n) xi_{n-s,j-s}.
    """
    if check:
        limit = depth if w.complete else min(depth, w.truncation - 1)
        bad = [r for r in wave_residual(w, max(limit, 0)) if r != 0]
        if bad:
            raise InconsistentWave("wave family does not solve the generating equation", witness=str(bad[0]))
    coeffs = {-1: (1,) * w.N}
    tail = []
    for j in range(depth + 1):
        seq = []
        for n in range(w.N):
            val = w.coefficient(n, j + 1) - w.coefficient(n + 1, j + 1)
            for s in range(j):
                val = val - tail[s][n] * w.coefficient(n - s, j - s)
            seq.append(val)
        tail.append(tuple(seq))
        coeffs[j] = tuple(seq)
    return PseudoDiffOp(w.N, 1, depth, coeffs)


def eigen_residual(L: PseudoDiffOp, w: WaveFamily) -> list:
    """Coefficients of z^-j (0 <= j <= depth) in (L Psi - z Psi)_n / (z^n Omega)."""
    out = []
    for n in range(w.N):
        for j in range(L.depth + 1):
            val = w.coefficient(n + 1, j + 1) - w.coefficient(n, j + 1)
            for s in range(j + 1):
                val = val + L.coeffs[s][n] * w.coefficient(n - s, j - s)
            out.append(val)
    return out


def flow_residual(w: WaveFamily, m: int, var: str | None = None) -> list:
    """Coefficients of (d/dt_m - (L^m)_+) Psi_n / (z^n Omega) for a time-dependent wave family.

    Psi carries exp(sum t_j z^j), so d/dt_m contributes z^m Psi plus the derivatives of xi.
    Every coefficient of z^j, -depth <= j <= m, must vanish.
    """
    var = var or f"t{m}"
    L = extract_L(w, depth=max(m - 1, 0), check=False)
    B = op_power(L, m).plus()
    K = _max_len(w) + m + 1
    out = []
    for n in range(w.N):
        coeffs = {}
        def add(power, value):
            coeffs[power] = coeffs.get(power, 0) + value
        for s in range(0, K + 1):
            c = w.coefficient(n, s)
            add(m - s, c)
            if s and c != 0:
                add(-s, _diff(c, var))
        for s, seq in B.coeffs.items():
            f = seq[n % w.N]
            if f == 0:
                continue
            for r in range(0, K + 1):
                add(-s - r, -f * w.coefficient(n - s, r))
        out.extend(v for v in coeffs.values())
    return out


def _max_len(w: WaveFamily) -> int:
    return max(len(r) for r in w.xi)


def _diff(f: Any, var: str) -> Any:
    if isinstance(f, FracElement):
        return _frac_diff(f, var)
    return 0


def _frac_diff(f: FracElement, var: str) -> FracElement:
    field = f.field
    i = [str(s) for s in field.symbols].index(var)
    x = field.ring.gens[i]
    num, den = f.numer, f.denom
    return field(num.diff(x) * den - num * den.diff(x)) / field(den**2)


def potential_residues(fam, m: int, t0: dict | None = None) -> list:
    """F_{m,n}(x) = res_T L^m for n = 0..N-1, with L extracted from the family at fixed times."""
    w = wave_at(fam, t0 or {})
    L = extract_L(w, depth=max(m - 1, 0))
    return list(residue(op_power(L, m)))


def wave_at(fam, times: dict) -> WaveFamily:
    """Substitute fixed values for t_1..t_M in the wave coefficients (z does not occur)."""
    rows = []
    for n in range(fam.N):
        row = []
        for c in fam.xi(n):
            for j in range(1, fam.M + 1):
                c = ratfunc_eval(c, f"t{j}", rat(times.get(j, 0)))
            row.append(c)
        rows.append(tuple(row))
    return WaveFamily(fam.N, tuple(rows), True)


def _eval_x(f: Any, x: Fraction) -> Fraction:
    if not isinstance(f, FracElement):
        return Fraction(f)
    num = f.numer
    den = f.denom
    dv = _poly_at(den, x)
    if dv == 0:
        raise PoleAtSample(f"pole at x = {x}", witness=str(x))
    return _poly_at(num, x) / dv


def _poly_at(p, x: Fraction) -> Fraction:
    total = Fraction(0)
    for monom, c in p.terms():
        if any(monom[1:]):
            raise ValueError("expected a function of x only")
        total += Fraction(int(c.numerator), int(c.denominator)) * x ** monom[0]
    return total


def _y_at(p, x: Fraction, times: dict) -> Fraction:
    total = Fraction(0)
    for monom, c in p.terms():
        term = Fraction(int(c.numerator), int(c.denominator)) * x ** monom[0]
        for j, e in enumerate(monom[1:], start=1):
            if e:
                term *= Fraction(times.get(j, 0)) ** e
        total += term
    return total


def vflow_check(fam, m: int, h: Any = Fraction(1, 10**5), xs: Sequence[Any] = (Fraction(7, 3), Fraction(-5, 2), Fraction(11, 7))) -> float:
    """Central difference of ln v_n(x) in t_m at t = 0 against F_{m,n}(x+1) - F_{m,n}(x).

    Returns the largest residual relative to max(1, |right side|) over n and the sample points.
    """
    if m > fam.M:
        raise ValueError(f"family carries only {fam.M} times")
    F = potential_residues(fam, m)
    h = Fraction(h)
    worst = 0.0
    for n in range(fam.N):
        for x in xs:
            x = Fraction(x)
            rhs = _eval_x(F[n], x + 1) - _eval_x(F[n], x)

            def logv(tau: Fraction) -> float:
                times = {m: tau}
                num = _y_at(fam.y[n], x, times) * _y_at(fam.y[n + 1], x + 1, times)
                den = _y_at(fam.y[n], x + 1, times) * _y_at(fam.y[n + 1], x, times)
                if num == 0 or den == 0:
                    raise PoleAtSample(f"v_{n} vanishes or blows up at x = {x}", witness=str(x))
                return math.log(abs(num / den))

            lhs = (logv(h) - logv(-h)) / (2 * float(h))
            worst = max(worst, abs(lhs - float(rhs)) / max(1.0, abs(float(rhs))))
    return worst
