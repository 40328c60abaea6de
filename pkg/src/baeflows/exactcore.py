"""Exact arithmetic substrate: rationals, polynomials in x and times, rational
functions, truncated series and dense linear algebra.

Polynomials are sympy ``PolyElement`` values over ``QQ`` (backed by gmpy2
rationals when available).  Rational functions are ``FracElement`` values.
Determinants and linear solves are implemented here directly so the same code
runs over rationals, polynomial rings, rational-function fields and complex
floats.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Sequence

import numpy as np
from sympy import QQ
from sympy.polys.densetools import dup_shift
from sympy.polys.fields import FracElement, FracField
from sympy.polys.rings import PolyElement, PolyRing

from .errors import NoSolution

Rat = type(QQ(1))

DEFAULT_TIMES = 3
TOLERANCE_ENV = "BAEFLOWS_TOL"


def default_tolerance(fallback: float = 1e-8) -> float:
    """Numeric tolerance, overridable through the ``BAEFLOWS_TOL`` variable."""
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None:
        return fallback
    value = float(raw)
    if not value > 0:
        raise ValueError(f"{TOLERANCE_ENV} must be positive, got {raw!r}")
    return value


# ---------------------------------------------------------------------------
# rationals


def rat(value: Any) -> Rat:
    """Convert ints, Fractions, "p/q" strings and mpq values to an exact rational."""
    if isinstance(value, Rat):
        return value
    if isinstance(value, str):
        return QQ.convert(Fraction(value.strip()))
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact rationals")
    return QQ.convert(value)


def rat_to_str(q: Any) -> str:
    q = rat(q)
    num, den = int(q.numerator), int(q.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


# ---------------------------------------------------------------------------
# polynomial rings


@lru_cache(maxsize=None)
def poly_ring(M: int = 0, extra: tuple[str, ...] = ()) -> PolyRing:
    """Ring QQ[x, t1..tM, *extra] with lex order; cached so values compare equal."""
    names = ["x"] + [f"t{j}" for j in range(1, M + 1)] + list(extra)
    return PolyRing(",".join(names), QQ)


@lru_cache(maxsize=None)
def frac_field(names: tuple[str, ...]) -> FracField:
    return FracField(",".join(names), QQ)


def x_ring() -> PolyRing:
    return poly_ring(0)


def gen(ring: PolyRing, name: str) -> PolyElement:
    return ring.gens[ring_index(ring, name)]


def ring_index(ring, name: str) -> int:
    names = [str(s) for s in ring.symbols]
    return names.index(name)


def poly_from_coeffs(coeffs: Sequence[Any], ring: PolyRing | None = None) -> PolyElement:
    """Univariate polynomial in x from ascending coefficients."""
    ring = ring or x_ring()
    x = ring.gens[0]
    out = ring.zero
    for r, c in enumerate(coeffs):
        if c:
            out += ring(c) * x**r
    return out


def poly_coeffs(p: PolyElement, var: str = "x") -> list:
    """Ascending coefficients of p in ``var``; entries live in the same ring."""
    ring = p.ring
    i = ring_index(ring, var)
    if p == 0:
        return [ring.zero]
    deg = p.degree(i)
    out = [ring.zero for _ in range(deg + 1)]
    for monom, c in p.terms():
        rest = list(monom)
        e = rest[i]
        rest[i] = 0
        out[e] += ring({tuple(rest): c})
    return out


def univariate_coeffs(p: PolyElement) -> list[Rat]:
    """Ascending rational coefficients of a polynomial in x only."""
    if p == 0:
        return [QQ(0)]
    deg = p.degree(0)
    out = [QQ(0)] * (deg + 1)
    for monom, c in p.terms():
        if any(monom[1:]):
            raise ValueError("polynomial depends on variables other than x")
        out[monom[0]] = c
    return out


def monic(p: PolyElement, var: str = "x") -> PolyElement:
    """Normalize so that the leading coefficient in ``var`` is 1 (requires a rational leading coefficient)."""
    lead = poly_coeffs(p, var)[-1]
    if not lead.is_ground:
        raise ValueError("leading coefficient is not a constant")
    return p.quo_ground(lead.LC)


def poly_shift(p: PolyElement, var: str = "x", amount: Any = 1) -> PolyElement:
    """Substitute ``var -> var + amount`` and expand exactly."""
    ring = p.ring
    if var not in [str(s) for s in ring.symbols]:
        return p
    amount = rat(amount) if not isinstance(amount, PolyElement) else amount
    if amount == 0:
        return p
    if ring.ngens == 1 and not isinstance(amount, PolyElement) and ring.domain == QQ:
        return ring.from_list(dup_shift(p.to_dense(), amount, QQ))
    g = gen(ring, var)
    return p.compose(g, g + amount)


def forward_difference(p: PolyElement, var: str = "x", order: int = 1) -> PolyElement:
    for _ in range(order):
        p = poly_shift(p, var, 1) - p
    return p


def binomial_poly(r: int, ring: PolyRing | None = None) -> PolyElement:
    """binom(x, r) as a degree-r polynomial in x."""
    ring = ring or x_ring()
    x = ring.gens[0]
    out = ring.one
    for i in range(r):
        out *= x - i
    return out.quo_ground(QQ(math.factorial(r)))


def discrete_wronskian(fs: Sequence[PolyElement], var: str = "x") -> PolyElement:
    """det f_i(var + j - 1) over i, j; computed on the difference form det Delta^(j-1) f_i."""
    if not fs:
        raise ValueError("discrete Wronskian needs at least one function")
    rows = []
    for f in fs:
        row = [f]
        for _ in range(len(fs) - 1):
            row.append(poly_shift(row[-1], var, 1) - row[-1])
        rows.append(row)
    return det(rows)


def ratfunc_shift(f: FracElement, var: str = "x", amount: Any = 1) -> FracElement:
    num = poly_shift(f.numer, var, amount)
    den = poly_shift(f.denom, var, amount)
    if isinstance(amount, PolyElement):
        return f.field(num) / f.field(den)
    # a shift keeps the fraction reduced and the leading coefficients unchanged
    return f.raw_new(num, den)


def ratfunc_eval(f: FracElement, var: str, value: Any) -> FracElement:
    """Substitute a constant for one variable of a rational function."""
    i = ring_index(f.field, var)
    num = _subs(f.numer, i, value)
    den = _subs(f.denom, i, value)
    if den == 0:
        raise ZeroDivisionError("pole at the substituted value")
    return f.field(num) / f.field(den)


def _subs(p: PolyElement, i: int, value: Any) -> PolyElement:
    return p.subs(p.ring.gens[i], value)


# ---------------------------------------------------------------------------
# truncated series


@dataclass(frozen=True)
class TruncSeries:
    """Taylor/Laurent coefficients c_0..c_order of a series about ``center``."""

    center: Any
    coefficients: tuple

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        n = min(self.order, other.order) + 1
        return TruncSeries(self.center, tuple(a + b for a, b in zip(self.coefficients[:n], other.coefficients[:n])))

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        n = min(self.order, other.order) + 1
        out = []
        for r in range(n):
            acc = self.coefficients[0] * other.coefficients[r]
            for i in range(1, r + 1):
                acc = acc + self.coefficients[i] * other.coefficients[r - i]
            out.append(acc)
        return TruncSeries(self.center, tuple(out))

    def scale(self, c: Any) -> "TruncSeries":
        return TruncSeries(self.center, tuple(c * a for a in self.coefficients))

    def _check(self, other: "TruncSeries") -> None:
        if self.center != other.center:
            raise ValueError("series expanded about different centers")


# ---------------------------------------------------------------------------
# dense linear algebra


def _is_numeric_scalar(v: Any) -> bool:
    return isinstance(v, (float, complex, np.floating, np.complexfloating))


def _is_numeric(M) -> bool:
    if isinstance(M, np.ndarray) and M.dtype != object:
        return True
    return any(_is_numeric_scalar(v) for row in M for v in row)


def _coerce(v: Any) -> Any:
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        return QQ.convert(v)
    return v


def _exquo(a: Any, b: Any) -> Any:
    if isinstance(a, PolyElement):
        if isinstance(b, PolyElement):
            return a.exquo(b)
        return a.quo_ground(b)
    return a / b


def det(M) -> Any:
    """Determinant: fraction-free Bareiss for exact rings, pivoted LU for floats."""
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return QQ(1)
    if _is_numeric(M):
        return complex(np.linalg.det(np.asarray(M, dtype=complex)))
    A = [[_coerce(v) for v in row] for row in M]
    sign = 1
    prev = None
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return A[k][k] * 0
        pivot = A[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = A[i][j] * pivot - A[i][k] * A[k][j]
                A[i][j] = num if prev is None else _exquo(num, prev)
            A[i][k] = A[i][k] * 0
        prev = pivot
    out = A[n - 1][n - 1]
    return out if sign == 1 else -out


def cofactor_det(M) -> Any:
    """Laplace expansion along the first row; an independent oracle for small sizes."""
    n = len(M)
    if n == 0:
        return QQ(1)
    if n == 1:
        return _coerce(M[0][0])
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in (list(r) for r in M[1:])]
        term = _coerce(M[0][j]) * cofactor_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class LinearSolution:
    """Particular solution plus a basis of the homogeneous nullspace."""

    particular: list
    nullspace: list = field(default_factory=list)

    @property
    def unique(self) -> bool:
        return not self.nullspace


def solve_linear(M, b, tol: float | None = None) -> LinearSolution:
    """Gauss-Jordan elimination over a field.

    Exact entries use the first nonzero pivot; floating entries use partial
    pivoting with a relative rank tolerance.  Raises ``NoSolution`` when the
    system is inconsistent.
    """
    rows = len(M)
    cols = len(M[0]) if rows else 0
    if len(b) != rows:
        raise ValueError("right-hand side length does not match the matrix")
    numeric = _is_numeric(M) or any(_is_numeric_scalar(v) for v in b)
    if numeric:
        A = np.array(M, dtype=complex).reshape(rows, cols)
        rhs = np.array(b, dtype=complex)
        return _solve_numeric(A, rhs, tol if tol is not None else 1e-12)
    A = [[_to_field(_coerce(v)) for v in row] + [_to_field(_coerce(bi))] for row, bi in zip(M, b)]
    zero = A[0][0] * 0 if rows else QQ(0)
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c] if not isinstance(A[r][c], Rat) else QQ(1) / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(rows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [vi - f * vr for vi, vr in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if A[i][cols] != 0:
            raise NoSolution("inconsistent linear system", witness=i)
    particular = [zero] * cols
    for i, c in enumerate(pivots):
        particular[c] = A[i][cols]
    free = [c for c in range(cols) if c not in pivots]
    nullspace = []
    for fcol in free:
        vec = [zero] * cols
        vec[fcol] = zero + 1
        for i, c in enumerate(pivots):
            vec[c] = -A[i][fcol]
        nullspace.append(vec)
    return LinearSolution(particular, nullspace)


def _to_field(v: Any) -> Any:
    if isinstance(v, PolyElement):
        F = v.ring.to_field()
        return F(v)
    return v


def _solve_numeric(A: np.ndarray, b: np.ndarray, tol: float) -> LinearSolution:
    rows, cols = A.shape
    aug = np.hstack([A, b[:, None]])
    scale = max(np.abs(A).max(initial=0.0), 1.0)
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(aug[r:, c])))
        if abs(aug[p, c]) <= tol * scale:
            continue
        aug[[r, p]] = aug[[p, r]]
        aug[r] /= aug[r, c]
        for i in range(rows):
            if i != r:
                aug[i] -= aug[i, c] * aug[r]
        pivots.append(c)
        r += 1
    bscale = max(scale, np.abs(b).max(initial=0.0))
    for i in range(r, rows):
        if abs(aug[i, cols]) > tol * bscale * 1e3:
            raise NoSolution("inconsistent linear system", witness=i)
    particular = np.zeros(cols, dtype=complex)
    for i, c in enumerate(pivots):
        particular[c] = aug[i, cols]
    nullspace = []
    for fcol in (c for c in range(cols) if c not in pivots):
        vec = np.zeros(cols, dtype=complex)
        vec[fcol] = 1
        for i, c in enumerate(pivots):
            vec[c] = -aug[i, fcol]
        nullspace.append(vec)
    return LinearSolution(list(particular), nullspace)


def matmul(A, B) -> list:
    """Product of exact matrices stored as nested lists."""
    inner = len(B)
    return [[_sum(A[i][k] * B[k][j] for k in range(inner)) for j in range(len(B[0]))] for i in range(len(A))]


def _sum(it):
    total = None
    for v in it:
        total = v if total is None else total + v
    return QQ(0) if total is None else total


def rank(M) -> int:
    """Exact rank over the field of fractions of the entries."""
    if not M or not M[0]:
        return 0
    sol_cols = len(M[0])
    A = [[_to_field(_coerce(v)) for v in row] for row in M]
    r = 0
    for c in range(sol_cols):
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        for i in range(r + 1, len(A)):
            if A[i][c] != 0:
                f = A[i][c] / A[r][c]
                A[i] = [vi - f * vr for vi, vr in zip(A[i], A[r])]
        r += 1
        if r == len(A):
            break
    return r


# ---------------------------------------------------------------------------
# JSON helpers


def poly_to_json(p: PolyElement) -> list[dict]:
    return [{"exponents": list(m), "coefficient": rat_to_str(c)} for m, c in sorted(p.terms())]


def poly_from_json(records: list[dict], ring: PolyRing | None = None) -> PolyElement:
    ring = ring or x_ring()
    terms = {}
    for rec in records:
        exps = tuple(int(e) for e in rec["exponents"])
        if len(exps) != ring.ngens:
            raise ValueError("exponent vector does not match the ring")
        terms[exps] = rat(rec["coefficient"])
    return ring(terms)


def complex_to_json(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def scalar_from_json(v: Any) -> Any:
    """Entries are "p/q" strings, integers, or {"re", "im"} objects."""
    if isinstance(v, dict):
        return complex(float(v["re"]), float(v["im"]))
    if isinstance(v, float):
        return v
    return rat(v)


def scalar_to_json(v: Any) -> Any:
    if isinstance(v, (complex, float, np.complexfloating, np.floating)):
        return complex_to_json(v)
    return rat_to_str(v)
