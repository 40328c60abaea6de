"""N-tuples of polynomials and the Bethe ansatz equations in divisibility form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from sympy import QQ
from sympy.polys.rings import PolyElement

from .errors import NonGenericInput
from .exactcore import (
    frac_field,
    monic,
    poly_from_coeffs,
    poly_shift,
    rat,
    rat_to_str,
    ratfunc_shift,
    univariate_coeffs,
    x_ring,
)


@dataclass(frozen=True)
class SolutionTuple:
    """Monic polynomials y_1..y_N in x, indexed cyclically from 1."""

    polys: tuple

    def __post_init__(self):
        if len(self.polys) < 2:
            raise ValueError("a tuple needs at least two polynomials")
        R = x_ring()
        normalized = []
        for p in self.polys:
            p = R(p) if not isinstance(p, PolyElement) or p.ring != R else p
            if p == 0:
                raise ValueError("zero polynomial in a solution tuple")
            normalized.append(monic(p))
        object.__setattr__(self, "polys", tuple(normalized))

    @classmethod
    def of(cls, polys: Sequence[Any]) -> "SolutionTuple":
        return cls(tuple(polys))

    @classmethod
    def empty(cls, N: int) -> "SolutionTuple":
        return cls(tuple(x_ring().one for _ in range(N)))

    @property
    def N(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(max(p.degree(0), 0) for p in self.polys)

    def y(self, n: int) -> PolyElement:
        """y_n with cyclic index, y_{N+n} = y_n."""
        return self.polys[(n - 1) % self.N]

    def replace(self, n: int, p: PolyElement) -> "SolutionTuple":
        polys = list(self.polys)
        polys[(n - 1) % self.N] = p
        return SolutionTuple(tuple(polys))

    def to_json(self) -> dict:
        return {"N": self.N, "polys": [[rat_to_str(c) for c in univariate_coeffs(p)] for p in self.polys]}

    @classmethod
    def from_json(cls, data: dict) -> "SolutionTuple":
        polys = [poly_from_coeffs([rat(c) for c in coeffs]) for coeffs in data["polys"]]
        if int(data["N"]) != len(polys):
            raise ValueError("N does not match the number of polynomials")
        return cls(tuple(polys))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass(frozen=True)
class BAEReport:
    generic: bool
    satisfied: bool
    failing_equations: list = field(default_factory=list)


def _coprime(a: PolyElement, b: PolyElement) -> bool:
    return a.gcd(b).degree(0) <= 0


def is_generic(y: SolutionTuple) -> bool:
    """No y_n shares a zero with y_n(x+1), y_{n-1}(x+1) or y_{n+1}(x)."""
    for n in range(1, y.N + 1):
        yn = y.y(n)
        if not _coprime(yn, poly_shift(yn)):
            return False
        if not _coprime(yn, poly_shift(y.y(n - 1))):
            return False
        if not _coprime(yn, y.y(n + 1)):
            return False
    return True


def bae_remainder(y: SolutionTuple, n: int) -> PolyElement:
    """Remainder of y_{n-1}(x+1)y_n(x-1)y_{n+1}(x) + y_{n-1}(x)y_n(x+1)y_{n+1}(x-1) modulo y_n."""
    prev, cur, nxt = y.y(n - 1), y.y(n), y.y(n + 1)
    total = poly_shift(prev) * poly_shift(cur, "x", -1) * nxt + prev * poly_shift(cur) * poly_shift(nxt, "x", -1)
    return total.rem(cur)


def verify_bae(y: SolutionTuple) -> BAEReport:
    failing = []
    for n in range(1, y.N + 1):
        r = bae_remainder(y, n)
        if r != 0:
            failing.append((n, r))
    return BAEReport(generic=is_generic(y), satisfied=not failing, failing_equations=failing)


def compute_Q(k: Sequence[int]) -> int:
    """sum k_j(k_j - 1) - sum k_j k_{j+1}, cyclically closed."""
    N = len(k)
    return sum(kj * (kj - 1) for kj in k) - sum(k[j] * k[(j + 1) % N] for j in range(N))


def L_functions(y: SolutionTuple) -> list:
    """L_n = y_n(x+1)y_{n+1}(x-1) / (y_n(x)y_{n+1}(x)) as elements of QQ(x)."""
    F = frac_field(("x",))
    out = []
    for n in range(1, y.N + 1):
        cur, nxt = F(y.y(n)), F(y.y(n + 1))
        out.append(ratfunc_shift(cur) * ratfunc_shift(nxt, "x", -1) / (cur * nxt))
    return out


def verify_L_identity(y: SolutionTuple) -> bool:
    if not is_generic(y):
        raise NonGenericInput("sum of L-functions is only asserted for generic tuples")
    return sum(L_functions(y), frac_field(("x",)).zero) == QQ(y.N)
