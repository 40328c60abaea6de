"""Wronskian generation of Bethe solutions from the trivial tuple."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from math import comb
from typing import Any, Sequence

from sympy import QQ
from sympy.polys.rings import PolyElement

from .bethe import SolutionTuple, is_generic
from .errors import DegreeNotIncreasing, NoSolution, NotFertile
from .exactcore import (
    discrete_wronskian,
    poly_from_coeffs,
    poly_shift,
    rat,
    rat_to_str,
    solve_linear,
    univariate_coeffs,
)


@dataclass(frozen=True)
class GenerationStep:
    j: int
    c: Any


@dataclass(frozen=True)
class GenerationPath:
    J: tuple
    c: tuple

    def __post_init__(self):
        if len(self.J) != len(self.c):
            raise ValueError("directions and parameters differ in length")
        object.__setattr__(self, "J", tuple(int(j) for j in self.J))
        object.__setattr__(self, "c", tuple(rat(v) for v in self.c))

    @property
    def steps(self) -> list[GenerationStep]:
        return [GenerationStep(j, c) for j, c in zip(self.J, self.c)]

    def to_json(self) -> dict:
        return {"J": list(self.J), "c": [rat_to_str(v) for v in self.c]}

    @classmethod
    def from_json(cls, data: dict) -> "GenerationPath":
        return cls(tuple(data["J"]), tuple(data["c"]))


def new_degree(k: Sequence[int], j: int) -> int:
    N = len(k)
    return k[(j - 2) % N] + k[j % N] + 1 - k[(j - 1) % N]


def degree_transform(k: Sequence[int], j: int) -> tuple[int, ...]:
    """Replace k_j by k_{j-1} + k_{j+1} - k_j + 1 (directions are 1-based and cyclic)."""
    if not 1 <= j <= len(k):
        raise ValueError(f"direction {j} outside 1..{len(k)}")
    out = list(k)
    out[j - 1] = new_degree(k, j)
    return tuple(out)


def is_degree_increasing(k: Sequence[int], j: int) -> bool:
    return new_degree(k, j) > k[(j - 1) % len(k)]


def _shifted_monomial(r: int) -> list:
    """Ascending coefficients of (x+1)^r."""
    return [QQ(comb(r, i)) for i in range(r + 1)]


def _poly_mul_coeffs(a: list, b: list) -> list:
    out = [QQ(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def fertility_partner(y: SolutionTuple, j: int) -> tuple[PolyElement, Any]:
    """Monic solution p of W(y_j, p) = kappa * y_{j-1}(x+1) y_{j+1}(x) with zero x^{k_j} coefficient.

    Returns ``(p, kappa)``.  Raises ``NotFertile`` when no polynomial solution exists.
    """
    k = y.degrees
    kj = k[j - 1]
    d = new_degree(k, j)
    if d <= kj:
        raise DegreeNotIncreasing(f"direction {j} does not raise degree {kj}", witness=(k, j))
    yj = univariate_coeffs(y.y(j))
    yj1 = univariate_coeffs(poly_shift(y.y(j)))
    rhs = univariate_coeffs(poly_shift(y.y(j - 1)) * y.y(j + 1))
    size = kj + d + 1
    # W(y, x^r) = y(x)(x+1)^r - y(x+1)x^r
    def column(r: int) -> list:
        a = _poly_mul_coeffs(yj, _shifted_monomial(r))
        b = [QQ(0)] * r + yj1
        col = [QQ(0)] * size
        for i, v in enumerate(a):
            col[i] += v
        for i, v in enumerate(b):
            col[i] -= v
        return col

    unknown_powers = [r for r in range(d) if r != kj]
    cols = [column(r) for r in unknown_powers]
    cols.append([-v for v in rhs] + [QQ(0)] * (size - len(rhs)))
    target = [-v for v in column(d)]
    M = [[col[i] for col in cols] for i in range(size)]
    try:
        sol = solve_linear(M, target)
    except NoSolution as exc:
        raise NotFertile(f"no polynomial partner in direction {j}", witness=(y.to_json(), j)) from exc
    if not sol.unique:
        raise NotFertile(f"partner in direction {j} is not unique", witness=(y.to_json(), j))
    coeffs = [QQ(0)] * (d + 1)
    for r, v in zip(unknown_powers, sol.particular):
        coeffs[r] = v
    coeffs[d] = QQ(1)
    kappa = sol.particular[-1]
    if kappa == 0:
        raise NotFertile("partner Wronskian vanishes", witness=(y.to_json(), j))
    return poly_from_coeffs(coeffs), kappa


def generate(y: SolutionTuple, j: int, c: Any) -> SolutionTuple:
    """Replace y_j by its degree-raising Wronskian partner plus c*y_j."""
    if not 1 <= j <= y.N:
        raise ValueError(f"direction {j} outside 1..{y.N}")
    partner, _ = fertility_partner(y, j)
    out = y.replace(j, partner + rat(c) * y.y(j))
    if not is_generic(out):
        warnings.warn(f"generated tuple is not generic at c={c}", RuntimeWarning, stacklevel=2)
    return out


def multistep(path: GenerationPath, N: int) -> SolutionTuple:
    """Fold ``generate`` over the path starting from (1, ..., 1)."""
    y = SolutionTuple.empty(N)
    for index, (j, c) in enumerate(zip(path.J, path.c)):
        if not is_degree_increasing(y.degrees, j):
            raise DegreeNotIncreasing(f"step {index} (direction {j}) is not degree increasing", step=index)
        y = generate(y, j, c)
    return y


def degree_increasing_paths(N: int, max_length: int) -> list[tuple[int, ...]]:
    """All direction sequences of length <= max_length that raise degrees at every step."""
    out = [()]
    frontier = [((), (0,) * N)]
    for _ in range(max_length):
        nxt = []
        for J, k in frontier:
            for j in range(1, N + 1):
                if is_degree_increasing(k, j):
                    nxt.append((J + (j,), degree_transform(k, j)))
        out.extend(J for J, _ in nxt)
        frontier = nxt
    return out


def wronskian_multiple(y: SolutionTuple, j: int, p: PolyElement):
    """Scalar kappa with W(y_j, p) = kappa * y_{j-1}(x+1)y_{j+1}(x), or None."""
    w = discrete_wronskian([y.y(j), p])
    target = poly_shift(y.y(j - 1)) * y.y(j + 1)
    q, r = divmod(w, target)
    if r != 0 or q.degree(0) > 0:
        return None
    return q.LC if q != 0 else QQ(0)


def path_to_json(path: GenerationPath) -> str:
    return json.dumps(path.to_json())
