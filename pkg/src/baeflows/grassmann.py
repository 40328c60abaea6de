"""Integer-set combinatorics, Grassmannian points with special bases, tau and
Baker-Akhiezer functions, flags of KdV subspaces and their generation and flows.

Laurent polynomials are dicts ``{power: rational}``.  A subspace W with
z^q H_+ inside W is stored as a reduced echelon basis of W / z^q H_+ together
with the tail exponent q.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from sympy import QQ
from sympy.polys.rings import PolyElement

from .bethe import SolutionTuple
from .errors import FlagInvalid, LineCoincidesWithOld, NotInLeadingTerm, NotKdV
from .exactcore import (
    DEFAULT_TIMES,
    det,
    discrete_wronskian,
    frac_field,
    gen,
    poly_coeffs,
    poly_shift,
    rat,
    rat_to_str,
)
from .generation import fertility_partner
from .periodic_inverse import chi, family_ring, restrict_to_x

Laurent = dict


# ---------------------------------------------------------------------------
# subsets of virtual cardinal zero


class VCZSubset:
    """S = {s_0 < s_1 < ...} with s_j = j beyond the stored entries."""

    def __init__(self, entries: Iterable[int]):
        entries = tuple(int(s) for s in entries)
        if any(b <= a for a, b in zip(entries, entries[1:])):
            raise ValueError("entries must be strictly increasing")
        if entries and entries[-1] > len(entries) - 1:
            raise ValueError("last entry exceeds the depth; the tail would not be s_j = j")
        # a trailing s_j = j carries no information
        while entries and entries[-1] == len(entries) - 1:
            entries = entries[:-1]
        self.entries = entries

    @property
    def depth(self) -> int:
        return max(len(self.entries) - 1, 0)

    @property
    def tail(self) -> int:
        """Every integer >= tail belongs to S."""
        return len(self.entries)

    def element(self, j: int) -> int:
        return self.entries[j] if j < len(self.entries) else j

    def padded(self, depth: int) -> tuple[int, ...]:
        """s_0..s_depth."""
        return tuple(self.element(j) for j in range(depth + 1))

    def __contains__(self, a: int) -> bool:
        return a >= self.tail or a in self.entries

    def __eq__(self, other) -> bool:
        return isinstance(other, VCZSubset) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        return f"VCZSubset({list(self.entries)} + [{self.tail}, ...))"

    def partition(self) -> tuple[int, ...]:
        """Nonzero parts of lambda_i = i - s_i."""
        return tuple(p for p in (j - s for j, s in enumerate(self.entries)) if p)

    @property
    def weight(self) -> int:
        return sum(self.partition())

    @classmethod
    def from_partition(cls, parts: Sequence[int]) -> "VCZSubset":
        parts = [int(p) for p in parts]
        if any(p < 0 for p in parts) or any(b > a for a, b in zip(parts, parts[1:])):
            raise ValueError("a partition is a non-increasing sequence of non-negative integers")
        return cls(j - p for j, p in enumerate(parts))

    def below(self, bound: int) -> list[int]:
        """Elements smaller than ``bound``."""
        return [a for a in self.entries if a < bound] + list(range(self.tail, bound))

    def shifted_subset_of(self, k: int, other: "VCZSubset") -> bool:
        """S + k contained in ``other``."""
        return all(a + k in other for a in self.below(max(self.tail, other.tail - k)))

    @classmethod
    def from_set(cls, finite: Iterable[int], tail: int) -> "VCZSubset":
        """The set ``finite`` together with all integers >= tail."""
        entries = sorted({a for a in finite if a < tail})
        if len(entries) != tail:
            raise ValueError("set is not of virtual cardinal zero")
        return cls(entries)


S_EMPTY = VCZSubset(())


# ---------------------------------------------------------------------------
# KdV subsets and mKdV tuples of subsets


def is_leading_term(A: Sequence[int], N: int) -> bool:
    A = list(A)
    return (
        len(A) == N
        and 2 * sum(A) == N * (N - 1)
        and len({a % N for a in A}) == N
    )


@dataclass(frozen=True)
class KdVSubset:
    S: VCZSubset
    N: int

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("period must be at least 2")
        if not self.S.shifted_subset_of(self.N, self.S):
            raise NotKdV(f"S + {self.N} is not contained in S", witness=list(self.S.entries))

    @property
    def leading_term(self) -> tuple[int, ...]:
        return leading_term(self)

    @property
    def weight(self) -> int:
        return self.S.weight

    @classmethod
    def from_leading_term(cls, A: Sequence[int], N: int) -> "KdVSubset":
        if not is_leading_term(A, N):
            raise NotKdV("not the leading term of a KdV subset", witness=list(A))
        top = max(A) + 1
        members = {a + k * N for a in A for k in range((top - a) // N + 1)}
        return cls(VCZSubset.from_set(members, top), N)


def leading_term(K: KdVSubset) -> tuple[int, ...]:
    """The unique A with S = A union (S + N)."""
    S, N = K.S, K.N
    A = tuple(a for a in S.below(S.tail + N) if a - N not in S)
    if not is_leading_term(A, N):
        raise NotKdV("leading term fails the sum/residue test", witness=list(A))
    return A


def mutate_subset(K: KdVSubset, a: int) -> KdVSubset:
    """S[a] = {a + 1 - N} union (S + 1)."""
    if a not in leading_term(K):
        raise NotInLeadingTerm(f"{a} is not in the leading term", witness=list(leading_term(K)))
    S, N = K.S, K.N
    members = [s + 1 for s in S.below(S.tail)] + [a + 1 - N]
    return KdVSubset(VCZSubset.from_set(members, S.tail + 1), N)


@dataclass(frozen=True)
class MKdVSubsetTuple:
    subsets: tuple

    def __post_init__(self):
        subs = tuple(self.subsets)
        if len(subs) < 2 or len({K.N for K in subs}) != 1 or subs[0].N != len(subs):
            raise ValueError("need N KdV subsets of period N")
        for i, K in enumerate(subs):
            nxt = subs[(i + 1) % len(subs)]
            if not K.S.shifted_subset_of(1, nxt.S):
                raise ValueError(f"S_{i + 1} + 1 is not contained in S_{(i + 1) % len(subs) + 1}")
        object.__setattr__(self, "subsets", subs)

    @property
    def N(self) -> int:
        return len(self.subsets)

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(K.weight for K in self.subsets)

    @classmethod
    def empty(cls, N: int) -> "MKdVSubsetTuple":
        return cls(tuple(KdVSubset(S_EMPTY, N) for _ in range(N)))

    @classmethod
    def from_kdv(cls, K: KdVSubset, sigma: Sequence[int]) -> "MKdVSubsetTuple":
        """S_i = {a_sigma(1) + i - N, ..., a_sigma(i) + i - N} union (S + i); sigma is 0-based."""
        N = K.N
        if sorted(sigma) != list(range(N)):
            raise ValueError("sigma must be a permutation of 0..N-1")
        A = leading_term(K)
        out = []
        for i in range(1, N + 1):
            members = [A[sigma[r]] + i - N for r in range(i)] + [s + i for s in K.S.below(K.S.tail)]
            out.append(KdVSubset(VCZSubset.from_set(members, K.S.tail + i), N))
        return cls(tuple(out))

    def mutation(self, i: int) -> "MKdVSubsetTuple":
        """The unique tuple differing from this one at position i (1-based) only."""
        N = self.N
        prev, cur, nxt = self.subsets[(i - 2) % N], self.subsets[i - 1], self.subsets[i % N]
        found = []
        for a in leading_term(prev):
            cand = mutate_subset(prev, a)
            if cand.S != cur.S and cand.S.shifted_subset_of(1, nxt.S):
                found.append(cand)
        if len(found) != 1:
            raise RuntimeError(f"expected a unique mutation at position {i}, found {len(found)}")
        subs = list(self.subsets)
        subs[i - 1] = found[0]
        return MKdVSubsetTuple(tuple(subs))

    def is_degree_decreasing(self, i: int) -> bool:
        return self.mutation(i).subsets[i - 1].weight < self.subsets[i - 1].weight

    def reduction_path(self) -> list[int]:
        """Positions of degree decreasing mutations leading to the trivial tuple."""
        path, cur = [], self
        while any(cur.weights):
            for i in range(1, cur.N + 1):
                if cur.is_degree_decreasing(i):
                    path.append(i)
                    cur = cur.mutation(i)
                    break
            else:
                raise RuntimeError("no degree decreasing mutation found")
        return path


# ---------------------------------------------------------------------------
# Laurent polynomials and finitely presented subspaces


def laurent(v: Mapping[Any, Any]) -> Laurent:
    """Normalize keys to ints and values to exact rationals, dropping zeros."""
    out = {}
    for p, c in v.items():
        c = rat(c)
        if c:
            out[int(p)] = c
    return out


def order(v: Laurent) -> int:
    if not v:
        raise ValueError("the zero vector has no order")
    return min(v)


def _axpy(a: Any, x: Laurent, y: Laurent) -> Laurent:
    out = dict(y)
    for p, c in x.items():
        s = out.get(p, QQ(0)) + a * c
        if s:
            out[p] = s
        else:
            out.pop(p, None)
    return out


def _times_z(v: Laurent, k: int) -> Laurent:
    return {p + k: c for p, c in v.items()}


def _truncate(v: Laurent, tail: int) -> Laurent:
    return {p: c for p, c in v.items() if p < tail}


def _echelon(vectors: Iterable[Laurent]) -> list[Laurent]:
    """Reduced echelon form with lowest-order pivots, each pivot normalized to 1."""
    basis: list[Laurent] = []
    for v in vectors:
        v = _reduce(v, basis)
        if not v:
            continue
        p = order(v)
        v = {q: c / v[p] for q, c in v.items()}
        basis = [_axpy(-b.get(p, QQ(0)), v, b) if b.get(p) else b for b in basis]
        basis.append(v)
    return sorted(basis, key=order)


def _reduce(v: Laurent, basis: Sequence[Laurent]) -> Laurent:
    for b in basis:
        p = order(b)
        if v.get(p):
            v = _axpy(-v[p], b, v)
    return v


@dataclass(frozen=True)
class LaurentSpan:
    """span(basis) + z^tail H_+, with basis reduced and truncated below the tail."""

    tail: int
    basis: tuple

    @classmethod
    def of(cls, generators: Iterable[Mapping], tail: int) -> "LaurentSpan":
        gens = [_truncate(laurent(g), tail) for g in generators]
        return cls(int(tail), tuple(_echelon(gens)))

    @property
    def virtual_dimension(self) -> int:
        return len(self.basis) - self.tail

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(order(b) for b in self.basis)

    def reduce(self, v: Mapping) -> Laurent:
        return _reduce(_truncate(laurent(v), self.tail), self.basis)

    def __contains__(self, v: Mapping) -> bool:
        return not self.reduce(v)

    def contains_span(self, other: "LaurentSpan") -> bool:
        if other.tail < self.tail and any({p: 1} not in self for p in range(other.tail, self.tail)):
            return False
        return all(b in self for b in other.basis)

    def times_z(self, k: int) -> "LaurentSpan":
        return LaurentSpan(self.tail + k, tuple(_times_z(b, k) for b in self.basis))

    def plus(self, vectors: Iterable[Mapping]) -> "LaurentSpan":
        return LaurentSpan.of(list(self.basis) + list(vectors), self.tail)

    def with_tail(self, tail: int) -> "LaurentSpan":
        """Same subspace presented with a larger tail exponent."""
        if tail < self.tail:
            raise ValueError("can only raise the tail")
        extra = [{p: QQ(1)} for p in range(self.tail, tail)]
        return LaurentSpan(tail, tuple(_echelon(list(self.basis) + extra)))

    def complement_vector(self, smaller: "LaurentSpan") -> Laurent:
        """First basis vector of this span (lowest order) not in ``smaller``, reduced modulo it."""
        top = max(self.tail, smaller.tail)
        for b in self.with_tail(top).basis:
            r = smaller.reduce(b)
            if r:
                return r
        raise FlagInvalid("span adds nothing to the smaller space")


# ---------------------------------------------------------------------------
# points of the Grassmannian


class GrassmannPoint:
    """W in Gr_0(H) given by its special basis of minimal depth n (reduced echelon form)."""

    def __init__(self, span: LaurentSpan):
        if span.virtual_dimension != 0:
            raise ValueError(f"subspace has virtual dimension {span.virtual_dimension}, expected 0")
        if span.tail < 1:
            span = span.with_tail(1)
        n = span.tail - 1
        while n > 0 and span.basis[n] == {n: 1}:
            n -= 1
        self.span = LaurentSpan(n + 1, span.basis[: n + 1])

    @classmethod
    def from_basis(cls, vectors: Sequence[Mapping], depth: int | None = None) -> "GrassmannPoint":
        """Span of the vectors plus z^(depth+1) H_+; depth defaults to len(vectors) - 1."""
        depth = len(vectors) - 1 if depth is None else depth
        return cls(LaurentSpan.of(vectors, depth + 1))

    @classmethod
    def trivial(cls) -> "GrassmannPoint":
        return cls.from_basis([{0: 1}])

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Any]]) -> "GrassmannPoint":
        """Point whose polynomial space is spanned by f_k = sum_j a_kj chi_j."""
        d = len(rows) - 1
        return cls.from_basis([{d - j: a for j, a in enumerate(r)} for r in rows], d)

    @property
    def depth(self) -> int:
        return self.span.tail - 1

    @property
    def basis(self) -> tuple:
        return self.span.basis

    def special_basis(self, depth: int | None = None) -> tuple:
        if depth is None or depth == self.depth:
            return self.basis
        if depth < self.depth:
            raise ValueError(f"depth {depth} is below the minimal depth {self.depth}")
        return self.span.with_tail(depth + 1).basis

    def order_subset(self) -> VCZSubset:
        return VCZSubset(self.span.orders)

    def __contains__(self, v: Mapping) -> bool:
        return v in self.span

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrassmannPoint):
            return NotImplemented
        return self.span == other.span

    def __hash__(self) -> int:
        return hash((self.depth, tuple(tuple(sorted(b.items())) for b in self.basis)))

    def __repr__(self) -> str:
        return f"GrassmannPoint(depth={self.depth}, basis={[laurent_to_json(b) for b in self.basis]})"

    def is_kdv(self, N: int) -> bool:
        return self.span.contains_span(self.span.times_z(N))

    def to_json(self) -> dict:
        return {"depth": self.depth, "basis": [laurent_to_json(b) for b in self.basis]}

    @classmethod
    def from_json(cls, data: dict) -> "GrassmannPoint":
        return cls.from_basis([laurent_from_json(b) for b in data["basis"]], data.get("depth"))


def laurent_to_json(v: Mapping) -> dict:
    return {str(p): rat_to_str(c) for p, c in sorted(v.items())}


def laurent_from_json(data: Mapping) -> Laurent:
    return laurent({int(p): rat(c) for p, c in data.items()})


def _f_polynomial(v: Mapping, depth: int, M: int) -> PolyElement:
    """f = sum_p v_p chi_(depth - p)."""
    ring = family_ring(M)
    out = ring.zero
    for p, c in v.items():
        if p > depth:
            raise ValueError("basis vector has terms above the depth")
        out += ring(c) * chi(depth - p, M)
    return out


def f_polynomials(W: GrassmannPoint, depth: int | None = None, M: int = DEFAULT_TIMES) -> list[PolyElement]:
    depth = W.depth if depth is None else depth
    return [_f_polynomial(v, depth, M) for v in W.special_basis(depth)]


def leading_x_coefficient(p: PolyElement) -> Any:
    lead = poly_coeffs(p, "x")[-1]
    if not lead.is_ground:
        raise ValueError("leading x coefficient depends on the times")
    return lead.LC


def tau(W: GrassmannPoint, M: int = DEFAULT_TIMES, depth: int | None = None, normalize: bool = True) -> PolyElement:
    """Discrete Wronskian of the f-polynomials of a special basis; sign fixed so the x-leading coefficient is positive."""
    out = discrete_wronskian(f_polynomials(W, depth, M))
    if normalize and leading_x_coefficient(out) < 0:
        out = -out
    return out


def tau_from_vectors(vectors: Sequence[Mapping], depth: int, M: int = DEFAULT_TIMES) -> PolyElement:
    """Unnormalized tau for an arbitrary basis of W / z^(depth+1) H_+; multilinear in the vectors."""
    return discrete_wronskian([_f_polynomial(laurent(v), depth, M) for v in vectors])


@dataclass(frozen=True)
class GrassmannBA:
    """psi_W = Omega * numerator / tau at a fixed depth; R is monic of z-degree depth + 1."""

    depth: int
    M: int
    numerator: PolyElement
    tau: PolyElement

    @property
    def R(self):
        F = frac_field(tuple(str(s) for s in family_ring(self.M).symbols))
        return F(self.numerator) / F(self.tau)


def baker_W(W: GrassmannPoint, depth: int | None = None, M: int = DEFAULT_TIMES) -> GrassmannBA:
    """Bordered determinant of Delta^l f_k with last row z^l, over the discrete Wronskian."""
    depth = W.depth if depth is None else depth
    fs = f_polynomials(W, depth, M)
    ring = family_ring(M)
    z = gen(ring, "z")
    rows = []
    for f in fs:
        row = [f]
        for _ in range(depth + 1):
            row.append(poly_shift(row[-1]) - row[-1])
        rows.append(row)
    t = det([r[: depth + 1] for r in rows])
    rows.append([z**l for l in range(depth + 2)])
    return GrassmannBA(depth, M, det(rows), t)


def proportional(p: PolyElement, q: PolyElement) -> bool:
    """p = c q for a nonzero constant c (both nonzero)."""
    if p == 0 or q == 0:
        return False
    return p * q.ring(q.LC) == q * p.ring(p.LC)


# ---------------------------------------------------------------------------
# flows


def _exp_coefficients(t: Sequence[Any], count: int) -> list:
    """Coefficients h_0..h_(count-1) of exp(sum_j t_j z^j)."""
    t = [rat(v) for v in t]
    h = [QQ(1)]
    for n in range(1, count):
        acc = sum((j * t[j - 1] * h[n - j] for j in range(1, min(n, len(t)) + 1)), QQ(0))
        h.append(acc / n)
    return h


def flow(W: GrassmannPoint, t: Sequence[Any]) -> GrassmannPoint:
    """exp(sum_j t_j z^j) W, reduced back to a special basis of the same depth."""
    tail = W.span.tail
    gens = []
    for v in W.basis:
        h = _exp_coefficients(t, tail - order(v))
        out: Laurent = {}
        for k, hk in enumerate(h):
            if hk:
                out = _axpy(hk, _times_z(v, k), out)
        gens.append(out)
    return GrassmannPoint(LaurentSpan.of(gens, tail))


def substitute_times(p: PolyElement, t: Sequence[Any]) -> PolyElement:
    """Set t_j to the given rationals (others to zero) and drop to QQ[x]."""
    ring = p.ring
    for j in range(1, len(ring.symbols)):
        name = str(ring.symbols[j])
        if name.startswith("t"):
            k = int(name[1:])
            p = p.subs(ring.gens[j], rat(t[k - 1]) if k <= len(t) else 0)
    return restrict_to_x(p)


def flow_tau_defect(W: GrassmannPoint, t: Sequence[Any]) -> bool:
    """True when tau_{W(t)}(x, 0) and tau_W(x, t) agree up to a nonzero scalar."""
    lhs = restrict_to_x(tau(flow(W, t), M=0))
    rhs = substitute_times(tau(W, M=max(len(t), 1)), t)
    return proportional(lhs, rhs)


# ---------------------------------------------------------------------------
# mKdV tuples of subspaces


@dataclass(frozen=True)
class MKdVSubspaceTuple:
    """KdV subspace W with flag vectors u_1..u_N; V_i = z^N W + span(u_1..u_i), W_i = z^(i-N) V_i."""

    N: int
    W: GrassmannPoint
    flag: tuple

    def __post_init__(self):
        N = self.N
        if N < 2:
            raise FlagInvalid("period must be at least 2")
        if len(self.flag) != N:
            raise FlagInvalid(f"expected {N} flag vectors, got {len(self.flag)}")
        if not self.W.is_kdv(N):
            raise FlagInvalid("z^N W is not contained in W", witness=self.W.to_json())
        V = self.W.span.times_z(N)
        reduced = []
        for i, u in enumerate(self.flag, start=1):
            u = laurent(u)
            if u not in self.W:
                raise FlagInvalid(f"flag vector {i} is not in W", witness=laurent_to_json(u))
            r = V.reduce(u)
            if not r:
                raise FlagInvalid(f"flag vector {i} is dependent on the previous ones", witness=laurent_to_json(u))
            reduced.append(r)
            V = V.plus([r])
        object.__setattr__(self, "flag", tuple(reduced))

    @classmethod
    def trivial(cls, N: int) -> "MKdVSubspaceTuple":
        return cls(N, GrassmannPoint.trivial(), tuple({N - i: QQ(1)} for i in range(1, N + 1)))

    def V(self, i: int) -> LaurentSpan:
        return self.W.span.times_z(self.N).plus(self.flag[:i])

    def points(self) -> list[GrassmannPoint]:
        return [GrassmannPoint(self.V(i).times_z(i - self.N)) for i in range(1, self.N + 1)]

    def taus(self, M: int = DEFAULT_TIMES) -> list[PolyElement]:
        return [tau(P, M) for P in self.points()]

    def order_tuple(self) -> MKdVSubsetTuple:
        return MKdVSubsetTuple(tuple(KdVSubset(P.order_subset(), self.N) for P in self.points()))

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "W_basis": [laurent_to_json(b) for b in self.W.basis],
            "flag_vectors": [laurent_to_json(u) for u in self.flag],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MKdVSubspaceTuple":
        try:
            W = GrassmannPoint.from_basis([laurent_from_json(b) for b in data["W_basis"]])
        except ValueError as exc:
            raise FlagInvalid(str(exc)) from exc
        return cls(int(data["N"]), W, tuple(laurent_from_json(u) for u in data["flag_vectors"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def flag_from_points(points: Sequence[GrassmannPoint]) -> MKdVSubspaceTuple:
    """Recover the flag of an mKdV tuple (W_1, ..., W_N)."""
    N = len(points)
    W = points[-1]
    V = W.span.times_z(N)
    flag = []
    for i, P in enumerate(points, start=1):
        Vi = P.span.times_z(N - i)
        if not Vi.contains_span(V):
            raise FlagInvalid(f"flag is not increasing at step {i}")
        u = Vi.complement_vector(V)
        V = V.plus([u])
        flag.append(u)
    return MKdVSubspaceTuple(N, W, tuple(flag))


def mkdv_from_flag(flag: MKdVSubspaceTuple, M: int = DEFAULT_TIMES) -> tuple[list[GrassmannPoint], list[PolyElement]]:
    """Materialize W_1..W_N, check z W_i inside W_(i+1) cyclically, and return them with their taus."""
    points = flag.points()
    N = flag.N
    for i, P in enumerate(points):
        if not points[(i + 1) % N].span.contains_span(P.span.times_z(1)):
            raise FlagInvalid(f"z W_{i + 1} is not contained in W_{(i + 1) % N + 1}")
    return points, [tau(P, M) for P in points]


@dataclass(frozen=True)
class GenerationData:
    """Spaces and unnormalized taus of one generation step in a shared basis."""

    lower: LaurentSpan
    old_vector: Laurent
    new_vector: Laurent
    depth: int
    shared: tuple


def _generation_data(flag: MKdVSubspaceTuple, i: int) -> GenerationData:
    N = flag.N
    if not 1 <= i <= N:
        raise ValueError(f"direction {i} outside 1..{N}")
    points = flag.points()
    lower = points[(i - 2) % N].span.times_z(1)
    cur = points[i - 1].span
    upper = points[i % N].span.times_z(-1)
    e0 = cur.complement_vector(lower)
    e1 = upper.complement_vector(cur)
    top = max(lower.tail, cur.tail, upper.tail)
    shared = lower.with_tail(top).basis
    return GenerationData(lower, e0, e1, top - 1, shared)


def _line_vector(data: GenerationData, c: Any) -> Laurent:
    if isinstance(c, float) and c in (float("inf"), float("-inf")):
        raise LineCoincidesWithOld("the point at infinity is the old line")
    if isinstance(c, str) and c.strip().lower() in ("inf", "infinity", "oo"):
        raise LineCoincidesWithOld("the point at infinity is the old line")
    return _axpy(rat(c), data.old_vector, data.new_vector)


def generate_flag(flag: MKdVSubspaceTuple, i: int, c: Any) -> MKdVSubspaceTuple:
    """Replace W_i by z W_(i-1) + span(e~ + c e_0) inside z^-1 W_(i+1)."""
    data = _generation_data(flag, i)
    new = GrassmannPoint(data.lower.plus([_line_vector(data, c)]))
    points = flag.points()
    points[i - 1] = new
    return flag_from_points(points)


def generate_line(flag: MKdVSubspaceTuple, i: int, line: Sequence[Any]) -> MKdVSubspaceTuple:
    """Generation by a projective point (a : b), meaning the line of a e~ + b e_0; a = 0 is the old line."""
    a, b = (rat(v) for v in line)
    if a == 0:
        raise LineCoincidesWithOld("the line is the one being replaced", witness=[rat_to_str(a), rat_to_str(b)])
    return generate_flag(flag, i, b / a)


def generation_taus(flag: MKdVSubspaceTuple, i: int, c: Any, M: int = DEFAULT_TIMES) -> tuple[PolyElement, PolyElement, PolyElement]:
    """(tau_{W_i}, tau of the generated space at c, the same at 0), all in one shared basis."""
    data = _generation_data(flag, i)
    shared = list(data.shared)
    old = tau_from_vectors([data.old_vector] + shared, data.depth, M)
    at_c = tau_from_vectors([_line_vector(data, c)] + shared, data.depth, M)
    at_0 = tau_from_vectors([data.new_vector] + shared, data.depth, M)
    return old, at_c, at_0


def wronskian_identity_holds(flag: MKdVSubspaceTuple, i: int, c: Any, M: int = DEFAULT_TIMES) -> bool:
    """W(tau_i, tau~_i) = const tau_(i-1)(x+1) tau_(i+1)(x) for the generation in direction i."""
    N = flag.N
    taus = flag.taus(M)
    new = tau(GrassmannPoint(generate_flag(flag, i, c).points()[i - 1].span), M)
    lhs = discrete_wronskian([taus[i - 1], new])
    rhs = poly_shift(taus[(i - 2) % N]) * taus[i % N]
    return proportional(lhs, rhs)


def is_degree_increasing(flag: MKdVSubspaceTuple, i: int) -> bool:
    old, _, new = generation_taus(flag, i, 0, M=0)
    return new.degree(0) > old.degree(0)


# ---------------------------------------------------------------------------
# graded Baker-Akhiezer functions along a tuple


def graded_bakers(flag: MKdVSubspaceTuple, M: int = DEFAULT_TIMES) -> list[GrassmannBA]:
    """BA functions of W_1..W_N, W_1 again, at depths d, d+1, ..., d+N so z-degrees step by one."""
    points = flag.points()
    base = max(P.depth - i for i, P in enumerate(points))
    out = [baker_W(P, base + i, M) for i, P in enumerate(points)]
    out.append(baker_W(points[0], base + flag.N, M))
    return out


def relation_residuals(flag: MKdVSubspaceTuple, M: int = DEFAULT_TIMES) -> list[PolyElement]:
    """Numerators of R_(i+1) - (1+z) R_i(x+1) + v_i R_i along the graded tuple, closing with z^N R_1."""
    ring = family_ring(M)
    z = gen(ring, "z")
    bas = graded_bakers(flag, M)
    out = []
    for a, b in zip(bas, bas[1:]):
        ya, yb, pa, pb = a.tau, b.tau, a.numerator, b.numerator
        lhs = pb * poly_shift(ya)
        rhs = (1 + z) * poly_shift(pa) * yb - poly_shift(yb) * pa
        out.append(lhs - rhs)
    first, last = bas[0], bas[-1]
    out.append(last.numerator * first.tau - z**flag.N * first.numerator * last.tau)
    return out


# ---------------------------------------------------------------------------
# bridge to the generation pipeline


def solution_from_flag(flag: MKdVSubspaceTuple) -> SolutionTuple:
    """(y_1, ..., y_N) = (tau_{W_1}, ..., tau_{W_N}) at t = 0, made monic."""
    return SolutionTuple.of([restrict_to_x(tau(P, M=0)) for P in flag.points()])


def flag_for_generation_step(flag: MKdVSubspaceTuple, j: int, c: Any) -> MKdVSubspaceTuple:
    """Generation in direction j whose taus reproduce ``generation.generate(y, j, c)``."""
    y = solution_from_flag(flag)
    partner, _ = fertility_partner(y, j)
    kj = y.degrees[j - 1]

    def gen_parameter(cf: Any) -> Any:
        new = solution_from_flag(generate_flag(flag, j, cf)).y(j)
        coeff = poly_coeffs(new)[kj].LC if new.degree(0) >= kj else QQ(0)
        if new - partner != coeff * y.y(j):
            raise FlagInvalid("generated tau is not in the span of the generation partner and y_j")
        return coeff

    c0, c1 = gen_parameter(0), gen_parameter(1)
    return generate_flag(flag, j, (rat(c) - c0) / (c1 - c0))


def flag_from_path(N: int, J: Sequence[int], c: Sequence[Any]) -> MKdVSubspaceTuple:
    flag = MKdVSubspaceTuple.trivial(N)
    for j, cj in zip(J, c):
        flag = flag_for_generation_step(flag, j, cj)
    return flag


def spectral_matrix_from_flag(flag: MKdVSubspaceTuple):
    """Matrix A whose first n + nu rows span the polynomial space of W_n (W_0 = W_N).

    The first nu rows are the special basis of W_N; row nu + n adds a vector of
    W_n outside z W_(n-1).  Row k, introduced at depth d_k, stores a_kj = w_(d_k - j).
    """
    from .periodic_inverse import SpectralMatrixA

    points = flag.points()
    N = flag.N
    nu = points[-1].depth + 1
    vectors = [(nu - 1, v) for v in points[-1].basis]
    prev = points[-1].span
    for n, P in enumerate(points, start=1):
        cur = P.span.with_tail(max(P.span.tail, n + nu))
        if cur.tail != n + nu:
            raise FlagInvalid(f"W_{n} is deeper than the row construction allows")
        vectors.append((n + nu - 1, cur.complement_vector(prev.times_z(1))))
        prev = cur
    width = max(d - min(v) for d, v in vectors) + 1
    rows = tuple(tuple(v.get(d - j, QQ(0)) for j in range(width)) for d, v in vectors)
    return SpectralMatrixA(N, nu, rows)
