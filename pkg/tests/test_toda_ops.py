import random
from fractions import Fraction

import pytest
from sympy import QQ

from baeflows.bethe import SolutionTuple
from baeflows.errors import InconsistentWave, TruncationExceeded
from baeflows.exactcore import frac_field, ratfunc_eval, ratfunc_shift, x_ring
from baeflows.linearproblem import build_psi_family
from baeflows.periodic_inverse import NilpotentSeed, build_family, family_ring, seed_to_A
from baeflows.toda_ops import (
    PseudoDiffOp,
    WaveFamily,
    eigen_residual,
    extract_L,
    flow_residual,
    op_multiply,
    op_power,
    potential_residues,
    residue,
    shift_op,
    vflow_check,
    wave_from_family,
    wave_from_stripped,
    _frac_diff,
)

from seeds import FIXED_SEED

N = 3
ONE_ROOT_SEED = NilpotentSeed(3, 1, ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)))
TRIVIAL_SEED = NilpotentSeed(3, 0, ((1, 0, 0), (0, 1, 0), (0, 0, 1)))


@pytest.fixture(scope="module")
def fixed_family():
    return build_family(seed_to_A(FIXED_SEED))


def seq(rng):
    return tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(N))


def test_shift_powers():
    T = shift_op(N)
    for m in (1, 2, 3):
        P = op_power(T, m)
        assert P.plus().coeffs == shift_op(N, m).coeffs
        assert residue(P) == (0,) * N


def test_inverse_shift_rule():
    rng = random.Random(1)
    f, g = seq(rng), seq(rng)
    a = PseudoDiffOp(N, 0, 1, {1: f}, True)
    b = PseudoDiffOp(N, 0, 1, {1: g}, True)
    prod = op_multiply(a, b)
    assert prod.coefficient(2) == tuple(f[n] * g[(n - 1) % N] for n in range(N))
    assert prod.coefficient(1) == (0,) * N


def test_square_nonnegative_part():
    rng = random.Random(2)
    w0, w1 = seq(rng), seq(rng)
    L = PseudoDiffOp(N, 1, 1, {-1: (1,) * N, 0: w0, 1: w1}, True)
    P = op_power(L, 2).plus()
    assert P.coefficient(-2) == (1,) * N
    assert P.coefficient(-1) == tuple(w0[n] + w0[(n + 1) % N] for n in range(N))
    assert P.coefficient(0) == tuple(w0[n] ** 2 + w1[n] + w1[(n + 1) % N] for n in range(N))


def test_residue_of_constant():
    f0 = (Fraction(1, 2), 3, -4)
    assert residue(PseudoDiffOp(N, 0, 0, {0: f0}, True)) == f0


def test_truncation_is_enforced():
    L = PseudoDiffOp(N, 1, 2, {-1: (1,) * N, 2: (1, 1, 1)})
    with pytest.raises(TruncationExceeded):
        L.coefficient(3)
    with pytest.raises(TruncationExceeded):
        op_multiply(L, L, depth=5)
    assert op_multiply(L, L).depth == 1


def test_free_wave_family():
    w = WaveFamily(N, ((), (), ()))
    L = extract_L(w, 3)
    assert all(L.coefficient(s) == (0,) * N for s in range(4))
    assert L.coefficient(-1) == (1,) * N


def test_single_root_family_operator():
    X = x_ring().gens[0]
    y = SolutionTuple.of([X, 1, 1])
    w = wave_from_stripped(build_psi_family(y))
    L = extract_L(w, 3)
    assert all(r == 0 for r in eigen_residual(L, w))
    F = frac_field(("x", "z"))
    x = F.gens[0]
    # w_0 at the first site: xi_{1,1} - xi_{2,1} with xi_{1,1} = -1/x
    assert L.coefficient(0)[1] == -1 / x


def test_truncation_monotone(fixed_family):
    w = wave_from_family(fixed_family)
    shallow, deep = extract_L(w, 2), extract_L(w, 4)
    for s in range(3):
        assert shallow.coefficient(s) == deep.coefficient(s)


def test_inconsistent_wave_rejected(fixed_family):
    w = wave_from_family(fixed_family)
    rows = [list(r) for r in w.xi]
    rows[1][0] = rows[1][0] + 1
    with pytest.raises(InconsistentWave):
        extract_L(WaveFamily(N, tuple(map(tuple, rows))), 3)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_flow_equations_hold(fixed_family, m):
    w = wave_from_family(fixed_family)
    assert all(r == 0 for r in flow_residual(w, m))


def test_potential_residues_are_rational(fixed_family):
    F = potential_residues(fixed_family, 2)
    assert len(F) == N
    assert all(f.numer.ring.ngens >= 1 for f in F)


def exact_vflow_defect(fam, m):
    """d/dt_m ln v_n at t = 0 as an exact rational function minus F_{m,n}(x+1) - F_{m,n}(x)."""
    ring = family_ring(fam.M)
    Fld = frac_field(tuple(str(s) for s in ring.symbols))
    Fm = potential_residues(fam, m)
    out = []
    for n in range(fam.N):
        yn, yn1 = Fld(fam.y[n]), Fld(fam.y[n + 1])
        v = yn * ratfunc_shift(yn1) / (ratfunc_shift(yn) * yn1)
        dlog = _frac_diff(v, f"t{m}") / v
        for j in range(1, fam.M + 1):
            dlog = ratfunc_eval(dlog, f"t{j}", 0)
        f = Fm[n]
        rhs = ratfunc_shift(f) - f
        lhs = dlog.numer.as_expr() / dlog.denom.as_expr()
        out.append((lhs - rhs.numer.as_expr() / rhs.denom.as_expr()).simplify())
    return out


@pytest.mark.parametrize("m", [1, 2])
def test_vflow_exact_identity(fixed_family, m):
    assert all(d == 0 for d in exact_vflow_defect(fixed_family, m))


def test_vflow_trivial_family():
    fam = build_family(seed_to_A(TRIVIAL_SEED))
    assert vflow_check(fam, 1) == 0


@pytest.mark.parametrize("seed, m, bound", [(ONE_ROOT_SEED, 1, 1e-6), (FIXED_SEED, 2, 1e-5), (FIXED_SEED, 1, 1e-6)])
def test_vflow_numeric(seed, m, bound):
    fam = build_family(seed_to_A(seed))
    assert vflow_check(fam, m) <= bound
