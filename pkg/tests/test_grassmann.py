from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from sympy import QQ

from baeflows.errors import FlagInvalid, LineCoincidesWithOld, NotInLeadingTerm, NotKdV
from baeflows.exactcore import discrete_wronskian, gen, poly_shift
from baeflows.generation import GenerationPath, multistep
from baeflows.grassmann import (
    GrassmannPoint,
    KdVSubset,
    LaurentSpan,
    MKdVSubsetTuple,
    MKdVSubspaceTuple,
    S_EMPTY,
    VCZSubset,
    baker_W,
    flag_from_path,
    flag_from_points,
    flow,
    flow_tau_defect,
    generate_flag,
    generate_line,
    generation_taus,
    graded_bakers,
    is_degree_increasing,
    is_leading_term,
    leading_term,
    mkdv_from_flag,
    mutate_subset,
    proportional,
    relation_residuals,
    solution_from_flag,
    spectral_matrix_from_flag,
    tau,
    wronskian_identity_holds,
)
from baeflows.periodic_inverse import build_family, restrict_to_x, seed_to_A

from seeds import FIXED_SEED


def _sample_flag():
    fl = MKdVSubspaceTuple.trivial(3)
    fl = generate_flag(fl, 1, Fraction(3, 2))
    fl = generate_flag(fl, 2, -1)
    return generate_flag(fl, 3, Fraction(1, 3))


SAMPLE = _sample_flag()


# --- subsets -----------------------------------------------------------------


def test_partition_of_example_subset():
    S = VCZSubset((-2, 1, 2, 3))
    assert S.partition() == (2,)
    assert S.weight == 2
    assert VCZSubset.from_partition((2,)) == S


def test_empty_subset_has_empty_partition():
    assert S_EMPTY.partition() == ()
    assert S_EMPTY.weight == 0
    assert all(a in S_EMPTY for a in range(5)) and -1 not in S_EMPTY


@given(st.lists(st.integers(0, 6), max_size=6))
def test_partition_roundtrip(parts):
    parts = sorted(parts, reverse=True)
    S = VCZSubset.from_partition(parts)
    assert S.partition() == tuple(p for p in parts if p)
    assert S.weight == sum(parts)


def test_vcz_rejects_bad_entries():
    with pytest.raises(ValueError):
        VCZSubset((1, 0))
    with pytest.raises(ValueError):
        VCZSubset.from_set({-1, 0, 1}, 1)


def test_leading_term_of_empty():
    K = KdVSubset(S_EMPTY, 3)
    assert leading_term(K) == (0, 1, 2)
    assert is_leading_term((0, 1, 2), 3)
    assert not is_leading_term((0, 3, 0), 3)


@given(st.lists(st.integers(0, 4), max_size=4), st.integers(2, 4))
def test_leading_term_sum_and_residues(parts, N):
    S = VCZSubset.from_partition(sorted(parts, reverse=True))
    try:
        K = KdVSubset(S, N)
    except NotKdV:
        return
    A = leading_term(K)
    assert 2 * sum(A) == N * (N - 1)
    assert sorted(a % N for a in A) == list(range(N))
    assert KdVSubset.from_leading_term(A, N).S == S


def test_non_kdv_subset_rejected():
    with pytest.raises(NotKdV):
        KdVSubset(VCZSubset((-2, 1, 2, 3)), 2)
    with pytest.raises(NotKdV):
        KdVSubset.from_leading_term((0, 0, 3), 3)


def test_mutation_example():
    K2 = mutate_subset(KdVSubset(S_EMPTY, 3), 0)
    assert K2.S == VCZSubset((-2, 1, 2, 3))
    assert leading_term(K2) == (-2, 2, 3)
    with pytest.raises(NotInLeadingTerm):
        mutate_subset(KdVSubset(S_EMPTY, 3), 5)


def test_tuple_from_kdv_and_reduction():
    K2 = mutate_subset(KdVSubset(S_EMPTY, 3), 0)
    T = MKdVSubsetTuple.from_kdv(K2, (1, 0, 2))
    assert T.weights == (2, 5, 2)
    path = T.reduction_path()
    assert path == [2, 1, 3, 1]
    cur = T
    for i in path:
        nxt = cur.mutation(i)
        assert sum(nxt.weights) < sum(cur.weights)
        cur = nxt
    assert cur.weights == (0, 0, 0)


def test_tuple_containment_enforced():
    K2 = KdVSubset(VCZSubset((-2, 1, 2, 3)), 3)
    with pytest.raises(ValueError):
        MKdVSubsetTuple((K2, KdVSubset(S_EMPTY, 3), KdVSubset(S_EMPTY, 3)))


# --- points, tau and BA functions --------------------------------------------


def test_trivial_tau_is_one():
    assert tau(GrassmannPoint.trivial(), M=0) == 1


def test_tau_degree_equals_weight():
    W = GrassmannPoint.from_basis([{-2: 1}, {1: 1}, {2: 1}], depth=2)
    assert W.order_subset() == VCZSubset((-2, 1))
    assert restrict_to_x(tau(W, M=0)).degree(0) == 2


def test_tau_independent_of_depth():
    P = SAMPLE.points()[0]
    assert proportional(tau(P), tau(P, depth=P.depth + 2))


def test_laurent_span_membership():
    V = LaurentSpan.of([{-1: 1, 0: 2}], 1)
    assert {-1: 3, 0: 6, 4: 1} in V
    assert {0: 1} not in V
    assert V.with_tail(3).contains_span(V) and V.contains_span(V.with_tail(3))


def test_baker_trivial():
    z = gen(baker_W(GrassmannPoint.trivial(), depth=2).numerator.ring, "z")
    ba = baker_W(GrassmannPoint.trivial(), depth=2)
    assert ba.R == ba.R.field(z**3)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_baker_matches_periodic_family(n):
    A = seed_to_A(FIXED_SEED)
    fam = build_family(A)
    s = n + A.nu
    W = GrassmannPoint.from_rows(A.rows[:s])
    ba = baker_W(W, depth=s - 1)
    assert ba.R == fam.R(n)
    assert proportional(ba.tau, fam.y[n])
    z = gen(ba.numerator.ring, "z")
    assert baker_W(W, depth=s).R == ba.R * ba.R.field(z)


def test_point_json_roundtrip():
    P = SAMPLE.points()[1]
    assert GrassmannPoint.from_json(P.to_json()) == P


# --- flags and generation ----------------------------------------------------


def test_trivial_flag_taus():
    points, taus = mkdv_from_flag(MKdVSubspaceTuple.trivial(3))
    assert all(t == 1 for t in taus)
    assert all(P == GrassmannPoint.trivial() for P in points)


def test_flag_rejects_bad_vectors():
    W = GrassmannPoint.trivial()
    with pytest.raises(FlagInvalid):
        MKdVSubspaceTuple(3, W, ({2: 1}, {2: 1}, {0: 1}))
    with pytest.raises(FlagInvalid):
        MKdVSubspaceTuple(3, W, ({-1: 1}, {1: 1}, {0: 1}))
    with pytest.raises(FlagInvalid):
        MKdVSubspaceTuple(3, W, ({2: 1}, {1: 1}))


@pytest.mark.parametrize("i", [1, 2, 3])
def test_generate_from_trivial(i):
    taus = generate_flag(MKdVSubspaceTuple.trivial(3), i, 5).taus(M=0)
    ring_x = [restrict_to_x(t) for t in taus]
    x = gen(ring_x[i - 1].ring, "x")
    assert ring_x[i - 1] == x + 5
    assert all(t == 1 for k, t in enumerate(ring_x) if k != i - 1)


@pytest.mark.parametrize("i", [1, 2, 3])
@pytest.mark.parametrize("c", [0, Fraction(5, 7), -3])
def test_wronskian_identity(i, c):
    assert wronskian_identity_holds(SAMPLE, i, c)


def test_wronskian_identity_orientation():
    taus = SAMPLE.taus()
    new = tau(generate_flag(SAMPLE, 2, 7).points()[1])
    lhs = discrete_wronskian([taus[1], new])
    assert proportional(lhs, poly_shift(taus[0]) * taus[2])
    assert not proportional(lhs, taus[0] * poly_shift(taus[2]))


@pytest.mark.parametrize("i", [1, 2, 3])
def test_generation_is_linear_in_parameter(i):
    c = QQ(5, 7)
    old, at_c, at_0 = generation_taus(SAMPLE, i, c)
    assert at_c - at_0 - c * old == 0
    assert proportional(old, tau(SAMPLE.points()[i - 1]))
    assert proportional(at_c, tau(generate_flag(SAMPLE, i, c).points()[i - 1]))


def test_old_line_rejected():
    with pytest.raises(LineCoincidesWithOld):
        generate_line(SAMPLE, 1, (0, 1))
    with pytest.raises(LineCoincidesWithOld):
        generate_flag(SAMPLE, 1, "inf")
    assert generate_line(SAMPLE, 1, (2, 3)) == generate_flag(SAMPLE, 1, Fraction(3, 2))


def test_degree_increasing_from_trivial():
    assert all(is_degree_increasing(MKdVSubspaceTuple.trivial(3), i) for i in (1, 2, 3))


def test_order_tuple_is_mkdv():
    T = SAMPLE.order_tuple()
    degs = tuple(restrict_to_x(t).degree(0) for t in SAMPLE.taus(M=0))
    assert T.weights == degs


def test_flag_recovered_from_points():
    again = flag_from_points(SAMPLE.points())
    assert again.points() == SAMPLE.points()


def test_flag_json_roundtrip():
    again = MKdVSubspaceTuple.from_json(SAMPLE.to_json())
    assert again.points() == SAMPLE.points()


@pytest.mark.parametrize("flag", [MKdVSubspaceTuple.trivial(3), SAMPLE, MKdVSubspaceTuple.trivial(2)])
def test_relations_between_graded_bakers(flag):
    assert all(r == 0 for r in relation_residuals(flag))
    degs = [b.depth for b in graded_bakers(flag)]
    assert degs == list(range(degs[0], degs[0] + flag.N + 1))


# --- flows -------------------------------------------------------------------

TIMES = (Fraction(1, 2), Fraction(-1, 3), Fraction(2, 5))


def test_flow_at_zero_is_identity():
    P = SAMPLE.points()[0]
    assert flow(P, (0, 0, 0)) == P


def test_trivial_point_is_fixed_by_flows():
    assert flow(GrassmannPoint.trivial(), TIMES) == GrassmannPoint.trivial()


def test_flows_compose():
    P = SAMPLE.points()[0]
    assert flow(flow(P, TIMES), (1, 2)) == flow(P, (Fraction(3, 2), Fraction(5, 3), Fraction(2, 5)))


@pytest.mark.parametrize("k", [0, 1, 2])
def test_flow_matches_tau_times(k):
    assert flow_tau_defect(SAMPLE.points()[k], TIMES)


# --- bridge to the generation pipeline --------------------------------------


@pytest.mark.parametrize(
    "J, c",
    [((1, 2), (0, 0)), ((1, 2), (Fraction(1, 3), -2)), ((1, 3, 2), (2, 1, -3)), ((2, 1, 3, 2), (1, -1, 2, 4))],
)
def test_flag_from_path_matches_multistep(J, c):
    assert solution_from_flag(flag_from_path(3, J, c)) == multistep(GenerationPath(J, c), 3)


def test_spectral_matrix_from_flag_reproduces_taus():
    flag = flag_from_path(3, (1, 2), (0, 0))
    fam = build_family(spectral_matrix_from_flag(flag))
    y = solution_from_flag(flag)
    for n in (1, 2, 3):
        assert proportional(restrict_to_x(fam.y[n]), y.y(n))
