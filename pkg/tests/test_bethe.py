import json

import pytest
from hypothesis import given, strategies as st

from baeflows.bethe import (
    L_functions,
    SolutionTuple,
    compute_Q,
    is_generic,
    verify_L_identity,
    verify_bae,
)
from baeflows.errors import NonGenericInput
from baeflows.exactcore import x_ring
from baeflows.generation import GenerationPath, multistep

from oracles import bae_holds_at_roots, quadratic_form

X = x_ring()
x = X.gens[0]


def test_empty_tuple_is_generic_solution():
    y = SolutionTuple.empty(3)
    assert is_generic(y)
    rep = verify_bae(y)
    assert rep.generic and rep.satisfied and rep.failing_equations == []


def test_genericity_examples():
    assert not is_generic(SolutionTuple.of([x, x, x]))
    assert is_generic(SolutionTuple.of([x, 1, 1]))


def test_single_root_tuple_satisfies_bae():
    y = SolutionTuple.of([x, 1, 1])
    assert verify_bae(y).satisfied
    assert bae_holds_at_roots(y.polys)


def test_ad_hoc_tuple_fails_with_witness():
    y = SolutionTuple.of([x, x**2, 1])
    rep = verify_bae(y)
    assert not rep.satisfied
    assert rep.failing_equations
    n, remainder = rep.failing_equations[0]
    assert remainder != 0 and 1 <= n <= 3


def test_compute_Q_examples():
    assert compute_Q((0, 0, 0)) == 0
    assert compute_Q((1, 0, 0)) == 0
    assert compute_Q((1, 1, 1)) == -3


@given(st.lists(st.integers(0, 12), min_size=2, max_size=7))
def test_compute_Q_matches_oracle(k):
    assert compute_Q(k) == quadratic_form(k)


def test_L_identity_examples():
    assert verify_L_identity(SolutionTuple.empty(3))
    assert all(L == 1 for L in L_functions(SolutionTuple.empty(3)))
    assert verify_L_identity(SolutionTuple.of([x, 1, 1]))
    y = multistep(GenerationPath((1, 2), (3, -2)), 3)
    assert y.degrees == (1, 2, 0)
    assert verify_L_identity(y)


def test_L_identity_rejects_non_generic():
    with pytest.raises(NonGenericInput):
        verify_L_identity(SolutionTuple.of([x, x, x]))


def test_monic_normalization_and_cyclic_index():
    y = SolutionTuple.of([3 * x + 6, 2, X.one])
    assert y.y(1) == x + 2 and y.y(2) == 1
    assert y.y(4) == y.y(1) and y.y(0) == y.y(3)


def test_json_roundtrip():
    y = SolutionTuple.of([x + 5, x**2 - x / 3, 1])
    data = json.loads(y.dumps())
    assert data["polys"][0] == ["5", "1"]
    assert SolutionTuple.from_json(data) == y


def test_json_rejects_wrong_N():
    with pytest.raises(ValueError):
        SolutionTuple.from_json({"N": 4, "polys": [["1"], ["1"], ["1"]]})


@pytest.mark.parametrize("J", [(1,), (1, 2), (2, 3, 1), (1, 2, 3, 1)])
def test_generated_tuples_have_Q_zero_and_unequal_degrees(J):
    y = multistep(GenerationPath(J, tuple(range(2, 2 + len(J)))), 3)
    rep = verify_bae(y)
    assert rep.satisfied
    if rep.generic:
        assert verify_L_identity(y)
        assert compute_Q(y.degrees) == 0
        # a generic nontrivial solution never has all degrees equal
        assert len(set(y.degrees)) > 1
