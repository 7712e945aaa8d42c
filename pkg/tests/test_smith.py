import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motivic_forge.errors import InsufficientPrecision, NotAComplex, NotTorsion
from motivic_forge.series import AtLeast, Exact
from motivic_forge.smith import (
    cohomology_lengths, euler_valuation, fitting_order, lemma33_check, minor_valuations, smith_normal_form,
)
from oracles import M, lemma33_instance, oracle_invariants, unimodular_pair
from strategies import series_matrices


def test_snf_examples():
    assert smith_normal_form(M([[[0, 1], 0], [0, [0, 0, 1]]])).invariant_valuations == (1, 2)
    assert smith_normal_form(M([[[0, 1], [0, 1]], [[0, 1], [0, 2]]])).invariant_valuations == (1, 1)
    rep = smith_normal_form(M([[1, 0, 0], [0, 0, 0]]), expected_rank=1)
    assert rep.certified and rep.rank == 1


def test_snf_insufficient_precision():
    with pytest.raises(InsufficientPrecision):
        smith_normal_form(M([[[0] * 7 + [1]]], N=4))
    rep = smith_normal_form(M([[[0] * 7 + [1]]], N=4), strict=False)
    assert not rep.certified


def test_fitting_order_examples():
    d0 = M([[1], [0], [0], [[0, 1]]])
    assert fitting_order(d0, 3) == Exact(0)
    d1 = M([[[0, 1], 0, 0, -1], [0, 1, 0, 0], [0, 0, [0, 1], 0]])
    assert fitting_order(d1, 0, "minors") == Exact(1)
    assert fitting_order(d1, 0, "snf") == Exact(1)
    assert fitting_order(d1, 3) == Exact(0)
    assert fitting_order(M([[1, 0]]), 0) == Exact(0)
    assert fitting_order(M([[1], [0]]), 0) == AtLeast(8)
    assert minor_valuations(d1, 3) == [Exact(2), AtLeast(8), AtLeast(8), Exact(1)]


def test_snf_against_minor_oracle_fixed():
    A = M([[[0, 1], [0, 0, 1], 1], [[0, 0, 2], 0, [0, 1]], [1, [0, 1], [0, 0, 0, 1]]])
    assert list(smith_normal_form(A).invariant_valuations) == oracle_invariants(A)


@settings(max_examples=25, deadline=None)
@given(series_matrices(3, 3, precision=6))
def test_snf_matches_minor_oracle(A):
    rep = smith_normal_form(A, strict=False)
    if rep.certified:
        assert list(rep.invariant_valuations) == oracle_invariants(A)


@settings(max_examples=40, deadline=None)
@given(series_matrices(3, 4, precision=8), st.integers(0, 10 ** 6))
def test_snf_invariant_under_unimodular_changes(A, seed):
    rng = random.Random(seed)
    U, _ = unimodular_pair(rng, 3, 8, 5)
    V, _ = unimodular_pair(rng, 4, 8, 5)
    r1 = smith_normal_form(A, strict=False)
    r2 = smith_normal_form(U @ A @ V, strict=False)
    if r1.certified and r2.certified:
        assert r1.invariant_valuations == r2.invariant_valuations


@settings(max_examples=40, deadline=None)
@given(series_matrices(3, 3, precision=8), st.integers(0, 2))
def test_fitting_methods_agree(A, j):
    a, b = fitting_order(A, j, "minors"), fitting_order(A, j, "snf")
    if a.exact or b.exact:
        assert a == b


def test_lemma33_fixed_instance():
    alpha = M([[[0, 1]], [0]])
    beta = M([[0, [0, 0, 1]]])
    res = lemma33_check(alpha, beta, 1, 1)
    assert (res.dim_Q, res.dim_coker_beta) == (1, 2)
    assert res.holds


def test_lemma33_random_instances():
    rng = random.Random(3)
    for _ in range(20):
        alpha, beta, a, b, dq, dc = lemma33_instance(rng)
        res = lemma33_check(alpha, beta, a, b)
        assert (res.dim_Q, res.dim_coker_beta) == (dq, dc)
        assert res.holds


def test_lemma33_rejects_non_complex():
    with pytest.raises(NotAComplex):
        lemma33_check(M([[1], [0]]), M([[1, 0]]), 1, 1)


def test_euler_valuation_examples():
    assert euler_valuation([M([[[0, 0, 1]]])]) == 2
    middle = [M([[[0, 1]], [0]]), M([[0, [0, 1]]])]
    assert cohomology_lengths(middle) == [0, 1, 1]
    assert euler_valuation(middle) == 0
    assert euler_valuation([]) == 0


def test_euler_requires_torsion():
    with pytest.raises(NotTorsion):
        euler_valuation([M([[1], [0]])])
