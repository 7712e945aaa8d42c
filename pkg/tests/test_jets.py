from fractions import Fraction
from itertools import product

import pytest

from motivic_forge.errors import NotStabilized, TooLarge
from motivic_forge.grothendieck import L, evaluate_at
from motivic_forge.jets import (
    JetMatrix, base_cylinder_class, base_cylinder_count, brute_group_order, brute_member, cross_check_membership,
    cylinder_measure, group_order, groupoid_count, jet_ring, mat_mul, measure_from_level, rowreduce_member,
    special_linear_jets, stabilizer_elements, stabilizer_order, symbolic_level_class, verify_change_of_variables,
)


def jm(rows, q=2, n=1):
    return JetMatrix.from_coeffs(rows, q, n)


def test_jet_ring_arithmetic():
    R = jet_ring(3, 2)
    a, b = R.encode([1, 2]), R.encode([0, 1, 1])
    assert R.decode(R.mul[a][b]) == [0, 1, 0]
    assert R.mul[a][R.inv[a]] == 1
    assert R.val[R.encode([0, 0, 2])] == 2 and R.val[0] == 3


@pytest.mark.parametrize("r, n, q, expected", [(2, 1, 2, 48), (2, 0, 3, 24), (2, 0, 2, 6)])
def test_group_order(r, n, q, expected):
    assert group_order(r, n, q) == expected
    assert brute_group_order(r, n, q) == expected


def test_membership_examples():
    diag_t1 = jm([[[0, 1], [1]], [[0], [1]]])
    diag_t2 = jm([[[0, 0], [0]], [[0], [1]]])
    assert rowreduce_member("valuation1", diag_t1) and brute_member("valuation1", diag_t1)
    assert not rowreduce_member("valuation1", diag_t2) and not brute_member("valuation1", diag_t2)
    diag_t2_level2 = JetMatrix.from_coeffs([[[0, 0, 1], [0]], [[0], [1]]], 2, 2)
    assert not rowreduce_member("valuation1", diag_t2_level2)


def test_exhaustive_membership_level1_q2():
    R = jet_ring(2, 1)
    hits = [e for e in product(range(R.size), repeat=4) if brute_member("valuation1", JetMatrix(2, 1, 2, e))]
    assert len(hits) == 24
    for e in product(range(R.size), repeat=4):
        A = JetMatrix(2, 1, 2, e)
        assert rowreduce_member("valuation1", A) == (e in set(hits))


@pytest.mark.parametrize("r, n, q, value", [(2, 1, 2, Fraction(1, 2)), (2, 2, 2, Fraction(1)), (2, 1, 3, Fraction(2, 3))])
def test_groupoid_counts(r, n, q, value):
    gc = groupoid_count(r, n, q, method="both")
    assert gc.value == value
    assert gc.match
    assert gc.value * gc.denominator == gc.numerator


def test_groupoid_count_json_shape():
    d = groupoid_count(2, 1, 2, method="brute").as_dict()
    assert (d["numerator"], d["denominator"], d["symbolic"], d["match"]) == (24, 48, "(L-1)*L^-1", True)


def test_worker_partitioning_does_not_change_counts():
    a = groupoid_count(2, 1, 3, method="both", workers=1)
    b = groupoid_count(2, 1, 3, method="both", workers=3)
    assert (a.numerator, a.denominator) == (b.numerator, b.denominator)


def test_levels_differ_by_q():
    for q in (2, 3):
        lo = groupoid_count(2, 1, q, method="rowreduce")
        hi = groupoid_count(2, 2, q, method="rowreduce")
        assert hi.value == q * lo.value
    assert symbolic_level_class("valuation1", 3, 2) == L() * symbolic_level_class("valuation1", 3, 1)


def test_order12_counts():
    for q in (2, 3):
        gc = groupoid_count(2, 1, q, method="both", cylinder="order12")
        assert gc.match
    assert symbolic_level_class("order12", 2, 1) == (L() - 1) * L(-3)


def test_too_large():
    with pytest.raises(TooLarge):
        groupoid_count(3, 2, 2)
    with pytest.raises(TooLarge):
        groupoid_count(2, 1, 2, limit=100)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        groupoid_count(2, 1, 4)
    with pytest.raises(ValueError):
        groupoid_count(2, 0, 2)
    with pytest.raises(ValueError):
        groupoid_count(3, 1, 2, cylinder="order12")


@pytest.mark.parametrize("r, n, q, expected", [(2, 1, 2, 2), (2, 1, 3, 3), (3, 1, 2, 4), (2, 2, 2, 2)])
def test_stabilizer_order(r, n, q, expected):
    assert stabilizer_order(r, n, q) == expected


def test_stabilizer_matches_closed_form_subgroup():
    for r, n, q in [(2, 1, 3), (2, 2, 2), (3, 1, 2)]:
        R = jet_ring(q, n)
        psi = (R.t,) + tuple(1 if i == j else 0 for i in range(r) for j in range(r))[1:]
        brute = {g for g in special_linear_jets(r, n, q) if mat_mul(R, r, g, psi) == psi}
        assert brute == set(stabilizer_elements(r, n, q))


def test_random_cross_check_larger_case():
    res = cross_check_membership("valuation1", 2, 2, 3, 400, seed=1)
    assert res["disagreements"] == 0 and res["members"] > 0


def test_measure_from_level():
    r = 2
    levels = {n: (L() - 1) * L(n - r) for n in (1, 2)}
    assert measure_from_level(levels, 1) == (L() - 1) * L(-3)
    assert measure_from_level({n: L(n + 1) for n in (1, 2)}, 1) == L(0)
    assert measure_from_level({n: (L() - 1) * L(n - 1) for n in (1, 2)}, 1) == (L() - 1) * L(-2)


def test_measure_from_level_stabilization():
    with pytest.raises(NotStabilized):
        measure_from_level({1: L()}, 1)
    with pytest.raises(NotStabilized):
        measure_from_level({1: L(), 3: L(3)}, 1)
    with pytest.raises(NotStabilized):
        measure_from_level({1: L(), 2: L()}, 1)


def test_cylinder_measures():
    assert cylinder_measure("valuation1", 2) == (L() - 1) * L(-3)
    assert cylinder_measure("valuation1", 3) == (L() - 1) * L(-4)
    assert cylinder_measure("order12", 2) == (L() - 1) * L(-5)


def test_base_cylinder_counts():
    for q in (2, 3):
        for n in (1, 2, 3):
            for k in range(n + 1):
                assert base_cylinder_count(k, n, q) == evaluate_at(base_cylinder_class(k, n), q)


@pytest.mark.parametrize("case, r, coefficient", [("lemma83", 2, -1), ("lemma83", 3, -2), ("example82", 2, -1)])
def test_verify_change_of_variables(case, r, coefficient):
    rep = verify_change_of_variables(case, r)
    assert rep.coefficient == coefficient
    assert rep.passes
    checked = [c for c in rep.numeric if "skipped" not in c]
    assert checked and all(c["match"] for c in checked)


def test_verify_cov_reports_skips():
    rep = verify_change_of_variables("lemma83", 3)
    skipped = [(c["q"], c["n"]) for c in rep.numeric if "skipped" in c]
    assert (3, 1) in skipped
