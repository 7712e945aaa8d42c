import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motivic_forge.crepant import DivisorSum
from motivic_forge.errors import GenericPointViolation, UnsupportedFamily, ZeroComponentOrder
from motivic_forge.heights import (
    ArcOnCover, arc_from_dict, build_presentation, check_key_identity, det_generator, height_profile,
    infer_multiplicity, jacobian_order, ord_along_arc, parse_series, presentation_euler, random_slr_arc,
    torsion_length_of_differentials,
)
from motivic_forge.series import AtLeast, Exact, SeriesMatrix, field

F5 = field(5)


def arc(values, N=16, p=5):
    return ArcOnCover.slr(SeriesMatrix.from_values(values, N, field(p)))


DIAG_T1 = [[[0, 1], 0], [0, 1]]
DIAG_FT_T = [[[0, 2, 1], 0], [0, [0, 1]]]  # f = 2 + t
JORDAN = [[[0, 1], 1], [0, [0, 1]]]


def profile(values):
    a = arc(values)
    return height_profile(build_presentation(a), a).as_tuple()


def test_presentation_diag_t1():
    pres = build_presentation(arc(DIAG_T1))
    assert pres.d0 == SeriesMatrix.from_values([[1], [0], [0], [[0, 1]]], 16, F5)
    assert pres.d1 == SeriesMatrix.from_values([[[0, 1], 0, 0, -1], [0, 1, 0, 0], [0, 0, [0, 1], 0]], 16, F5)
    assert (pres.fiber_dim, pres.base_dim) == (3, 1)


def test_presentation_identity_and_diag_ft():
    pres = build_presentation(arc([[1, 0], [0, 1]]))
    assert pres.d0 == SeriesMatrix.from_values([[1], [0], [0], [1]], 16, F5)
    pres = build_presentation(arc(DIAG_FT_T))
    assert pres.d0 == SeriesMatrix.from_values([[[0, 1]], [0], [0], [[0, 2, 1]]], 16, F5)


def test_hand_profiles():
    assert profile(DIAG_T1) == (0, 0, 1)
    assert profile(DIAG_FT_T) == (0, 1, 3)
    assert profile(JORDAN) == (0, 0, 2)
    assert profile([[1, 0], [0, 1]]) == (0, 0, 0)


def test_slr3_profile():
    assert profile([[[0, 1], 0, 0], [0, 1, 0], [0, 0, 1]]) == (0, 0, 2)


def test_generic_point_violation():
    a = arc([[1, 0], [0, 0]])
    with pytest.raises(GenericPointViolation):
        height_profile(build_presentation(a), a)


def test_ord_along_arc():
    assert ord_along_arc([det_generator(2)], arc(DIAG_FT_T)) == Exact(2)
    for r in (2, 3, 4):
        diag = [[[0, 1] if i == j == 0 else int(i == j) for j in range(r)] for i in range(r)]
        assert ord_along_arc([det_generator(r)], arc(diag)) == Exact(1)
    assert ord_along_arc(["1"], arc(JORDAN)) == Exact(0)
    assert ord_along_arc([], arc(JORDAN)) == AtLeast(16)
    assert ord_along_arc(["a11", "a22"], arc(JORDAN)) == Exact(1)


@pytest.mark.parametrize("values, lhs, rhs", [(DIAG_T1, -1, -1), (DIAG_FT_T, -2, -2), (JORDAN, -2, -2)])
def test_key_identity_examples(values, lhs, rhs):
    rep = check_key_identity(arc(values), 1, DivisorSum.single("D'", -1))
    assert (rep.lhs, rep.rhs) == (lhs, rhs)
    assert rep.passes
    assert rep.euler == rep.lci_rhs


def test_key_identity_detects_wrong_divisor():
    rep = check_key_identity(arc(JORDAN), 1, DivisorSum.single("D'", -2))
    assert not rep.passes


def test_key_identity_gorenstein_index():
    rep = check_key_identity(arc(JORDAN), 2, DivisorSum.single("D'", -1))
    assert rep.lhs == rep.rhs == -4


def test_infer_multiplicity():
    assert infer_multiplicity(-2, 2) == -1
    assert infer_multiplicity(0, 1) == 0
    assert infer_multiplicity(-2, 1) == -2
    with pytest.raises(ZeroComponentOrder):
        infer_multiplicity(1, 0)


def test_unsupported_family():
    cusp = ArcOnCover.hypersurface("x0**2 - x1**3", [parse_series("t^3", 16, F5), parse_series("t^2", 16, F5)])
    with pytest.raises(UnsupportedFamily):
        build_presentation(cusp)


def test_hypersurface_jacobian_order():
    cusp = ArcOnCover.hypersurface("x0**2 - x1**3", [parse_series("t^3"), parse_series("t^2")])
    assert jacobian_order(cusp) == 3
    assert torsion_length_of_differentials(cusp) == 3
    node = ArcOnCover.hypersurface("x0*x1", [parse_series("t^2"), parse_series("0")])
    assert jacobian_order(node) == 2
    with pytest.raises(ValueError):
        ArcOnCover.hypersurface("x0 - x1", [parse_series("t"), parse_series("t^2")])


def test_arc_from_dict():
    a = arc_from_dict({"family": "slr", "r": 2, "matrix": [["t", "1"], ["0", "t"]], "precision": 16, "prime": 5})
    assert a.matrix == arc(JORDAN).matrix
    with pytest.raises(ValueError):
        arc_from_dict({"family": "slr", "r": 2, "matrix": [["t", "1"]]})


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4), st.integers(2, 3))
def test_heights_invariant_under_reparametrization(seed, u, r):
    rng = random.Random(seed)
    a = random_slr_arc(r, rng, 12, 5)
    b = a.rescaled(u)
    assert height_profile(build_presentation(a), a) == height_profile(build_presentation(b), b)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_heights_invariant_under_constant_sl(seed):
    rng = random.Random(seed)
    a = random_slr_arc(2, rng, 12, 5)
    x, y = rng.randrange(5), rng.randrange(5)
    g = SeriesMatrix.from_values([[1 + x * y, x], [y, 1]], 12, F5)  # det 1
    b = ArcOnCover.slr(g @ a.matrix)
    assert height_profile(build_presentation(a), a) == height_profile(build_presentation(b), b)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 3))
def test_heights_vanish_off_the_exceptional_locus(seed, r):
    a = random_slr_arc(r, random.Random(seed), 12, 5, min_val=0, max_val=0)
    assert height_profile(build_presentation(a), a).as_tuple() == (0, 0, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 3))
def test_euler_matches_alternating_sum(seed, r):
    a = random_slr_arc(r, random.Random(seed), 16, 5)
    pres = build_presentation(a)
    assert presentation_euler(pres) == height_profile(pres, a).alternating_sum()
