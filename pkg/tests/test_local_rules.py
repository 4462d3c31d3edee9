from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from l2lab.errors import ValidationError, WindowError
from l2lab.finite_models import build_model
from l2lab.group_core import S1, S1_INV, S2, S2_INV, GroupId, ball, ball_around, identity
from l2lab.local_rules import (
    ONE_GOOD_SHAPES,
    Hook,
    LocalClass,
    Pattern,
    classify_configuration,
    classify_local,
    f_s,
    g_s,
    hook_from_path,
    hook_restriction_shapes,
    table_entry,
    translating_elements,
    walker_fate,
    windowed_operator,
)

GROUPS = [GroupId.FREE2, GroupId.WREATH]


def hook_chi(hook: Hook, radius: int = 4, extra=()) -> Pattern:
    ones = set(hook.vertices()) | set(extra)
    return Pattern(frozenset(ball_around(ones, radius)), frozenset(ones))


@pytest.mark.parametrize("group", GROUPS)
def test_one_good_shapes_match_hook_enumeration(group):
    assert hook_restriction_shapes(group) == ONE_GOOD_SHAPES


def test_pattern_window_enforced():
    e = identity(GroupId.FREE2)
    chi = Pattern.from_ones([e], [e])
    assert chi.value(e) == 1
    with pytest.raises(WindowError):
        chi.value(e.mul_letter(S1))
    with pytest.raises(WindowError):
        classify_local(chi, e)


@pytest.mark.parametrize("group", GROUPS)
def test_classes_along_a_hook(group):
    hook = Hook(identity(group), 3, 2)
    chi = hook_chi(hook)
    V = hook.vertices()
    assert classify_local(chi, V[0]) is LocalClass.GOOD_END
    assert classify_local(chi, V[-1]) is LocalClass.GOOD_END
    for v in V[1:-1]:
        assert classify_local(chi, v) is LocalClass.INTERIOR_GOOD
    off = V[2].mul_letter(S1_INV)
    assert classify_local(chi, off) is LocalClass.NOT_ONE_GOOD


def test_one_good_but_not_locally_good():
    group = GroupId.FREE2
    hook = Hook(identity(group), 2, 2)
    V = hook.vertices()
    bad = V[-1].mul_letter(S2_INV)
    chi = hook_chi(hook, extra=[bad, bad.mul_letter(S1), bad.mul_letter(S1_INV)])
    assert classify_local(chi, bad) is LocalClass.NOT_ONE_GOOD
    assert classify_local(chi, V[-1]) is LocalClass.ONE_GOOD_NOT_LOCALLY_GOOD
    assert f_s(chi, S2_INV, V[-2]) == Fraction(1, 2)


def test_f_and_g_on_hook():
    group = GroupId.FREE2
    hook = Hook(identity(group), 2, 2)
    chi = hook_chi(hook)
    V = hook.vertices()
    # V[1] is interior, V[0] its lower good end
    assert f_s(chi, S2_INV, V[1]) == 2
    assert f_s(chi, S2, V[0]) == 0
    assert g_s(chi, S2_INV, V[1]) == 2
    assert g_s(chi, S1, V[2]) == 2  # corner to corner: 1 + 1


def test_table_is_transposed():
    for a in LocalClass:
        for b in LocalClass:
            f1, f2 = table_entry(a, b)
            g1, g2 = table_entry(b, a)
            assert (f1, f2) == (g2, g1)
    assert table_entry(LocalClass.GOOD_END, LocalClass.INTERIOR_GOOD) == (2, 0)
    assert table_entry(LocalClass.INTERIOR_GOOD, LocalClass.INTERIOR_GOOD) == (1, 1)
    assert table_entry(LocalClass.NOT_ONE_GOOD, LocalClass.GOOD_END) == (0, 0)


def test_hook_from_path_round_trip():
    group = GroupId.WREATH
    for n in range(0, 3):
        for m in range(0, 3):
            hook = Hook(identity(group), n, m)
            assert hook_from_path(hook.vertices()) == hook
            assert hook_from_path(hook.vertices()[::-1]) == hook
    seg = Hook(identity(group), 0, 3, "vertical")
    assert hook_from_path(seg.vertices()) == seg
    e = identity(group)
    with pytest.raises(ValidationError):
        hook_from_path([e, e.mul_letter(S1), e.mul_letter(S1).mul_letter(S1)])


def test_translating_elements():
    group = GroupId.FREE2
    hook = Hook(identity(group), 1, 2)
    for g in translating_elements(hook.vertices()):
        assert identity(group) in hook.translate(g).vertex_set()
    assert len(translating_elements(hook.vertices())) == hook.length + 1


@pytest.mark.parametrize("group", GROUPS)
def test_clean_hook_is_c11(group):
    hook = Hook(identity(group), 2, 3)
    chi = hook_chi(hook)
    for v in hook.vertices():
        cc = classify_configuration(chi, v)
        assert cc.label == "C1,1"
        assert cc.hook == hook
        assert set(cc.R) == hook.vertex_set()


def test_walker_exhausts_small_window():
    group = GroupId.FREE2
    hook = Hook(identity(group), 6, 6)
    window = frozenset(ball(3, group))
    chi = Pattern(window, hook.vertex_set() & window)
    res = walker_fate(chi, identity(group), S2_INV)
    assert res.fate == "inf"
    assert classify_configuration(chi, identity(group)).kind == "Cinf"


def test_empty_neighbourhood_is_c0():
    group = GroupId.FREE2
    chi = Pattern(frozenset(ball(3, group)), frozenset())
    assert classify_configuration(chi).label == "C0"


def test_defect_end_gives_half_weight_model():
    group = GroupId.FREE2
    hook = Hook(identity(group), 2, 2)
    V = hook.vertices()
    bad = V[-1].mul_letter(S2_INV)
    chi = hook_chi(hook, extra=[bad, bad.mul_letter(S1), bad.mul_letter(S1_INV)])
    cc = classify_configuration(chi, identity(group))
    assert cc.label == "C1,2"
    P = list(cc.P)[::-1]
    op = windowed_operator(chi, ball_around(P, 1))
    weights = tuple(op[(a, b)] for a, b in zip(P, P[1:]))
    assert weights == build_model(len(P) - 1, 1, 2).weights


@pytest.mark.parametrize("group", GROUPS)
def test_operator_is_symmetric_on_random_patterns(group):
    rng = np.random.default_rng(5)
    window = ball(5, group)
    for _ in range(20):
        bits = (rng.random(len(window)) < 0.35).astype(int)
        chi = Pattern.from_bits(window, bits)
        op = windowed_operator(chi, ball(2, group))
        assert op.is_symmetric()
