from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2lab.errors import ResourceError, UsageError, ValidationError
from l2lab.group_core import (
    S1,
    S1_INV,
    S2,
    S2_INV,
    ExplicitIndexSet,
    FactorialIndexSet,
    FreeWord,
    GroupId,
    WreathElement,
    ball,
    commutator,
    from_letters,
    identity,
    index_set_from_json,
    lambda_membership,
    lambda_word,
    parse_element,
    power,
    t_generator,
    validate_for_theorem,
)

GROUPS = [GroupId.FREE2, GroupId.WREATH]
letters = st.lists(st.sampled_from([S1, S1_INV, S2, S2_INV]), max_size=12)


# ---------------------------------------------------------------------------
# independent oracle: Stallings folding for subgroups of F2


def stallings_accepts(word: tuple, gens: list[tuple]) -> bool:
    """Fold the wedge of loops labelled by ``gens`` and read ``word`` from the base."""
    edges: dict = {}  # (vertex, letter) -> vertex
    nxt = [1]

    def add_edge(u, a, v):
        edges.setdefault((u, a), set()).add(v)
        edges.setdefault((v, -a), set()).add(u)

    for g in gens:
        u = 0
        for i, a in enumerate(g):
            v = 0 if i == len(g) - 1 else nxt[0]
            if v:
                nxt[0] += 1
            add_edge(u, a, v)
            u = v
    # fold until deterministic
    changed = True
    while changed:
        changed = False
        for key, targets in list(edges.items()):
            if len(targets) > 1:
                keep, *rest = sorted(targets)
                for r in rest:
                    # merge vertex r into keep
                    new: dict = {}
                    for (u, a), ts in edges.items():
                        u2 = keep if u == r else u
                        ts2 = {keep if t == r else t for t in ts}
                        new.setdefault((u2, a), set()).update(ts2)
                    edges = new
                changed = True
                break
    u = 0
    for a in word:
        ts = edges.get((u, a))
        if not ts:
            return False
        (u,) = ts
    return u == 0


@pytest.mark.parametrize("group", GROUPS)
def test_identity_and_inverse(group):
    g = from_letters((S1, S2, S2, S1_INV, S2_INV), group)
    assert (g * g.inverse()).is_identity()
    assert (g.inverse() * g) == identity(group)


@given(letters, letters, letters)
@settings(max_examples=200, deadline=None)
def test_associativity(a, b, c):
    for group in GROUPS:
        x, y, z = (from_letters(w, group) for w in (a, b, c))
        assert (x * y) * z == x * (y * z)


@given(letters)
@settings(max_examples=200, deadline=None)
def test_mul_letter_matches_product(w):
    for group in GROUPS:
        g = identity(group)
        for a in w:
            g = g.mul_letter(a)
        assert g == from_letters(w, group)


def test_free_words_are_reduced():
    g = from_letters((S1, S2, S2_INV, S1_INV, S2), GroupId.FREE2)
    assert g.letters == (S2,)


def test_wreath_lamps_commute():
    for n in range(-3, 4):
        tn = t_generator(n, GroupId.WREATH)
        s1 = from_letters((S1,), GroupId.WREATH)
        assert commutator(tn, s1).is_identity()
        assert tn == WreathElement(((n, 1),), 0)


def test_free_t_generators_do_not_commute():
    s1 = from_letters((S1,), GroupId.FREE2)
    assert not commutator(t_generator(2, GroupId.FREE2), s1).is_identity()


def test_mixed_group_product_rejected():
    with pytest.raises(UsageError):
        _ = identity(GroupId.FREE2) * identity(GroupId.WREATH)


@pytest.mark.parametrize("group", GROUPS)
def test_parse_round_trip(group):
    for g in ball(3, group):
        assert parse_element(str(g), group) == g


def test_parse_tokens():
    g = parse_element("t2^-1*s2 s1^3", GroupId.FREE2)
    expected = power(t_generator(2, GroupId.FREE2), -1) * from_letters((S2, S1, S1, S1), GroupId.FREE2)
    assert g == expected
    with pytest.raises(ValidationError):
        parse_element("s3", GroupId.FREE2)


def test_ball_sizes():
    # the shortest wreath relator has length 8, so balls agree up to radius 3
    for group in GROUPS:
        assert [len(ball(r, group)) for r in range(4)] == [1, 5, 17, 53]
    assert len(ball(4, GroupId.FREE2)) == 161
    assert len(ball(4, GroupId.WREATH)) < 161


def test_wreath_word_length_matches_bfs():
    for r in range(4):
        for g in ball(r, GroupId.WREATH):
            assert g.word_length() <= r
    for g in set(ball(4, GroupId.WREATH)) - set(ball(3, GroupId.WREATH)):
        assert g.word_length() == 4


def test_ball_cap(monkeypatch):
    monkeypatch.setenv("L2LAB_MAX_BALL_RADIUS", "3")
    with pytest.raises(ResourceError):
        ball(4, GroupId.FREE2)


def test_s1_line_decomposition():
    for group in GROUPS:
        for g in ball(3, group):
            rep, k = g.s1_line()
            step = from_letters((S1 if k > 0 else S1_INV,) * abs(k), group)
            assert rep * step == g
            assert rep.s1_line() == (rep, 0)


# ---------------------------------------------------------------------------
# index sets


def test_factorial_index_set():
    I = FactorialIndexSet(count=6)
    assert I.first(7) == [2, 5, 8, 11, 26, 122, 722]
    assert all(n % 3 == 2 for n in I.first(9))
    plain = FactorialIndexSet(adjust=False)
    assert plain.first(5) == [1, 2, 6, 24, 120]


def test_index_set_json():
    I = index_set_from_json({"kind": "explicit", "elements": [2, 5, 8]})
    assert list(I) == [2, 5, 8] and 5 in I and 4 not in I
    assert index_set_from_json([2, 5]) == ExplicitIndexSet([2, 5])
    assert index_set_from_json(I.to_json()) == I
    with pytest.raises(ValidationError):
        index_set_from_json({"kind": "mystery"})
    with pytest.raises(ValidationError):
        ExplicitIndexSet([5, 2])


def test_validate_for_theorem():
    assert validate_for_theorem(ExplicitIndexSet([2, 5, 11])) == [2, 5, 11]
    for bad in ([3], [2, 4], [5, 8]):
        with pytest.raises(ValidationError):
            validate_for_theorem(ExplicitIndexSet(bad))


# ---------------------------------------------------------------------------
# Lambda_I


def test_lambda_generators():
    I = ExplicitIndexSet([2, 5])
    for group in GROUPS:
        for n in range(0, 8):
            assert lambda_membership(t_generator(n, group), I) == (n in (2, 5))


@given(st.lists(st.tuples(st.sampled_from([1, 2, 3, 5]), st.sampled_from([-2, -1, 1, 2])), max_size=5))
@settings(max_examples=200, deadline=None)
def test_lambda_word_round_trip(parts):
    I = ExplicitIndexSet([1, 2, 3, 5])
    for group in GROUPS:
        g = identity(group)
        for n, p in parts:
            g = g * power(t_generator(n, group), p)
        word = lambda_word(g, I)
        assert word is not None
        h = identity(group)
        for n, p in word:
            h = h * power(t_generator(n, group), p)
        assert h == g


@given(letters)
@settings(max_examples=300, deadline=None)
def test_lambda_membership_matches_stallings(w):
    I = [1, 2]
    x = from_letters(w, GroupId.FREE2)
    gens = [t_generator(n, GroupId.FREE2).letters for n in I]
    assert lambda_membership(x, I) == stallings_accepts(x.letters, gens)


def test_stallings_positive_examples():
    I = [2, 5]
    gens = [t_generator(n, GroupId.FREE2).letters for n in I]
    x = t_generator(2, GroupId.FREE2) * power(t_generator(5, GroupId.FREE2), -3)
    assert lambda_membership(x, I) and stallings_accepts(x.letters, gens)
    y = x * from_letters((S2,), GroupId.FREE2)
    assert not lambda_membership(y, I) and not stallings_accepts(y.letters, gens)


def test_free_word_type():
    assert isinstance(identity(GroupId.FREE2), FreeWord)
