from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l2lab.closure_calculus import (
    Atom,
    Constant,
    DimValue,
    FormExistNumber,
    Product,
    RationalScale,
    RationalShift,
    Sum,
    atom_parameters,
    combine_product,
    combine_sum,
    digit_target,
    dyadic_digit_sets,
    form_number_recipe,
    normalization,
    realize_target,
    recipe_from_json,
    scale,
    shift,
    split_digits,
    split_digits_sparse,
    truncate,
)
from l2lab.dimension_engine import dimension_closed_form
from l2lab.errors import DomainError, ValidationError
from l2lab.exact import parse_binary, pow2
from l2lab.group_core import ExplicitIndexSet

digit_sets = st.lists(st.integers(0, 40), max_size=25, unique=True)


@given(digit_sets, st.integers(1, 6))
@settings(max_examples=300, deadline=None)
def test_split_digits_is_exact_and_well_formed(I, D):
    nums = split_digits(I, D)
    assert len(nums) == 2 ** (D - 1)
    assert all(n.is_well_formed() for n in nums)
    assert sum((n.value for n in nums), Fraction(0)) == digit_target(I, D)


@given(digit_sets, st.integers(1, 40))
@settings(max_examples=200, deadline=None)
def test_sparse_split_for_large_D(I, D):
    nums = split_digits_sparse(I, D)
    assert sum((n.value for n in nums.values()), Fraction(0)) == digit_target(I, D)


def test_first_block_assigns_one_digit_each():
    nums = split_digits([1, 2, 3, 4], 3)
    assert [n.exponents for n in nums] == [(1,), (2,), (3,), (4,)]
    nums = split_digits([1, 2, 3, 4, 7], 3)
    # the fifth digit is split over all four numbers with coefficient 2^1
    assert [n.exponents for n in nums] == [(1, 8), (2, 8), (3, 8), (4, 8)]


def test_form_number_rejects_bad_exponents():
    with pytest.raises(ValidationError):
        FormExistNumber(3, (4, 2))


def test_normalization():
    a, q, d = atom_parameters()
    norm = normalization()
    assert (norm.d, norm.m, norm.D) == (18, 2, 36)
    assert pow2(norm.D) * q > a >= pow2(d) * q


@given(st.lists(st.integers(0, 6), min_size=1, max_size=5, unique=True))
@settings(max_examples=60, deadline=None)
def test_form_number_recipe_value(ns):
    norm = normalization()
    num = FormExistNumber(norm.D, tuple(sorted(ns)))
    rec = form_number_recipe(num, norm)
    value = rec.evaluate()
    assert value.is_point and value.value == num.value


def test_atom_is_closed_form():
    I = ExplicitIndexSet([2, 5, 23])
    assert Atom(I).evaluate() == dimension_closed_form(I, 8)


def test_dyadic_digit_sets_reassemble():
    r = parse_binary("0.1101001110101")
    for D in (2, 3, 5, 36):
        sets = dyadic_digit_sets(r, 13, D)
        total = sum((pow2(k) * digit_target(s, D) for k, s in enumerate(sets)), Fraction(0))
        assert total == truncate(r, 13) == r


@given(st.integers(0, 2**40 - 1), st.integers(0, 40))
@settings(max_examples=40, deadline=None)
def test_realize_target(num, p):
    r = Fraction(num, 2**40)
    out = realize_target(r, p)
    assert out.value.is_point
    assert out.value.value == truncate(r, p)
    assert recipe_from_json(out.recipe.to_json()).evaluate() == out.value


def test_realize_target_validation():
    with pytest.raises(DomainError):
        realize_target(Fraction(3, 2), 4)
    with pytest.raises(ValidationError):
        realize_target(Fraction(1, 2), 4, D=40)
    assert realize_target("0.0101", 4, D=54).value.value == Fraction(5, 16)


def test_combinators():
    a = DimValue.constant(Fraction(1, 3))
    b = DimValue.atom([2])
    s = combine_sum(a, b)
    p = combine_product(a, b)
    assert s.value.value == Fraction(1, 3) + b.value.value
    assert p.value.value == b.value.value / 3
    assert scale(a, 6).value.value == 2
    assert shift(a, Fraction(2, 3)).value.value == 1
    with pytest.raises(DomainError):
        shift(a, -1)
    tree = Sum((Product(Constant(Fraction(2)), Constant(Fraction(3))),
                RationalScale(Fraction(1, 2), RationalShift(Fraction(1), Constant(Fraction(1))))))
    assert tree.evaluate().value == 7
    assert recipe_from_json(tree.to_json()).evaluate().value == 7
