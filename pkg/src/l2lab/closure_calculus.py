"""Arithmetic of kernel dimensions: block sums, tensor sums and digit splitting.

Kernel dimensions are closed under addition (block sum of operators) and
multiplication (tensor sum), and under adding or multiplying by non-negative
rationals.  Starting from the atoms ``a + q * sum_k 2^k 2^(-d n_k)`` produced
by the main formula, every truncated dyadic ``r`` in ``[0, 1)`` is assembled
here as an explicit recipe tree whose exact value is ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .dimension_engine import beta_constants, dimension_closed_form
from .errors import DomainError, ValidationError, VerificationError
from .exact import DimensionEnclosure, parse_binary, pow2, rational_str
from .group_core import ExplicitIndexSet, IndexSetSpec, as_index_set, index_set_from_json

# Atoms use index sets {2} ∪ {3 j + 5 : j in J}; then 2^(-6 n) = 2^(-30) 2^(-18 j).
ATOM_D = 18
ATOM_SHIFT = 30


# ---------------------------------------------------------------------------
# recipes


class Recipe:
    op = "abstract"

    def evaluate(self) -> DimensionEnclosure:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def atoms(self) -> list["Atom"]:
        return []


@dataclass(frozen=True)
class Atom(Recipe):
    index_set: IndexSetSpec
    constants: str = "stated"
    terms: int = 8
    op = "atom"

    def evaluate(self) -> DimensionEnclosure:
        terms = self.terms
        if self.index_set.size is not None:  # finite sets are summed exactly
            terms = max(terms, self.index_set.size - 1)
        return dimension_closed_form(self.index_set, terms, self.constants)

    def to_json(self) -> dict:
        return {"op": "atom", "index_set": self.index_set.to_json(), "constants": self.constants}

    def atoms(self):
        return [self]


@dataclass(frozen=True)
class Sum(Recipe):
    children: tuple = ()
    op = "sum"

    def evaluate(self) -> DimensionEnclosure:
        out = DimensionEnclosure.point(0, "sum")
        for c in self.children:
            out = out + c.evaluate()
        return DimensionEnclosure(out.lower, out.upper, "sum")

    def to_json(self) -> dict:
        return {"op": "sum", "children": [c.to_json() for c in self.children]}

    def atoms(self):
        return [a for c in self.children for a in c.atoms()]


@dataclass(frozen=True)
class Product(Recipe):
    left: Recipe
    right: Recipe
    op = "product"

    def evaluate(self) -> DimensionEnclosure:
        return self.left.evaluate() * self.right.evaluate()

    def to_json(self) -> dict:
        return {"op": "product", "children": [self.left.to_json(), self.right.to_json()]}

    def atoms(self):
        return self.left.atoms() + self.right.atoms()


@dataclass(frozen=True)
class RationalScale(Recipe):
    q: Fraction
    child: Recipe
    op = "scale"

    def __post_init__(self):
        if Fraction(self.q) < 0:
            raise DomainError("scale factors must be non-negative")

    def evaluate(self) -> DimensionEnclosure:
        return self.child.evaluate().scale(self.q)

    def to_json(self) -> dict:
        return {"op": "scale", "q": rational_str(self.q), "child": self.child.to_json()}

    def atoms(self):
        return self.child.atoms()


@dataclass(frozen=True)
class RationalShift(Recipe):
    a: Fraction
    child: Recipe
    op = "shift"

    def __post_init__(self):
        if Fraction(self.a) < 0:
            raise DomainError("shifts must be non-negative")

    def evaluate(self) -> DimensionEnclosure:
        return self.child.evaluate().shift(self.a)

    def to_json(self) -> dict:
        return {"op": "shift", "a": rational_str(self.a), "child": self.child.to_json()}

    def atoms(self):
        return self.child.atoms()


@dataclass(frozen=True)
class Constant(Recipe):
    """A non-negative rational, e.g. the empty sum."""

    value: Fraction
    op = "const"

    def evaluate(self) -> DimensionEnclosure:
        return DimensionEnclosure.point(self.value, "const")

    def to_json(self) -> dict:
        return {"op": "const", "value": rational_str(self.value)}


def recipe_from_json(obj: dict) -> Recipe:
    op = obj.get("op")
    if op == "atom":
        return Atom(index_set_from_json(obj["index_set"]), obj.get("constants", "stated"))
    if op == "sum":
        return Sum(tuple(recipe_from_json(c) for c in obj.get("children", [])))
    if op == "product":
        left, right = obj["children"]
        return Product(recipe_from_json(left), recipe_from_json(right))
    if op == "scale":
        return RationalScale(Fraction(obj["q"]), recipe_from_json(obj["child"]))
    if op == "shift":
        return RationalShift(Fraction(obj["a"]), recipe_from_json(obj["child"]))
    if op == "const":
        return Constant(Fraction(obj["value"]))
    raise ValidationError(f"unknown recipe op {op!r}")


@dataclass(frozen=True)
class DimValue:
    value: DimensionEnclosure
    recipe: Recipe

    @classmethod
    def of(cls, recipe: Recipe) -> "DimValue":
        return cls(recipe.evaluate(), recipe)

    @classmethod
    def atom(cls, I, constants: str = "stated") -> "DimValue":
        return cls.of(Atom(as_index_set(I), constants))

    @classmethod
    def constant(cls, q) -> "DimValue":
        return cls.of(Constant(Fraction(q)))


def combine_sum(a: DimValue, b: DimValue) -> DimValue:
    """Block sum: dimensions add."""
    return DimValue(DimensionEnclosure(a.value.lower + b.value.lower,
                                       a.value.upper + b.value.upper, "sum"),
                    Sum((a.recipe, b.recipe)))


def combine_product(a: DimValue, b: DimValue) -> DimValue:
    """Tensor sum of non-negative operators: dimensions multiply."""
    return DimValue(a.value * b.value, Product(a.recipe, b.recipe))


def scale(a: DimValue, q) -> DimValue:
    return DimValue(a.value.scale(q), RationalScale(Fraction(q), a.recipe))


def shift(a: DimValue, q) -> DimValue:
    q = Fraction(q)
    if q < 0:
        raise DomainError("shifts must be non-negative")
    return DimValue(a.value.shift(q), RationalShift(q, a.recipe))


# ---------------------------------------------------------------------------
# numbers of the form sum_k 2^k 2^(-D n_k)


@dataclass(frozen=True)
class FormExistNumber:
    D: int
    exponents: tuple = ()

    def __post_init__(self):
        ex = tuple(int(n) for n in self.exponents)
        object.__setattr__(self, "exponents", ex)
        if any(n < 0 for n in ex) or any(b <= a for a, b in zip(ex, ex[1:])):
            raise ValidationError(f"exponents must be strictly increasing naturals: {ex}")

    @property
    def value(self) -> Fraction:
        return sum((pow2(k - self.D * n) for k, n in enumerate(self.exponents)), Fraction(0))

    def is_well_formed(self) -> bool:
        ex = self.exponents
        return all(n >= 0 for n in ex) and all(b > a for a, b in zip(ex, ex[1:]))

    def to_json(self) -> dict:
        return {"D": self.D, "exponents": list(self.exponents)}


def digit_target(I: Iterable[int], D: int) -> Fraction:
    return sum((pow2(-D * n) for n in set(I)), Fraction(0))


def split_digits_sparse(I: Iterable[int], D: int) -> dict[int, FormExistNumber]:
    """Distribute the digits of ``r = sum_{n in I} 2^(-D n)`` over ``2^(D-1)``
    numbers of the form ``sum_k 2^k 2^(-D n_k)``; only nonzero numbers returned.

    Digits are consumed from the most significant one.  The first ``M = 2^(D-1)``
    digits become the leading term of numbers ``0..M-1``.  Afterwards the
    digits run in cycles ``c = 1, 2, ...`` of ``D`` stages; in stage ``j`` each of
    ``2^(j-1)`` digits ``2^(-D n)`` is split into ``2^(D-j)`` equal parts
    ``2^k 2^(-D (n + c))`` with ``k = (c-1) D + j``, one for each number in a
    block of ``2^(D-j)`` consecutive numbers.  Every number thus receives one
    term per stage, so its ``k``-th term carries coefficient ``2^k``.
    """
    if D < 1:
        raise ValidationError("D must be >= 1")
    digits = sorted(set(int(n) for n in I))
    if any(n < 0 for n in digits):
        raise ValidationError("digit positions must be naturals")
    M = 1 << (D - 1)
    terms: dict[int, list[int]] = {}
    pos = 0
    for i in range(min(M, len(digits))):
        terms[i] = [digits[pos]]
        pos += 1
    c = 1
    while pos < len(digits):
        for j in range(1, D + 1):
            width = 1 << (D - j)
            for grp in range(1 << (j - 1)):
                if pos >= len(digits):
                    break
                n = digits[pos]
                pos += 1
                for idx in range(grp * width, (grp + 1) * width):
                    terms.setdefault(idx, []).append(n + c)
            if pos >= len(digits):
                break
        c += 1
    return {i: FormExistNumber(D, tuple(t)) for i, t in sorted(terms.items())}


def split_digits(I: Iterable[int], D: int) -> list[FormExistNumber]:
    """All ``2^(D-1)`` numbers (zeros included) of :func:`split_digits_sparse`."""
    if D > 20:
        raise ValidationError("dense digit splitting limited to D <= 20; use split_digits_sparse")
    sparse = split_digits_sparse(I, D)
    return [sparse.get(i, FormExistNumber(D, ())) for i in range(1 << (D - 1))]


# ---------------------------------------------------------------------------
# realizing targets


@dataclass(frozen=True)
class Normalization:
    a: Fraction
    q: Fraction
    d: int
    m: int

    @property
    def D(self) -> int:
        return self.d * self.m


def atom_parameters(constants: str = "stated") -> tuple[Fraction, Fraction, int]:
    """``(a, q, d)`` with every atom equal to ``a + q sum_k 2^k 2^(-d j_k)``."""
    b1, b2 = beta_constants(constants)
    return b1, b2 * pow2(-ATOM_SHIFT), ATOM_D


def normalization(constants: str = "stated") -> Normalization:
    """Least ``m >= 1`` with ``2^(d m) q > a``."""
    a, q, d = atom_parameters(constants)
    m = 1
    while pow2(d * m) * q <= a:
        m += 1
    return Normalization(a, q, d, m)


def atom_for_exponents(j: Iterable[int]) -> ExplicitIndexSet:
    return ExplicitIndexSet([2] + [3 * x + 5 for x in j])


def form_number_recipe(num: FormExistNumber, norm: Normalization,
                       constants: str = "stated") -> Recipe:
    """Recipe with value ``sum_k 2^k 2^(-D N_k)`` built from one atom.

    ``(atom + 2^D q - a) / q = 2^D + sum_{k>=1} 2^k 2^(-D (N_k - N_0 - 1))`` once
    the atom uses ``j_k = m (N_k - N_0 - 1)``; multiplying by ``2^(-D (N_0 + 1))``
    moves the leading ``2^D`` to ``2^(-D N_0)``.
    """
    if num.D != norm.D:
        raise ValidationError(f"number uses D={num.D}, normalization gives D={norm.D}")
    if not num.exponents:
        return Constant(Fraction(0))
    N0 = num.exponents[0]
    j = [norm.m * (N - N0 - 1) for N in num.exponents[1:]]
    atom = Atom(atom_for_exponents(j), constants)
    chain = RationalShift(pow2(norm.D) * norm.q - norm.a, atom)
    chain = RationalScale(1 / norm.q, chain)
    return RationalScale(pow2(-norm.D * (N0 + 1)), chain)


def dyadic_digit_sets(r: Fraction, p: int, D: int) -> list[list[int]]:
    """Write the ``p``-digit truncation of ``r`` as ``sum_{k<D} 2^k r_k`` with
    ``r_k = sum_{n in I_k} 2^(-D n)``: bit ``i`` goes to ``n = ceil(i/D)``,
    ``k = D n - i``."""
    sets: list[list[int]] = [[] for _ in range(D)]
    frac = r
    for i in range(1, p + 1):
        frac *= 2
        if frac >= 1:
            frac -= 1
            n = -(-i // D)
            sets[D * n - i].append(n)
    return sets


def truncate(r: Fraction, p: int) -> Fraction:
    scale_ = 1 << p
    return Fraction((r.numerator * scale_) // r.denominator, scale_)


def realize_target(r, p: int, D: int | None = None, constants: str = "stated") -> DimValue:
    """Recipe whose exact value is the ``p``-digit truncation of ``r`` in ``[0, 1)``.

    ``r`` may be a Fraction or a binary string such as ``"0.101"``.
    """
    if isinstance(r, str):
        r = parse_binary(r)
    r = Fraction(r)
    if not 0 <= r < 1:
        raise DomainError("target must lie in [0, 1); pre-scale by a power of 2")
    if p < 0:
        raise ValidationError("precision must be >= 0")
    norm = normalization(constants)
    if D is not None and D != norm.D:
        if D % norm.d or D // norm.d < norm.m:
            raise ValidationError(
                f"D must be a multiple of {norm.d} that is at least {norm.D}")
        norm = Normalization(norm.a, norm.q, norm.d, D // norm.d)
    parts = []
    for k, digits in enumerate(dyadic_digit_sets(r, p, norm.D)):
        if not digits:
            continue
        for num in split_digits_sparse(digits, norm.D).values():
            rec = form_number_recipe(num, norm, constants)
            parts.append(RationalScale(pow2(k), rec) if k else rec)
    recipe = Sum(tuple(parts))
    out = DimValue.of(recipe)
    if out.value.lower != truncate(r, p) or not out.value.is_point:
        raise VerificationError("realized value differs from the truncated target")
    return out
