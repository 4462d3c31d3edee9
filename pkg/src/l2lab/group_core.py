"""Elements of the two base groups, the free group F2 and the wreath product Z wr Z.

Both groups are generated by ``s1`` and ``s2``.  Letters are encoded as small
integers: ``1``/``-1`` for ``s1``/``s1^-1`` and ``2``/``-2`` for ``s2``/``s2^-1``.

* F2 elements are freely reduced words (:class:`FreeWord`).
* Z wr Z elements are pairs ``(lamp, shift)`` (:class:`WreathElement`) where
  ``s1`` toggles the lamp at the current position by +1 and ``s2`` moves the
  position.  In this model ``t_n = s2^n s1 s2^-n`` is the lamp ``{n: 1}``.

Both element types are immutable, hashable and totally ordered by
:meth:`sort_key`, so that sets of elements enumerate deterministically.
"""

from __future__ import annotations

import enum
import math
import os
import re
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import count as _count
from typing import Callable, ClassVar, Iterable, Iterator, Sequence

from .errors import ResourceError, UsageError, ValidationError

S1, S1_INV, S2, S2_INV = 1, -1, 2, -2
GENERATORS = (S1, S1_INV, S2, S2_INV)
_LETTER_RANK = {S1: 0, S1_INV: 1, S2: 2, S2_INV: 3}
_LETTER_NAME = {1: "s1", 2: "s2"}

DEFAULT_MAX_BALL_RADIUS = 12


class GroupId(enum.Enum):
    FREE2 = "free2"
    WREATH = "wreath"

    @classmethod
    def parse(cls, name: str | "GroupId") -> "GroupId":
        if isinstance(name, GroupId):
            return name
        aliases = {"free2": cls.FREE2, "f2": cls.FREE2, "free": cls.FREE2,
                   "wreath": cls.WREATH, "zwrz": cls.WREATH, "wreathzz": cls.WREATH}
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ValidationError(f"unknown group {name!r}") from None


def _power_string(letter: int, power: int) -> str:
    name = _LETTER_NAME[letter]
    return name if power == 1 else f"{name}^{power}"


@dataclass(frozen=True, slots=True)
class FreeWord:
    """A freely reduced word in F2."""

    letters: tuple[int, ...] = ()
    group: ClassVar[GroupId] = GroupId.FREE2

    @classmethod
    def from_letters(cls, letters: Iterable[int]) -> "FreeWord":
        out: list[int] = []
        for a in letters:
            if out and out[-1] == -a:
                out.pop()
            else:
                out.append(a)
        return cls(tuple(out))

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        if not isinstance(other, FreeWord):
            raise UsageError(f"cannot multiply F2 element by {type(other).__name__}")
        a, b = self.letters, other.letters
        i = 0
        n = min(len(a), len(b))
        while i < n and a[-1 - i] == -b[i]:
            i += 1
        return FreeWord(a[: len(a) - i] + b[i:])

    def mul_letter(self, letter: int) -> "FreeWord":
        a = self.letters
        if a and a[-1] == -letter:
            return FreeWord(a[:-1])
        return FreeWord(a + (letter,))

    def inverse(self) -> "FreeWord":
        return FreeWord(tuple(-a for a in reversed(self.letters)))

    def is_identity(self) -> bool:
        return not self.letters

    def sort_key(self):
        return (len(self.letters), tuple(_LETTER_RANK[a] for a in self.letters))

    def word_length(self) -> int:
        return len(self.letters)

    def height(self) -> int:
        """Exponent sum of ``s2``: the image in ``Z = <s2>``."""
        return sum(1 if a == S2 else -1 if a == S2_INV else 0 for a in self.letters)

    def s1_line(self) -> tuple["FreeWord", int]:
        """Split ``self = rep * s1^k`` with ``rep`` not ending in ``s1^{+-1}``."""
        a = self.letters
        i = len(a)
        while i and abs(a[i - 1]) == 1:
            i -= 1
        return FreeWord(a[:i]), sum(a[i:])

    def syllables(self) -> list[tuple[int, int]]:
        out: list[tuple[int, int]] = []
        for a in self.letters:
            gen, sign = abs(a), (1 if a > 0 else -1)
            if out and out[-1][0] == gen:
                out[-1] = (gen, out[-1][1] + sign)
            else:
                out.append((gen, sign))
        return out

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        return "*".join(_power_string(g, p) for g, p in self.syllables())

    def __repr__(self) -> str:
        return f"FreeWord({self})"


def _lamp_add(base: dict[int, int], other: Iterable[tuple[int, int]], offset: int) -> None:
    for pos, val in other:
        p = pos + offset
        v = base.get(p, 0) + val
        if v:
            base[p] = v
        else:
            base.pop(p, None)


@dataclass(frozen=True, slots=True)
class WreathElement:
    """An element ``(lamp, shift)`` of Z wr Z; ``lamp`` holds no zero values."""

    lamp: tuple[tuple[int, int], ...] = ()
    shift: int = 0
    group: ClassVar[GroupId] = GroupId.WREATH

    @classmethod
    def make(cls, lamp: dict[int, int], shift: int) -> "WreathElement":
        return cls(tuple(sorted((p, v) for p, v in lamp.items() if v)), shift)

    def __mul__(self, other: "WreathElement") -> "WreathElement":
        if not isinstance(other, WreathElement):
            raise UsageError(f"cannot multiply Z wr Z element by {type(other).__name__}")
        if not other.lamp:
            return WreathElement(self.lamp, self.shift + other.shift)
        lamp = dict(self.lamp)
        _lamp_add(lamp, other.lamp, self.shift)
        return WreathElement.make(lamp, self.shift + other.shift)

    def mul_letter(self, letter: int) -> "WreathElement":
        if letter == S2:
            return WreathElement(self.lamp, self.shift + 1)
        if letter == S2_INV:
            return WreathElement(self.lamp, self.shift - 1)
        lamp = dict(self.lamp)
        _lamp_add(lamp, ((0, letter),), self.shift)
        return WreathElement.make(lamp, self.shift)

    def inverse(self) -> "WreathElement":
        return WreathElement(tuple((p - self.shift, -v) for p, v in self.lamp), -self.shift)

    def is_identity(self) -> bool:
        return not self.lamp and self.shift == 0

    def sort_key(self):
        return (self.shift, self.lamp)

    def word_length(self) -> int:
        """Word length w.r.t. ``{s1, s2}``: lamp mass plus the shortest tour
        from 0 visiting every lit position and ending at ``shift``."""
        mass = sum(abs(v) for _, v in self.lamp)
        if not self.lamp:
            return mass + abs(self.shift)
        lo = min(self.lamp[0][0], 0)
        hi = max(self.lamp[-1][0], 0)
        k = self.shift
        lo, hi = min(lo, k), max(hi, k)
        tour = min(-lo + (hi - lo) + abs(hi - k), hi + (hi - lo) + abs(k - lo))
        return mass + tour

    def height(self) -> int:
        return self.shift

    def s1_line(self) -> tuple["WreathElement", int]:
        lamp = dict(self.lamp)
        k = lamp.pop(self.shift, 0)
        return WreathElement.make(lamp, self.shift), k

    def __str__(self) -> str:
        parts = [f"t{p}" if v == 1 else f"t{p}^{v}" for p, v in self.lamp]
        if self.shift:
            parts.append(_power_string(2, self.shift))
        return "*".join(parts) if parts else "e"

    def __repr__(self) -> str:
        return f"WreathElement({self})"


GroupElement = FreeWord | WreathElement

_ELEMENT_TYPES = {GroupId.FREE2: FreeWord, GroupId.WREATH: WreathElement}


def identity(group: GroupId) -> GroupElement:
    return _ELEMENT_TYPES[GroupId.parse(group)]()


def from_letters(letters: Iterable[int], group: GroupId) -> GroupElement:
    g = identity(group)
    for a in letters:
        if a not in _LETTER_RANK:
            raise ValidationError(f"bad letter {a!r}")
        g = g.mul_letter(a)
    return g


def generator(letter: int, group: GroupId) -> GroupElement:
    return from_letters((letter,), group)


def mul(a: GroupElement, b: GroupElement) -> GroupElement:
    """Product in the common group of ``a`` and ``b``."""
    if type(a) is not type(b):
        raise UsageError(f"mixed groups: {a.group.value} and {getattr(b, 'group', type(b))}")
    return a * b


def inverse(a: GroupElement) -> GroupElement:
    return a.inverse()


def power(a: GroupElement, k: int) -> GroupElement:
    base = a if k >= 0 else a.inverse()
    out = identity(a.group)
    for _ in range(abs(k)):
        out = out * base
    return out


def commutator(a: GroupElement, b: GroupElement) -> GroupElement:
    return a * b * a.inverse() * b.inverse()


def group_of(a: GroupElement) -> GroupId:
    return a.group


def t_generator(n: int, group: GroupId) -> GroupElement:
    """``t_n = s2^n s1 s2^-n`` in normal form."""
    group = GroupId.parse(group)
    if group is GroupId.WREATH:
        return WreathElement(((n, 1),), 0)
    up = (S2,) * n if n >= 0 else (S2_INV,) * -n
    down = tuple(-a for a in up)
    return FreeWord(up + (S1,) + down)


def s1_power(k: int, group: GroupId) -> GroupElement:
    return from_letters((S1 if k > 0 else S1_INV,) * abs(k), group)


def s2_power(k: int, group: GroupId) -> GroupElement:
    return from_letters((S2 if k > 0 else S2_INV,) * abs(k), group)


_TOKEN = re.compile(r"\s*(e|s1|s2|t(-?\d+))(?:\^\(?(-?\d+)\)?)?\s*(?:\*|\s|$)")


def parse_element(text: str, group: GroupId) -> GroupElement:
    """Parse ``"s2^2*s1*s2^-2"``, ``"t3^-1*s2"`` or ``"e"`` into normal form."""
    group = GroupId.parse(group)
    text = text.strip()
    g = identity(group)
    pos = 0
    if not text:
        raise ValidationError("empty group element string")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValidationError(f"cannot parse group element {text!r} at {pos}")
        pos = m.end()
        name, tindex, exp = m.group(1), m.group(2), m.group(3)
        k = int(exp) if exp is not None else 1
        if name == "e":
            continue
        if name == "s1":
            g = g * s1_power(k, group)
        elif name == "s2":
            g = g * s2_power(k, group)
        else:
            g = g * power(t_generator(int(tindex), group), k)
    return g


def format_element(g: GroupElement) -> str:
    return str(g)


def sort_elements(elements: Iterable[GroupElement]) -> list[GroupElement]:
    return sorted(elements, key=lambda g: g.sort_key())


def max_ball_radius() -> int:
    raw = os.environ.get("L2LAB_MAX_BALL_RADIUS")
    if raw is None:
        return DEFAULT_MAX_BALL_RADIUS
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"L2LAB_MAX_BALL_RADIUS must be an integer, got {raw!r}") from None


def ball_around(centers: Iterable[GroupElement], radius: int) -> set[GroupElement]:
    """``B(centers, radius)`` in the right Cayley graph (neighbours ``g*s``)."""
    seen = set(centers)
    frontier = list(seen)
    for _ in range(radius):
        nxt = []
        for g in frontier:
            for a in GENERATORS:
                h = g.mul_letter(a)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return seen


def ball(radius: int, group: GroupId, cap: int | None = None) -> list[GroupElement]:
    """All elements at word distance <= ``radius`` from ``e``, canonically sorted."""
    group = GroupId.parse(group)
    cap = max_ball_radius() if cap is None else cap
    if radius < 0:
        raise ValidationError("negative radius")
    if radius > cap:
        raise ResourceError(f"ball radius {radius} exceeds cap {cap} (set L2LAB_MAX_BALL_RADIUS)")
    return sort_elements(_ball_cached(radius, group))


@lru_cache(maxsize=32)
def _ball_cached(radius: int, group: GroupId) -> frozenset:
    return frozenset(ball_around([identity(group)], radius))


def ball_offsets(radius: int, group: GroupId) -> tuple[GroupElement, ...]:
    """Canonically sorted ``B(e, radius)``; cached, used for windowed lookups."""
    return tuple(sort_elements(_ball_cached(radius, GroupId.parse(group))))


def neighbours(g: GroupElement) -> list[GroupElement]:
    return [g.mul_letter(a) for a in GENERATORS]


# ---------------------------------------------------------------------------
# index sets


class IndexSetSpec:
    """A strictly increasing set of naturals ``n_0 < n_1 < ...``.

    Subclasses supply :meth:`element`; finite sets report their ``size``,
    rule-based sets have ``size is None`` and enumerate lazily.
    """

    kind = "abstract"
    size: int | None = None
    count: int = 0

    def element(self, k: int) -> int:
        raise NotImplementedError

    def first(self, count: int) -> list[int]:
        if self.size is not None:
            count = min(count, self.size)
        return [self.element(k) for k in range(count)]

    def materialize(self, count: int | None = None) -> list[int]:
        if count is None:
            if self.size is not None:
                return self.first(self.size)
            count = self.count + 1
        return self.first(count)

    def __iter__(self) -> Iterator[int]:
        for k in _count():
            if self.size is not None and k >= self.size:
                return
            yield self.element(k)

    def upto(self, bound: int) -> list[int]:
        out = []
        for n in self:
            if n > bound:
                break
            out.append(n)
        return out

    def __contains__(self, n: int) -> bool:
        for m in self:
            if m == n:
                return True
            if m > n:
                return False
        return False

    def count_upto(self, bound: int) -> int:
        """``|I ∩ {1, ..., bound}|``."""
        return sum(1 for n in self.upto(bound) if n >= 1)

    @property
    def is_finite(self) -> bool:
        return self.size is not None

    def to_json(self) -> dict:
        raise NotImplementedError

    def _check_increasing(self, values: Sequence[int]) -> None:
        if any(v < 0 for v in values):
            raise ValidationError("index sets contain naturals only")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValidationError(f"index set must be strictly increasing: {list(values)}")


class ExplicitIndexSet(IndexSetSpec):
    kind = "explicit"

    def __init__(self, elements: Iterable[int]):
        values = [int(v) for v in elements]
        self._check_increasing(values)
        self.elements = tuple(values)
        self._set = frozenset(values)
        self.size = len(values)
        self.count = max(len(values) - 1, 0)

    def element(self, k: int) -> int:
        if k >= self.size:
            raise IndexError(k)
        return self.elements[k]

    def __contains__(self, n: int) -> bool:
        return n in self._set

    def to_json(self) -> dict:
        return {"kind": "explicit", "elements": list(self.elements)}

    def __eq__(self, other) -> bool:
        return isinstance(other, ExplicitIndexSet) and other.elements == self.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return f"ExplicitIndexSet({list(self.elements)})"


class FactorialIndexSet(IndexSetSpec):
    """``{2, m_1, m_2, ...}`` with ``m_k`` the least value ``>= k!`` that is
    ``2 mod 3`` and exceeds ``m_{k-1}``.  With ``adjust=False`` the plain
    factorials ``{k! : k >= 1}`` are used instead.

    The rule is infinite; ``count`` is the number of terms after the leading
    element that callers materialize by default.
    """

    kind = "factorial"

    def __init__(self, count: int = 4, adjust: bool = True):
        if count < 0:
            raise ValidationError("factorial count must be >= 0")
        self.count = int(count)
        self.adjust = bool(adjust)
        self._cache: list[int] = []

    def element(self, k: int) -> int:
        while len(self._cache) <= k:
            j = len(self._cache)
            if not self.adjust:
                self._cache.append(math.factorial(j + 1))
                continue
            if j == 0:
                self._cache.append(2)
                continue
            m = max(math.factorial(j), self._cache[-1] + 1)
            m += (2 - m) % 3
            self._cache.append(m)
        return self._cache[k]

    def to_json(self) -> dict:
        out = {"kind": "factorial", "count": self.count}
        if not self.adjust:
            out["adjust"] = False
        return out

    def __repr__(self) -> str:
        return f"FactorialIndexSet(count={self.count}, adjust={self.adjust})"


class CustomIndexSet(IndexSetSpec):
    """Index set given by a rule ``k -> n_k`` (strictly increasing)."""

    kind = "custom"

    def __init__(self, rule: Callable[[int], int], count: int = 4, size: int | None = None,
                 name: str = "custom"):
        self.rule = rule
        self.count = count
        self.size = size
        self.name = name

    def element(self, k: int) -> int:
        if self.size is not None and k >= self.size:
            raise IndexError(k)
        n = int(self.rule(k))
        if k and n <= int(self.rule(k - 1)):
            raise ValidationError(f"custom index rule not increasing at k={k}")
        return n

    def to_json(self) -> dict:
        return {"kind": "custom", "name": self.name, "elements": self.materialize()}

    def __repr__(self) -> str:
        return f"CustomIndexSet({self.name})"


def index_set_from_json(obj) -> IndexSetSpec:
    """Build an index set from its JSON form (or a plain list of naturals)."""
    if isinstance(obj, (list, tuple)):
        return ExplicitIndexSet(obj)
    if not isinstance(obj, dict):
        raise ValidationError(f"index set must be a JSON object or list, got {obj!r}")
    kind = obj.get("kind")
    if kind in ("explicit", "custom"):
        if "elements" not in obj:
            raise ValidationError("explicit index set needs 'elements'")
        return ExplicitIndexSet(obj["elements"])
    if kind == "factorial":
        return FactorialIndexSet(int(obj.get("count", 4)), bool(obj.get("adjust", True)))
    raise ValidationError(f"unknown index set kind {kind!r}")


def as_index_set(I) -> IndexSetSpec:
    if isinstance(I, IndexSetSpec):
        return I
    if I is None:
        return ExplicitIndexSet([])
    if isinstance(I, dict):
        return index_set_from_json(I)
    return ExplicitIndexSet(sorted(set(I)))


def validate_for_theorem(I: IndexSetSpec, terms: int | None = None) -> list[int]:
    """Check ``2 = n_0 < n_1 < ...`` with every ``n_k = 2 mod 3``.

    Finite sets are checked completely; rule-based sets on the first
    ``terms + 2`` elements.  Returns the checked prefix.
    """
    if I.is_finite:
        values = I.materialize()
    else:
        values = I.first((terms if terms is not None else I.count) + 2)
    if not values or values[0] != 2:
        raise ValidationError("index set must start with 2")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError("index set must be strictly increasing")
    bad = [n for n in values if n % 3 != 2]
    if bad:
        raise ValidationError(f"index set elements must be 2 mod 3, offending: {bad}")
    return values


# ---------------------------------------------------------------------------
# the subgroups Lambda_I


def lambda_membership(x: GroupElement, I) -> bool:
    """Whether ``x`` lies in ``Lambda_I = <t_i : i in I>``."""
    I = as_index_set(I)
    if isinstance(x, WreathElement):
        return x.shift == 0 and all(p in I for p, _ in x.lamp)
    # F2: {t_i} is a free basis, so x is in Lambda_I iff its reduced word reads
    # s2^{h_1} s1^{a_1} s2^{h_2-h_1} ... s2^{-h_k} with every height h_j in I.
    height = 0
    for a in x.letters:
        if a == S2:
            height += 1
        elif a == S2_INV:
            height -= 1
        elif height < 0 or height not in I:
            return False
    return height == 0


def lambda_word(x: GroupElement, I) -> list[tuple[int, int]] | None:
    """Express ``x`` as ``[(n, power), ...]`` over the ``t_n`` or return None."""
    I = as_index_set(I)
    if not lambda_membership(x, I):
        return None
    if isinstance(x, WreathElement):
        return [(p, v) for p, v in x.lamp]
    out: list[tuple[int, int]] = []
    height = 0
    for gen, p in x.syllables():
        if gen == 2:
            height += p
        else:
            out.append((height, p))
    return out


def bfs_distance(a: GroupElement, b: GroupElement, limit: int = 8) -> int | None:
    """Word distance between ``a`` and ``b`` by bounded BFS (None if > limit)."""
    target = a.inverse() * b
    if target.is_identity():
        return 0
    seen = {identity(a.group)}
    frontier = deque([(identity(a.group), 0)])
    while frontier:
        g, d = frontier.popleft()
        if d == limit:
            continue
        for s in GENERATORS:
            h = g.mul_letter(s)
            if h in seen:
                continue
            if h == target:
                return d + 1
            seen.add(h)
            frontier.append((h, d + 1))
    return None
