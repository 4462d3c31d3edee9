"""Local pattern classification on Cayley-graph windows.

A character ``chi`` is only ever known on a finite window; :class:`Pattern`
stores that window together with the set of points where ``chi`` is 1.  All
classifiers look at ``chi`` "seen from" a centre ``c``, i.e. at the function
``h -> chi(c*h)``, so neighbours of ``c`` are the points ``c*s``.  Reading a
point outside the window raises :class:`WindowError`; nothing is ever assumed
to be zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ValidationError, WindowError
from .group_core import (
    GENERATORS,
    S1,
    S1_INV,
    S2,
    S2_INV,
    GroupElement,
    GroupId,
    ball_around,
    ball_offsets,
    from_letters,
    identity,
    parse_element,
    sort_elements,
)

_LETTER_ALIASES = {
    "s1": S1, "s1^-1": S1_INV, "s1^{-1}": S1_INV, "S1": S1_INV,
    "s2": S2, "s2^-1": S2_INV, "s2^{-1}": S2_INV, "S2": S2_INV,
}


def parse_letter(s) -> int:
    if isinstance(s, int) and s in GENERATORS:
        return s
    if isinstance(s, str) and s in _LETTER_ALIASES:
        return _LETTER_ALIASES[s]
    raise ValidationError(f"not a generator: {s!r}")


def letter_name(a: int) -> str:
    return {S1: "s1", S1_INV: "s1^-1", S2: "s2", S2_INV: "s2^-1"}[a]


# ---------------------------------------------------------------------------
# patterns


@dataclass(frozen=True)
class Pattern:
    """A 0/1 function on a finite window, stored as ``(window, ones)``."""

    window: frozenset
    ones: frozenset

    def __post_init__(self):
        object.__setattr__(self, "window", frozenset(self.window))
        object.__setattr__(self, "ones", frozenset(self.ones))
        if not self.ones <= self.window:
            raise ValidationError("pattern has ones outside its window")

    @classmethod
    def from_ones(cls, ones: Iterable[GroupElement], window: Iterable[GroupElement]) -> "Pattern":
        ones = frozenset(ones)
        return cls(frozenset(window) | ones, ones)

    @classmethod
    def from_bits(cls, points: Sequence[GroupElement], bits: Sequence[int]) -> "Pattern":
        return cls(frozenset(points), frozenset(p for p, b in zip(points, bits) if b))

    def value(self, x: GroupElement) -> int:
        if x not in self.window:
            raise WindowError(f"point {x} lies outside the pattern window")
        return 1 if x in self.ones else 0

    def __getitem__(self, x: GroupElement) -> int:
        return self.value(x)

    def covers(self, points: Iterable[GroupElement]) -> bool:
        return all(p in self.window for p in points)

    def require(self, points: Iterable[GroupElement]) -> None:
        for p in points:
            if p not in self.window:
                raise WindowError(f"window does not contain {p}")

    def restrict(self, points: Iterable[GroupElement]) -> "Pattern":
        points = frozenset(points)
        self.require(points)
        return Pattern(points, self.ones & points)

    def translate(self, g: GroupElement) -> "Pattern":
        """The pattern ``h -> chi(g^-1 h)``, i.e. everything moved by ``g``."""
        return Pattern(frozenset(g * x for x in self.window), frozenset(g * x for x in self.ones))

    def seen_from(self, c: GroupElement) -> "Pattern":
        """The pattern ``h -> chi(c h)`` (``chi`` re-centred at ``c``)."""
        return self.translate(c.inverse())

    def bits(self, order: Sequence[GroupElement]) -> list[int]:
        return [self.value(x) for x in order]

    def to_json(self) -> dict:
        pts = sort_elements(self.window)
        return {
            "window": [str(p) for p in pts],
            "values": [[str(p), 1 if p in self.ones else 0] for p in pts],
        }

    @classmethod
    def from_json(cls, obj: dict, group: GroupId) -> "Pattern":
        window = [parse_element(s, group) for s in obj.get("window", [])]
        ones = []
        for item in obj.get("values", []):
            p = parse_element(item[0], group)
            window.append(p)
            if int(item[1]):
                ones.append(p)
        return cls(frozenset(window), frozenset(ones))


# ---------------------------------------------------------------------------
# local classes


class LocalClass(enum.Enum):
    NOT_ONE_GOOD = "not 1-good"
    ONE_GOOD_NOT_LOCALLY_GOOD = "1-good, not locally good"
    GOOD_END = "good end"
    INTERIOR_GOOD = "interior good"


# The possible restrictions to B(e,1) of a hook through e, as sets of
# neighbour letters: leg interior, lower endpoint, left corner g, right corner gs1.
ONE_GOOD_SHAPES = frozenset({
    frozenset({S2, S2_INV}),
    frozenset({S2}),
    frozenset({S2_INV, S1}),
    frozenset({S2_INV, S1_INV}),
})

_WEIGHT = {
    LocalClass.INTERIOR_GOOD: Fraction(1),
    LocalClass.GOOD_END: Fraction(2),
    LocalClass.ONE_GOOD_NOT_LOCALLY_GOOD: Fraction(1, 2),
    LocalClass.NOT_ONE_GOOD: Fraction(0),
}


def occupied_letters(chi: Pattern, c: GroupElement) -> frozenset:
    return frozenset(a for a in GENERATORS if chi.value(c.mul_letter(a)))


def is_one_good(chi: Pattern, c: GroupElement) -> bool:
    if not chi.value(c):
        for a in GENERATORS:  # still insist the whole ball is visible
            chi.value(c.mul_letter(a))
        return False
    return occupied_letters(chi, c) in ONE_GOOD_SHAPES


class LocalClassifier:
    """Memoised classification of one pattern at many centres."""

    def __init__(self, chi: Pattern):
        self.chi = chi
        self._one_good: dict = {}
        self._cls: dict = {}

    def one_good(self, c: GroupElement) -> bool:
        v = self._one_good.get(c)
        if v is None:
            v = self._one_good[c] = is_one_good(self.chi, c)
        return v

    def classify(self, c: GroupElement) -> LocalClass:
        v = self._cls.get(c)
        if v is not None:
            return v
        self.chi.require(c * b for b in ball_offsets(2, c.group))
        if not self.one_good(c):
            v = LocalClass.NOT_ONE_GOOD
        else:
            occ = occupied_letters(self.chi, c)
            if not all(self.one_good(c.mul_letter(a)) for a in occ):
                v = LocalClass.ONE_GOOD_NOT_LOCALLY_GOOD
            elif len(occ) == 2:
                v = LocalClass.INTERIOR_GOOD
            else:
                v = LocalClass.GOOD_END
        self._cls[c] = v
        return v

    def f(self, s: int, c: GroupElement) -> Fraction:
        if self.classify(c) is not LocalClass.INTERIOR_GOOD:
            return Fraction(0)
        return _WEIGHT[self.classify(c.mul_letter(s))]

    def g(self, s: int, c: GroupElement) -> Fraction:
        return self.f(s, c) + self.f(-s, c.mul_letter(s))


def _centre(chi: Pattern, center):
    if center is not None:
        return center
    for x in chi.window:
        return identity(x.group)
    raise ValidationError("empty pattern window")


def classify_local(chi: Pattern, center: GroupElement | None = None) -> LocalClass:
    """Class of ``chi`` seen from ``center``; the window must contain ``B(center, 2)``."""
    return LocalClassifier(chi).classify(_centre(chi, center))


def f_s(chi: Pattern, s, center: GroupElement | None = None) -> Fraction:
    """``F_s``: nonzero only when ``chi`` is interior good at the centre; then
    1, 2 or 1/2 according as the next point ``c*s`` is interior good, a good
    end, or 1-good but not locally good."""
    return LocalClassifier(chi).f(parse_letter(s), _centre(chi, center))


def g_s(chi: Pattern, s, center: GroupElement | None = None) -> Fraction:
    """``G_s = F_s + F_{s^-1}`` evaluated one step further along ``s``."""
    return LocalClassifier(chi).g(parse_letter(s), _centre(chi, center))


def table_entry(row: LocalClass, col: LocalClass) -> tuple[Fraction, Fraction]:
    """The pair ``(F_s(chi), F_{s^-1}(s^-1 chi))`` when ``s^-1 chi`` has class
    ``row`` and ``chi`` has class ``col``; the second component is the
    transpose of the first."""
    first = _WEIGHT[row] if col is LocalClass.INTERIOR_GOOD else Fraction(0)
    second = _WEIGHT[col] if row is LocalClass.INTERIOR_GOOD else Fraction(0)
    return first, second


# ---------------------------------------------------------------------------
# hooks


@dataclass(frozen=True)
class Hook:
    """A hook ``g s2^-n, ..., g, g s1, ..., g s1 s2^-m`` or, with
    ``kind="vertical"``, the vertical segment ``base, base s2, ..., base s2^m``."""

    base: GroupElement
    n: int
    m: int
    kind: str = "hook"

    def __post_init__(self):
        if self.kind not in ("hook", "vertical"):
            raise ValidationError(f"unknown hook kind {self.kind!r}")
        if self.n < 0 or self.m < 0:
            raise ValidationError("leg lengths must be non-negative")

    @classmethod
    def with_left_endpoint_at_e(cls, n: int, m: int, group: GroupId) -> "Hook":
        return cls(from_letters((S2,) * n, group), n, m)

    def vertices(self) -> list[GroupElement]:
        """Path order, starting at the left (or lower) endpoint."""
        g = self.base
        if self.kind == "vertical":
            out = [g]
            for _ in range(self.m):
                out.append(out[-1].mul_letter(S2))
            return out
        left = [g]
        for _ in range(self.n):
            left.append(left[-1].mul_letter(S2_INV))
        right = [g.mul_letter(S1)]
        for _ in range(self.m):
            right.append(right[-1].mul_letter(S2_INV))
        return left[::-1] + right

    def vertex_set(self) -> frozenset:
        return frozenset(self.vertices())

    @property
    def length(self) -> int:
        """Number of path edges."""
        return self.m if self.kind == "vertical" else self.n + self.m + 1

    def neighbourhood(self, radius: int = 1) -> frozenset:
        return frozenset(ball_around(self.vertices(), radius))

    def pattern(self, radius: int = 1) -> Pattern:
        """Characteristic function of the path on ``B(R, radius)``."""
        return Pattern(self.neighbourhood(radius), self.vertex_set())

    def translate(self, g: GroupElement) -> "Hook":
        return Hook(g * self.base, self.n, self.m, self.kind)

    def lower_endpoints(self) -> list[GroupElement]:
        vs = self.vertex_set()
        return [h for h in self.vertices()
                if h.mul_letter(S2) in vs and h.mul_letter(S2_INV) not in vs]

    def to_json(self) -> dict:
        return {"base": str(self.base), "n": self.n, "m": self.m, "kind": self.kind}

    def __str__(self) -> str:
        if self.kind == "vertical":
            return f"vertical segment of length {self.m} from {self.base}"
        return f"hook(base={self.base}, n={self.n}, m={self.m})"


def hook_from_path(path: Sequence[GroupElement]) -> Hook:
    """Recognise a path (consecutive Cayley-graph neighbours) as a hook or a
    vertical segment."""
    path = list(path)
    if not path:
        raise ValidationError("empty path")
    steps = []
    for a, b in zip(path, path[1:]):
        step = a.inverse() * b
        letter = next((s for s in GENERATORS if step == from_letters((s,), a.group)), None)
        if letter is None:
            raise ValidationError(f"{a} and {b} are not adjacent")
        steps.append(letter)
    horizontal = [i for i, s in enumerate(steps) if abs(s) == 1]
    if not horizontal:
        if steps and steps[0] == S2_INV:
            return hook_from_path(path[::-1])
        if any(s != S2 for s in steps):
            raise ValidationError("path is not a vertical segment")
        return Hook(path[0], 0, len(path) - 1, "vertical")
    if len(horizontal) > 1:
        raise ValidationError("path has more than one horizontal step")
    i = horizontal[0]
    if steps[i] == S1_INV:
        return hook_from_path(path[::-1])
    if any(s != S2 for s in steps[:i]) or any(s != S2_INV for s in steps[i + 1:]):
        raise ValidationError("path is not hook shaped")
    return Hook(path[i], i, len(path) - i - 2, "hook")


def translating_elements(path_points: Iterable[GroupElement]) -> list[GroupElement]:
    """The ``g`` for which ``g * path`` still passes through ``e``: exactly the
    inverses of the path points."""
    return sort_elements(p.inverse() for p in path_points)


# ---------------------------------------------------------------------------
# walkers and the configuration partition

FATE_GOOD = 1
FATE_BAD = 2
FATE_EXHAUSTED = "inf"


@dataclass(frozen=True)
class WalkerResult:
    fate: object
    R: tuple  # visited path, including the stopping point
    P: tuple  # R, or R without the stopping point when the fate is bad


def _ball1(x: GroupElement):
    return [x] + [x.mul_letter(a) for a in GENERATORS]


def walker_fate(chi: Pattern, start: GroupElement, direction=None,
                classifier: LocalClassifier | None = None) -> WalkerResult:
    """Follow the path of ``chi`` from ``start`` taking first step ``direction``.

    ``direction=None`` is the walker whose side of ``start`` carries no path
    (``start`` is then its own stopping point).  The walker stops with fate 1
    at a lower endpoint pattern ``{e, s2}``, with fate 2 at a point that is not
    1-good, and reports exhaustion when the window runs out.
    """
    cl = classifier or LocalClassifier(chi)
    path = [start]
    if direction is None:
        occ = occupied_letters(chi, start)
        if len(occ) == 1 and cl.one_good(start):
            return WalkerResult(FATE_GOOD, (start,), (start,))
        raise ValidationError("a walker without direction must start at a lower endpoint")
    prev, cur = start, start.mul_letter(parse_letter(direction))
    seen = {start}
    while True:
        path.append(cur)
        if cur in seen or not chi.covers(_ball1(cur)):
            return WalkerResult(FATE_EXHAUSTED, tuple(path), tuple(path))
        seen.add(cur)
        if not cl.one_good(cur):
            return WalkerResult(FATE_BAD, tuple(path), tuple(path[:-1]))
        occ = occupied_letters(chi, cur)
        if len(occ) == 1:
            return WalkerResult(FATE_GOOD, tuple(path), tuple(path))
        nxt = [cur.mul_letter(a) for a in occ if cur.mul_letter(a) != prev]
        prev, cur = cur, nxt[0]


def _fate_key(f):
    return 3 if f == FATE_EXHAUSTED else f


@dataclass(frozen=True)
class ConfigClass:
    """One cell of the partition ``C0 / C_{(P,R,psi)} / C_{i,inf}``."""

    fates: tuple = ()
    R: tuple = ()
    P: tuple = ()
    hook: Hook | None = None
    psi: Pattern | None = field(default=None, compare=False)

    @property
    def kind(self) -> str:
        if not self.fates:
            return "C0"
        if FATE_EXHAUSTED in self.fates:
            return "Cinf"
        return "Cij"

    @property
    def label(self) -> str:
        if not self.fates:
            return "C0"
        return "C" + ",".join("inf" if f == FATE_EXHAUSTED else str(f) for f in self.fates)

    def to_json(self) -> dict:
        out = {"class": self.label}
        if self.hook is not None:
            out["hook"] = self.hook.to_json()
            out["R"] = [str(x) for x in self.R]
            out["P"] = [str(x) for x in self.P]
        return out


def is_c0(chi: Pattern, center: GroupElement | None = None,
          classifier: LocalClassifier | None = None) -> bool:
    c = _centre(chi, center)
    cl = classifier or LocalClassifier(chi)
    if not cl.one_good(c):
        return True
    return all(cl.f(s, c) == 0 and cl.f(-s, c.mul_letter(s)) == 0 for s in GENERATORS)


def classify_configuration(chi: Pattern, center: GroupElement | None = None) -> ConfigClass:
    """Place ``chi`` (seen from ``center``) in the configuration partition."""
    c = _centre(chi, center)
    cl = LocalClassifier(chi)
    if is_c0(chi, c, cl):
        return ConfigClass()
    occ = sorted(occupied_letters(chi, c), key=GENERATORS.index)
    dirs = occ if len(occ) == 2 else [occ[0], None]
    walkers = [walker_fate(chi, c, d, cl) for d in dirs]
    fates = tuple(sorted((w.fate for w in walkers), key=_fate_key))
    a, b = walkers
    R = tuple(reversed(b.R)) + a.R[1:]
    P = tuple(reversed(b.P)) + a.P[1:]
    if FATE_EXHAUSTED in fates:
        return ConfigClass(fates, R, P)
    hook = hook_from_path(R)
    psi = chi.restrict(ball_around(R, 1))
    return ConfigClass(fates, R, P, hook, psi)


# ---------------------------------------------------------------------------
# the operator on a window


@dataclass
class WindowedOperator:
    """Sparse symmetric matrix ``M[x, x*s] = G_s(chi seen from x)``."""

    domain: tuple
    entries: dict

    def __getitem__(self, key) -> Fraction:
        return self.entries.get(key, Fraction(0))

    def is_symmetric(self) -> bool:
        return all(self.entries.get((y, x), Fraction(0)) == v for (x, y), v in self.entries.items())

    def is_zero(self) -> bool:
        return not any(self.entries.values())

    def dense(self, order: Sequence[GroupElement]) -> list[list[Fraction]]:
        return [[self[(x, y)] for y in order] for x in order]

    def nonzero_pairs(self) -> list[tuple]:
        return [k for k, v in self.entries.items() if v]


def windowed_operator(chi: Pattern, domain: Iterable[GroupElement]) -> WindowedOperator:
    """Matrix of the operator on ``domain``; the window must contain ``B(domain, 3)``."""
    domain = tuple(sort_elements(domain))
    dom = set(domain)
    cl = LocalClassifier(chi)
    entries: dict = {}
    for x in domain:
        for s in GENERATORS:
            y = x.mul_letter(s)
            if y not in dom or (x, y) in entries:
                continue
            v = cl.g(s, x)
            w = cl.g(-s, y)
            if v != w:
                raise ValidationError(f"operator not symmetric at {x}, {y}")
            if v:
                entries[(x, y)] = v
                entries[(y, x)] = v
    return WindowedOperator(domain, entries)


def hook_weights(chi: Pattern, path: Sequence[GroupElement]) -> list[Fraction]:
    """Operator weights along consecutive path edges."""
    cl = LocalClassifier(chi)
    out = []
    for a, b in zip(path, path[1:]):
        step = a.inverse() * b
        s = next(s for s in GENERATORS if step == from_letters((s,), a.group))
        out.append(cl.g(s, a))
    return out


# ---------------------------------------------------------------------------
# brute-force oracle for 1-goodness


def hook_restriction_shapes(group: GroupId, max_leg: int = 3) -> frozenset:
    """All sets ``P ∩ B(e,1)`` (as neighbour-letter sets) for hooks ``P`` through
    ``e``, found by enumerating hooks with legs up to ``max_leg``."""
    shapes = set()
    e = identity(group)
    nbrs = {from_letters((a,), group): a for a in GENERATORS}
    for n in range(1, max_leg + 1):
        for m in range(1, max_leg + 1):
            for v in Hook(e, n, m).vertices():
                P = {v.inverse() * x for x in Hook(e, n, m).vertices()}
                shapes.add(frozenset(a for x, a in nbrs.items() if x in P))
    return frozenset(shapes)
