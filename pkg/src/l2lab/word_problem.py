"""Membership in ``V_{F_l,I}`` and the relation stream of ``G_I``.

Every element of ``V = V_{F_l,I}`` is a sum of blocks
``g w_t = 1_{gF_l} + 1_{gtF_l}`` with ``t`` in ``Lambda_I``.  Along each
``s1``-coset line a finitely supported vector is a Laurent polynomial in
``z = s1`` and ``1_{cF_l}`` is ``z^(c-1) (1 + z + z^2)``.  So a vector is a
sum of translates ``1_{cF_l}`` exactly when every line polynomial is divisible
by ``1 + z + z^2``, and then the set ``C`` of centres ``c`` is unique.  The
vector lies in ``V`` iff the centres can be paired inside left cosets of
``Lambda_I``; each pair ``(g, gt)`` is one subtracted six-point block.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import VerificationError
from .group_core import (
    S1,
    S1_INV,
    S2,
    S2_INV,
    GroupElement,
    GroupId,
    as_index_set,
    ball,
    commutator,
    from_letters,
    identity,
    lambda_membership,
    parse_element,
    power,
    s1_power,
    sort_elements,
    t_generator,
)


@dataclass(frozen=True)
class GF2Vector:
    """A finitely supported ``Z/2``-valued function on the group."""

    support: frozenset = frozenset()

    @classmethod
    def of(cls, points: Iterable[GroupElement]) -> "GF2Vector":
        out: set = set()
        for p in points:
            out ^= {p}
        return cls(frozenset(out))

    def __add__(self, other: "GF2Vector") -> "GF2Vector":
        return GF2Vector(self.support ^ other.support)

    __sub__ = __add__

    def translate(self, g: GroupElement) -> "GF2Vector":
        """Left translate ``g x``."""
        return GF2Vector(frozenset(g * h for h in self.support))

    def __bool__(self) -> bool:
        return bool(self.support)

    def __len__(self) -> int:
        return len(self.support)

    def sorted(self) -> list[GroupElement]:
        return sort_elements(self.support)

    def to_json(self) -> list[str]:
        return [str(p) for p in self.sorted()]

    @classmethod
    def from_json(cls, items: Iterable[str], group: GroupId) -> "GF2Vector":
        return cls.of(parse_element(s, group) for s in items)


def f_l_points(g: GroupElement) -> tuple:
    return (g.mul_letter(S1_INV), g, g.mul_letter(S1))


def block(g: GroupElement, t: GroupElement) -> GF2Vector:
    """``g w_t = 1_{gF_l} + 1_{gtF_l}``."""
    return GF2Vector.of(f_l_points(g) + f_l_points(g * t))


def generator_w(t: GroupElement) -> GF2Vector:
    """``w_t = sum_{h in F_l} (delta_h - delta_{th})`` over ``Z/2``."""
    return block(identity(t.group), t)


@dataclass(frozen=True)
class SupportInterval:
    rep: GroupElement
    v: int
    w: int

    @property
    def length(self) -> int:
        return self.w - self.v

    def point(self, k: int) -> GroupElement:
        return self.rep * s1_power(k, self.rep.group)


def support_lines(x: GF2Vector) -> dict:
    """Map line representative -> sorted ``s1``-exponents of the support."""
    lines: dict = defaultdict(list)
    for p in x.support:
        rep, k = p.s1_line()
        lines[rep].append(k)
    return {rep: sorted(ks) for rep, ks in lines.items()}


def support_intervals(x: GF2Vector) -> list[SupportInterval]:
    out = [SupportInterval(rep, ks[0], ks[-1]) for rep, ks in support_lines(x).items()]
    return sorted(out, key=lambda iv: (iv.rep.sort_key(), iv.v))


def _line_centres(exponents: list[int]) -> list[int] | None:
    """Divide the line polynomial by ``1 + z + z^2``; centres or None."""
    v = exponents[0]
    poly = 0
    for k in exponents:
        poly |= 1 << (k - v)
    centres = []
    i = 0
    while poly:
        if poly & 1:
            if poly < 0b111:
                return None
            poly ^= 0b111
            centres.append(v + i + 1)
        poly >>= 1
        i += 1
    return centres


def centres(x: GF2Vector) -> list[GroupElement] | None:
    """The unique ``C`` with ``x = sum_{c in C} 1_{cF_l}``, or None."""
    out = []
    for rep, ks in support_lines(x).items():
        if ks[-1] - ks[0] < 2:
            return None
        cs = _line_centres(ks)
        if cs is None:
            return None
        out.extend(rep * s1_power(c, rep.group) for c in cs)
    return sort_elements(out)


@dataclass
class MembershipResult:
    member: bool
    certificate: list  # (g, t) pairs, x = sum g w_t
    reason: str = ""

    def replay(self) -> GF2Vector:
        total = GF2Vector()
        for g, t in self.certificate:
            total = total + block(g, t)
        return total

    def __bool__(self) -> bool:
        return self.member

    def to_json(self) -> dict:
        return {
            "member": self.member,
            "reason": self.reason,
            "certificate": [{"g": str(g), "t": str(t)} for g, t in self.certificate],
        }


def decide_membership(x: GF2Vector, I) -> MembershipResult:
    """Decide ``x in V_{F_l,I}`` and return a replayable certificate.

    The leftmost remaining centre ``g`` is matched with another centre ``g'``
    with ``t = g^-1 g'`` in ``Lambda_I``; the block ``g w_t`` is subtracted and
    the search repeats.  Each step removes two centres, so the loop ends.
    """
    I = as_index_set(I)
    C = centres(x)
    if C is None:
        return MembershipResult(False, [], "a coset line is not a sum of F_l-translates")
    remaining = list(C)
    cert = []
    while remaining:
        g = remaining.pop(0)
        g_inv = g.inverse()
        h = g.height()
        partner = None
        for idx, g2 in enumerate(remaining):
            if g2.height() == h and lambda_membership(g_inv * g2, I):
                partner = idx
                break
        if partner is None:
            return MembershipResult(False, cert, f"centre {g} has no Lambda_I-partner")
        g2 = remaining.pop(partner)
        cert.append((g, g_inv * g2))
    result = MembershipResult(True, cert, "reduced to zero")
    if result.replay() != x:
        raise VerificationError("membership certificate does not replay")
    return result


def is_in_V(x: GF2Vector, I) -> bool:
    return decide_membership(x, I).member


def interval_law_holds(x: GF2Vector) -> bool:
    """Every nonempty support interval has ``w - v >= 2``."""
    return all(iv.length >= 2 for iv in support_intervals(x))


def endpoint_law_violations(x: GF2Vector, I) -> list[GroupElement]:
    """Points ``b`` strictly inside a support interval for which no
    ``b' in {b s1^-1, b, b s1}`` and ``1 != t in Lambda_I`` put ``b' t`` inside a
    different support interval."""
    I = as_index_set(I)
    intervals = support_intervals(x)
    bad = []
    for iv in intervals:
        for k in range(iv.v + 1, iv.w):
            b = iv.point(k)
            ok = False
            for b1 in (b.mul_letter(S1_INV), b, b.mul_letter(S1)):
                inv = b1.inverse()
                for other in intervals:
                    if other is iv:
                        continue
                    for j in range(other.v, other.w + 1):
                        t = inv * other.point(j)
                        if not t.is_identity() and lambda_membership(t, I):
                            ok = True
                            break
                    if ok:
                        break
                if ok:
                    break
            if not ok:
                bad.append(b)
    return bad


def random_member(I, group: GroupId, blocks: int, rng, radius: int = 3,
                  max_t_terms: int = 2) -> tuple[GF2Vector, list]:
    """A random sum of ``blocks`` translates ``g w_t`` (``t`` in ``Lambda_I``)."""
    I = as_index_set(I)
    elems = I.materialize()
    ball_r = ball(radius, group)
    x = GF2Vector()
    used = []
    for _ in range(blocks):
        g = ball_r[int(rng.integers(len(ball_r)))]
        t = identity(group)
        for _ in range(int(rng.integers(1, max_t_terms + 1))):
            n = elems[int(rng.integers(len(elems)))]
            t = t * power(t_generator(n, group), int(rng.choice([-1, 1])))
        x = x + block(g, t)
        used.append((g, t))
    return x, used


# ---------------------------------------------------------------------------
# relation stream

TAU = 3


@dataclass(frozen=True)
class Relation:
    """A relator word over ``s1 (1), s2 (2), tau (3)`` and inverses."""

    kind: str
    word: tuple
    text: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "relation": self.text}


def delta_word(g: GroupElement) -> tuple:
    """``delta_g = g tau g^-1`` as a letter tuple (free-group word of ``g``)."""
    letters = _letters_of(g)
    return tuple(letters) + (TAU,) + tuple(-a for a in reversed(letters))


def _letters_of(g: GroupElement) -> list[int]:
    if hasattr(g, "letters"):
        return list(g.letters)
    # wreath: t_p^v products followed by s2^shift
    out: list[int] = []
    for p, v in g.lamp:
        up = [S2] * p if p >= 0 else [S2_INV] * (-p)
        down = [-a for a in up]
        out += up + ([S1] * v if v > 0 else [S1_INV] * (-v)) + down
    out += [S2] * g.shift if g.shift >= 0 else [S2_INV] * (-g.shift)
    return _free_reduce(out)


def _free_reduce(letters: list[int]) -> list[int]:
    out: list[int] = []
    for a in letters:
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return out


def delta_text(g: GroupElement) -> str:
    return "tau" if g.is_identity() else f"tau^({g})"


def _v_relation(g: GroupElement, n: int, group: GroupId) -> Relation:
    t = t_generator(n, group)
    word: tuple = ()
    parts = []
    for x in (from_letters((S1_INV,), group), identity(group), from_letters((S1,), group)):
        a, b = g * x, g * t * x
        word += delta_word(a) + delta_word(b)
        parts.append(f"{delta_text(a)}*{delta_text(b)}")
    return Relation("V", word, "*".join(parts))


def _commutator_relation(g: GroupElement, h: GroupElement) -> Relation:
    dg, dh = delta_word(g), delta_word(h)
    word = dg + dh + dg + dh  # tau is an involution
    return Relation("commute", word, f"[{delta_text(g)}, {delta_text(h)}]")


def _wreath_relation(n: int) -> Relation:
    tn = t_generator(n, GroupId.FREE2)
    s1 = from_letters((S1,), GroupId.FREE2)
    c = commutator(tn, s1)
    return Relation("wreath", tuple(c.letters), f"[t{n}, s1]")


def enumerate_relations(I, count: int, group: GroupId = GroupId.FREE2) -> list[Relation]:
    """The first ``count`` relations of the recursive presentation of ``G_I``.

    Stage 0 is ``tau^2``.  Stage ``j >= 1`` adds, in this order, the wreath
    relators ``[t_{+-j}, s1]`` (for Z wr Z), the products
    ``prod_{x in F_l} delta_{gx} delta_{g t_n x}`` with ``max(|g|, k) = j`` where
    ``n = n_k`` is the ``k``-th element of ``I`` (counting from 1), and the
    commutators ``[delta_g, delta_h]`` with ``max(|g|, |h|) = j``.
    """
    return list(_take(relation_stream(I, group), count))


def _take(it: Iterator, n: int) -> Iterator:
    for i, x in enumerate(it):
        if i >= n:
            return
        yield x


def relation_stream(I, group: GroupId = GroupId.FREE2) -> Iterator[Relation]:
    I = as_index_set(I)
    group = GroupId.parse(group)
    yield Relation("tau", (TAU, TAU), "tau^2")
    j = 0
    shells: list[list[GroupElement]] = []
    seen: set = set()
    while True:
        j += 1
        if group is GroupId.WREATH:
            yield _wreath_relation(j)
            yield _wreath_relation(-j)
        # spheres up to radius j, built incrementally
        while len(shells) <= j:
            r = len(shells)
            layer = [g for g in _ball_unbounded(r, group) if g not in seen]
            seen.update(layer)
            shells.append(sort_elements(layer))
        prefix = I.first(j)
        for k, n in enumerate(prefix, start=1):
            gs = shells[j] if k < j else [g for r in range(j + 1) for g in shells[r]]
            for g in gs:
                yield _v_relation(g, n, group)
        older = [g for r in range(j) for g in shells[r]]
        for g in shells[j]:
            for h in older:
                yield _commutator_relation(h, g)
        for a_pos, g in enumerate(shells[j]):
            for h in shells[j][a_pos + 1:]:
                yield _commutator_relation(g, h)


def _ball_unbounded(r: int, group: GroupId) -> list[GroupElement]:
    return ball(r, group, cap=max(r, 0))


# ---------------------------------------------------------------------------
# evaluation in Z/2[Gamma] x| Gamma


def evaluate_word(word: Iterable[int], group: GroupId) -> tuple[GF2Vector, GroupElement]:
    """Evaluate a word in ``s1, s2, tau`` in ``Z/2[Gamma] x| Gamma``, with
    ``(v, g)(v', g') = (v + g v', g g')``."""
    v: set = set()
    g = identity(group)
    for a in word:
        if abs(a) == TAU:
            v ^= {g}
        else:
            g = g.mul_letter(a)
    return GF2Vector(frozenset(v)), g


def relation_is_sound(rel: Relation, I, group: GroupId) -> bool:
    """The relator evaluates to ``(v, e)`` with ``v in V_{F_l,I}``."""
    v, g = evaluate_word(rel.word, group)
    return g.is_identity() and is_in_V(v, I)


def word_text(word: Iterable[int]) -> str:
    names = {S1: "s1", S1_INV: "s1^-1", S2: "s2", S2_INV: "s2^-1", TAU: "tau", -TAU: "tau"}
    return "*".join(names[a] for a in word) or "e"
