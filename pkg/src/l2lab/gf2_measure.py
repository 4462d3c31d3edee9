"""Cylinder measures on the dual of ``V_{F,Lambda}``.

``V = span{1_{gF} - 1_{gtF} : g in Gamma, t in Lambda}`` and its dual is the
set of characters with ``chi(gF) = chi(gtF)``.  For a finite window ``E``
the relations visible inside ``E`` are ``psi(gF) = psi(g'F)`` for translates
``gF, g'F`` contained in ``E`` with ``g^-1 g'`` in ``Lambda``.  When ``E`` is
horizontally connected and ``F`` lies on the ``s1``-line these are the only
obstructions, so the extendable patterns form a GF(2) space of dimension
``|E| - K`` and each has Haar measure ``2^-(|E|-K)``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import gf2
from .errors import ExtensionNotCertified, ResourceError, ValidationError
from .exact import pow2
from .group_core import (
    S1,
    S1_INV,
    S2_INV,
    GroupElement,
    GroupId,
    IndexSetSpec,
    as_index_set,
    ball_around,
    from_letters,
    identity,
    lambda_membership,
    sort_elements,
)
from .local_rules import Hook, Pattern

BRUTE_MAX_WINDOW = 24


def f_line(group: GroupId) -> tuple:
    """``F_l = {s1^-1, e, s1}``."""
    return (from_letters((S1_INV,), group), identity(group), from_letters((S1,), group))


@dataclass
class RelationSystem:
    """The data ``(F, Lambda_I, E)``; ``F`` defaults to ``F_l``."""

    window: frozenset
    index_set: IndexSetSpec
    F: tuple | None = None
    group: GroupId | None = None
    _order: list = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.window = frozenset(self.window)
        self.index_set = as_index_set(self.index_set)
        if self.group is None:
            if not self.window:
                raise ValidationError("cannot infer the group of an empty window")
            self.group = next(iter(self.window)).group
        if self.F is None:
            self.F = f_line(self.group)
        self.F = tuple(self.F)

    @property
    def order(self) -> list:
        """Canonical order of the window; coordinate ``j`` is ``order[j]``."""
        if self._order is None:
            self._order = sort_elements(self.window)
        return self._order

    def with_window(self, window) -> "RelationSystem":
        return RelationSystem(frozenset(window), self.index_set, self.F, self.group)


def _line_key(x: GroupElement):
    rep, k = x.s1_line()
    return rep, k


def is_horizontally_connected(E: Iterable[GroupElement]) -> bool:
    """Every ``s1``-coset line meets ``E`` in a run of consecutive points."""
    lines: dict = defaultdict(list)
    for x in E:
        rep, k = _line_key(x)
        lines[rep].append(k)
    for ks in lines.values():
        if max(ks) - min(ks) + 1 != len(ks):
            return False
    return True


def horizontal_hull(E: Iterable[GroupElement]) -> frozenset:
    """Smallest horizontally connected superset of ``E``."""
    lines: dict = defaultdict(list)
    for x in E:
        rep, k = _line_key(x)
        lines[rep].append(k)
    out = set()
    for rep, ks in lines.items():
        lo, hi = min(ks), max(ks)
        x = rep * from_letters((S1 if lo > 0 else S1_INV,) * abs(lo), rep.group)
        for _ in range(lo, hi + 1):
            out.add(x)
            x = x.mul_letter(S1)
    return frozenset(out)


def f_on_line(F: Sequence[GroupElement]) -> bool:
    return all(x.s1_line()[0].is_identity() for x in F)


# ---------------------------------------------------------------------------
# translates and classes


@dataclass
class OmegaClasses:
    translates: list          # list of (g, frozenset(gF)) with gF inside E
    classes: list             # list of lists of indices into translates

    @property
    def K(self) -> int:
        return len(self.translates) - len(self.classes)

    def nontrivial(self) -> list:
        return [c for c in self.classes if len(c) > 1]


def _translates(E: frozenset, F: Sequence[GroupElement]) -> list:
    f0 = F[0]
    seen = {}
    for x in E:
        g = x * f0.inverse()
        key = frozenset(g * f for f in F)
        if key <= E and key not in seen:
            seen[key] = g
    return sorted(((g, k) for k, g in seen.items()), key=lambda p: p[0].sort_key())


def omega_classes(sys: RelationSystem) -> OmegaClasses:
    """Translates ``gF`` inside the window and their ``Lambda``-classes."""
    tr = _translates(sys.window, sys.F)
    parent = list(range(len(tr)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    # Lambda lies in the kernel of the s2-exponent map, so only translates
    # with equal height can be related.
    by_height: dict = defaultdict(list)
    for i, (g, _) in enumerate(tr):
        by_height[g.height()].append(i)
    for idx in by_height.values():
        for a_pos, i in enumerate(idx):
            gi_inv = tr[i][0].inverse()
            for j in idx[a_pos + 1:]:
                if find(i) == find(j):
                    continue
                if lambda_membership(gi_inv * tr[j][0], sys.index_set):
                    parent[find(j)] = find(i)
    groups: dict = defaultdict(list)
    for i in range(len(tr)):
        groups[find(i)].append(i)
    classes = sorted(groups.values(), key=lambda c: c[0])
    return OmegaClasses(tr, classes)


def relation_rows(sys: RelationSystem, omega: OmegaClasses | None = None) -> list[int]:
    """Bit-packed rows ``1_{gF} + 1_{g'F}`` for related translates in the window."""
    omega = omega or omega_classes(sys)
    index = {x: j for j, x in enumerate(sys.order)}
    rows = []
    for cls in omega.nontrivial():
        v0 = 0
        for x in omega.translates[cls[0]][1]:
            v0 |= 1 << index[x]
        for i in cls[1:]:
            v = 0
            for x in omega.translates[i][1]:
                v |= 1 << index[x]
            rows.append(v0 ^ v)
    return rows


def certify_extension(sys: RelationSystem) -> bool:
    return f_on_line(sys.F) and is_horizontally_connected(sys.window)


def _require_certified(sys: RelationSystem) -> None:
    if not certify_extension(sys):
        raise ExtensionNotCertified(
            "window is not horizontally connected (or F is not on the s1-line); "
            "use brute_count_extendable instead")


def count_extendable(sys: RelationSystem) -> int:
    """Number of extendable patterns on the window, ``2^(|E|-K)``."""
    _require_certified(sys)
    return 1 << (len(sys.window) - omega_classes(sys).K)


def solution_dimension(sys: RelationSystem) -> int:
    rows = relation_rows(sys)
    return len(sys.window) - gf2.rank(rows)


def brute_count_extendable(sys: RelationSystem, radius: int = 1) -> int:
    """Count patterns on ``E`` extendable to a solution on ``B(E, radius)``.

    Solves the relation system on the enlarged window and measures the
    dimension of its projection onto ``E``; no appeal to the ``K`` formula.
    """
    if len(sys.window) > BRUTE_MAX_WINDOW:
        raise ResourceError(f"brute count limited to |E| <= {BRUTE_MAX_WINDOW}")
    big = sys.with_window(ball_around(sys.window, radius))
    basis = gf2.nullspace(relation_rows(big), len(big.window))
    cols = [j for j, x in enumerate(big.order) if x in sys.window]
    return 1 << gf2.rank(gf2.project(v, cols) for v in basis)


def literal_count_extendable(sys: RelationSystem, radius: int = 1) -> int:
    """Enumerate every ``psi`` on ``E`` and test solvability on ``B(E, radius)``.

    Exponential in ``|E|``; meant as an oracle on tiny windows.
    """
    if len(sys.window) > 16:
        raise ResourceError("literal enumeration limited to |E| <= 16")
    big = sys.with_window(ball_around(sys.window, radius))
    rows = relation_rows(big)
    n = len(big.order)
    cols = [j for j, x in enumerate(big.order) if x in sys.window]
    free_cols = [j for j in range(n) if j not in set(cols)]
    # psi extends iff the rows restricted to E-columns are matched by some
    # combination on the outer columns: check consistency of A_out y = A_in psi.
    total = 0
    out_rows = [gf2.project(r, free_cols) for r in rows]
    in_rows = [gf2.project(r, cols) for r in rows]
    for psi in range(1 << len(cols)):
        rhs = [gf2.dot(r, psi) for r in in_rows]
        # augmented system over the outer variables
        aug = [o | (b << len(free_cols)) for o, b in zip(out_rows, rhs)]
        basis, pivots = gf2.rref(aug)
        if all(p < len(free_cols) for p in pivots):
            total += 1
    return total


def cylinder_measure(psi: Pattern, sys: RelationSystem | IndexSetSpec) -> Fraction:
    """Haar measure of ``{chi : chi|E = psi}`` in the dual of ``V``."""
    if not isinstance(sys, RelationSystem):
        sys = RelationSystem(psi.window, sys)
    elif sys.window != psi.window:
        sys = sys.with_window(psi.window)
    _require_certified(sys)
    omega = omega_classes(sys)
    for cls in omega.nontrivial():
        parities = {len(omega.translates[i][1] & psi.ones) & 1 for i in cls}
        if len(parities) > 1:
            return Fraction(0)
    return pow2(-(len(sys.window) - omega.K))


def hook_measure(n: int, m: int, I) -> Fraction:
    """``2^(-3(n+m) - 8 + K)`` with ``K = |I ∩ {1..min(n,m)}|``."""
    if n < 1 or m < 1:
        raise ValidationError("hook legs must be >= 1")
    K = as_index_set(I).count_upto(min(n, m))
    return pow2(-3 * (n + m) - 8 + K)


def hook_system(n: int, m: int, I, group: GroupId) -> tuple[RelationSystem, Pattern]:
    """Window ``B(R,1)`` and hook pattern for the hook with legs ``(n, m)`` at ``e``."""
    hook = Hook(identity(group), n, m)
    psi = hook.pattern(1)
    return RelationSystem(psi.window, I, group=group), psi


# ---------------------------------------------------------------------------
# sampling


class CylinderEvent:
    """Event ``chi|points = values``; vectorised over sample matrices."""

    def __init__(self, psi: Pattern):
        self.psi = psi

    def __call__(self, chi: Pattern) -> bool:
        return all(chi.value(x) == (1 if x in self.psi.ones else 0) for x in self.psi.window)

    def batch(self, samples: np.ndarray, order: Sequence[GroupElement]) -> np.ndarray:
        index = {x: j for j, x in enumerate(order)}
        try:
            cols = [index[x] for x in sort_elements(self.psi.window)]
        except KeyError as exc:
            raise ValidationError("event window is not inside the sampling window") from exc
        want = np.array([1 if x in self.psi.ones else 0 for x in sort_elements(self.psi.window)],
                        dtype=np.uint8)
        return np.all(samples[:, cols] == want, axis=1)


class CharacterSampler:
    """Uniform sampler of extendable patterns on a certified window."""

    def __init__(self, sys: RelationSystem, certified: bool | None = None):
        if certified is None:
            _require_certified(sys)
        elif not certified:
            raise ExtensionNotCertified("sampling needs a certified window")
        self.sys = sys
        self.order = sys.order
        basis = gf2.nullspace(relation_rows(sys), len(self.order))
        n = len(self.order)
        self.basis = np.array([gf2.unpack(v, n) for v in basis], dtype=np.uint8).reshape(len(basis), n)

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    def sample_bits(self, count: int, rng: np.random.Generator) -> np.ndarray:
        coeffs = rng.integers(0, 2, size=(count, self.dimension), dtype=np.uint8)
        return ((coeffs.astype(np.int32) @ self.basis.astype(np.int32)) & 1).astype(np.uint8)

    def sample(self, rng: np.random.Generator) -> Pattern:
        bits = self.sample_bits(1, rng)[0]
        return Pattern.from_bits(self.order, bits)


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_character(sys: RelationSystem, seed) -> Pattern:
    """One uniformly random extendable pattern on the window (deterministic per seed)."""
    return CharacterSampler(sys).sample(make_rng(seed))


def binomial_sigma(hits: int, samples: int, bits: int = 64) -> Fraction:
    """Rational upper bound (within ``2^-bits`` relative) on ``sqrt(p(1-p)/n)``."""
    num = hits * (samples - hits) * samples
    scale = 1 << bits
    root = math.isqrt(num * scale * scale)
    if root * root != num * scale * scale:
        root += 1
    return Fraction(root, scale * samples * samples)


def estimate_event(sys: RelationSystem, predicate: Callable, samples: int, seed,
                   chunk: int = 200_000) -> tuple[Fraction, Fraction]:
    """Monte-Carlo frequency of ``predicate`` and its binomial standard deviation."""
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    sampler = CharacterSampler(sys)
    rng = make_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        bits = sampler.sample_bits(k, rng)
        if hasattr(predicate, "batch"):
            hits += int(np.count_nonzero(predicate.batch(bits, sampler.order)))
        else:
            for row in bits:
                if predicate(Pattern.from_bits(sampler.order, row)):
                    hits += 1
        done += k
    return Fraction(hits, samples), binomial_sigma(hits, samples)


# ---------------------------------------------------------------------------
# the null sets D_g


def dg_window(N: int, group: GroupId, g: GroupElement | None = None) -> tuple[frozenset, frozenset]:
    """Window and ones of ``D_{g,N}``: rows ``g s2^-k`` (k < N) set to 1, their
    horizontal neighbours to 0."""
    g = identity(group) if g is None else g
    window, ones = set(), set()
    x = g
    for _ in range(N):
        ones.add(x)
        window.update((x, x.mul_letter(S1), x.mul_letter(S1_INV)))
        x = x.mul_letter(S2_INV)
    return frozenset(window), frozenset(ones)


def dg_bound(N: int, I, group: GroupId = GroupId.FREE2) -> Fraction:
    """Upper bound ``2^-(3N - K_N)`` for the measure of ``D_{g,N}``."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    window, _ = dg_window(N, group)
    sys = RelationSystem(window, I, group=group)
    K = omega_classes(sys).K
    return pow2(-(3 * N - K))


# ---------------------------------------------------------------------------
# constructive extension


def extend_pattern(psi: Pattern, sys: RelationSystem, target: Iterable[GroupElement]) -> Pattern:
    """Extend ``psi`` point by point to ``target`` keeping every visible relation.

    Points are added one at a time so that the growing set stays horizontally
    connected; a new point's value is forced when it completes a translate
    that is related to one already inside, and set to 0 otherwise.
    """
    if not certify_extension(sys.with_window(psi.window)):
        raise ExtensionNotCertified("starting window is not horizontally connected")
    goal = horizontal_hull(set(target) | set(psi.window))
    B = set(psi.window)
    ones = set(psi.ones)
    F = sys.F
    f_inv = [f.inverse() for f in F]
    inside: dict = defaultdict(list)  # height -> translates g with gF inside B

    def add_translates_with(h):
        for fi in f_inv:
            g = h * fi
            pts = [g * f for f in F]
            if all(p in B for p in pts) and g not in inside_set:
                inside_set.add(g)
                inside[g.height()].append(g)

    inside_set: set = set()
    for x in list(B):
        add_translates_with(x)

    lines: dict = defaultdict(set)
    for x in B:
        rep, k = _line_key(x)
        lines[rep].add(k)

    remaining = set(goal) - B
    while remaining:
        pick = None
        for h in sort_elements(remaining):
            rep, k = _line_key(h)
            ks = lines.get(rep)
            if not ks or k == min(ks) - 1 or k == max(ks) + 1:
                pick = h
                break
        if pick is None:
            raise ExtensionNotCertified("could not grow the window horizontally connected")
        h = pick
        value = 0
        for fi in f_inv:
            g = h * fi
            pts = [g * f for f in F]
            if not all(p in B or p == h for p in pts):
                continue
            rest = sum(1 for p in pts if p != h and p in ones) & 1
            for g2 in inside[g.height()]:
                if g2 != g and lambda_membership(g.inverse() * g2, sys.index_set):
                    other = sum(1 for f in F if g2 * f in ones) & 1
                    value = rest ^ other
                    break
            else:
                continue
            break
        B.add(h)
        if value:
            ones.add(h)
        rep, k = _line_key(h)
        lines[rep].add(k)
        add_translates_with(h)
        remaining.discard(h)
    return Pattern(frozenset(B), frozenset(ones))


def relations_hold(chi: Pattern, sys: RelationSystem) -> bool:
    """Whether every relation visible in ``chi``'s window is satisfied."""
    local = sys.with_window(chi.window)
    omega = omega_classes(local)
    for cls in omega.nontrivial():
        if len({len(omega.translates[i][1] & chi.ones) & 1 for i in cls}) > 1:
            return False
    return True
