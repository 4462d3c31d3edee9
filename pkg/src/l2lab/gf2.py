"""Dense GF(2) linear algebra on bit-packed rows.

A vector of length ``n`` is a Python ``int`` whose bit ``j`` is coordinate
``j``.  Python ints give arbitrary width and fast XOR, which is all Gaussian
elimination over GF(2) needs.
"""

from __future__ import annotations

from typing import Iterable, Sequence


def pack(bits: Iterable[int]) -> int:
    v = 0
    for j, b in enumerate(bits):
        if b & 1:
            v |= 1 << j
    return v


def unpack(v: int, n: int) -> list[int]:
    return [(v >> j) & 1 for j in range(n)]


def popcount(v: int) -> int:
    return bin(v).count("1")


def rref(rows: Iterable[int]) -> tuple[list[int], list[int]]:
    """Reduced row echelon form.

    Returns ``(basis, pivots)`` where ``basis[i]`` has its lowest set bit at
    ``pivots[i]`` and no other basis row has that bit set.
    """
    basis: list[int] = []
    pivots: list[int] = []
    for r in rows:
        for b, p in zip(basis, pivots):
            if (r >> p) & 1:
                r ^= b
        if not r:
            continue
        p = (r & -r).bit_length() - 1
        for i, b in enumerate(basis):
            if (b >> p) & 1:
                basis[i] = b ^ r
        basis.append(r)
        pivots.append(p)
    return basis, pivots


def rank(rows: Iterable[int]) -> int:
    return len(rref(rows)[0])


def nullspace(rows: Iterable[int], n: int) -> list[int]:
    """Basis of ``{x in GF(2)^n : <r, x> = 0 for every row r}``."""
    basis, pivots = rref(rows)
    pivset = set(pivots)
    out = []
    for f in range(n):
        if f in pivset:
            continue
        x = 1 << f
        for b, p in zip(basis, pivots):
            if (b >> f) & 1:
                x |= 1 << p
        out.append(x)
    return out


def in_span(v: int, basis_pivots: tuple[Sequence[int], Sequence[int]]) -> bool:
    basis, pivots = basis_pivots
    for b, p in zip(basis, pivots):
        if (v >> p) & 1:
            v ^= b
    return v == 0


def dot(a: int, b: int) -> int:
    return popcount(a & b) & 1


def project(v: int, columns: Sequence[int]) -> int:
    """Restrict ``v`` to the given coordinates (re-indexed 0..len-1)."""
    out = 0
    for j, c in enumerate(columns):
        if (v >> c) & 1:
            out |= 1 << j
    return out
