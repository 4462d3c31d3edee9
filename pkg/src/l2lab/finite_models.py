"""Weighted path models ``A^{l,i,j}`` and their eigenvalue ``-2``.

A model of length ``l`` is a path with ``l`` edges and ``l + 1`` vertices.
Interior edges have weight 2; the two boundary edges get weight 2 at a good
end (fate 1) and 1/2 at a bad end (fate 2).  Kernels are computed exactly
over the rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ValidationError

GOOD_END_WEIGHT = Fraction(2)
BAD_END_WEIGHT = Fraction(1, 2)
INTERIOR_WEIGHT = Fraction(2)

SCENARIOS = ((1, 1), (1, 2), (2, 2))


def _end_weight(fate: int) -> Fraction:
    if fate == 1:
        return GOOD_END_WEIGHT
    if fate == 2:
        return BAD_END_WEIGHT
    raise ValidationError(f"ending scenario must be 1 or 2, got {fate!r}")


@dataclass(frozen=True)
class PathModel:
    """Symmetric tridiagonal path with zero diagonal and the given edge weights."""

    l: int
    weights: tuple
    scenario: tuple = (None, None)

    @property
    def size(self) -> int:
        return self.l + 1

    @property
    def alpha(self) -> Fraction:
        return self.weights[0]

    @property
    def beta(self) -> Fraction:
        return self.weights[-1]

    def matrix(self) -> list[list[Fraction]]:
        n = self.size
        M = [[Fraction(0)] * n for _ in range(n)]
        for k, w in enumerate(self.weights):
            M[k][k + 1] = M[k + 1][k] = w
        return M

    def apply(self, x: Sequence[Fraction], shift: Fraction = Fraction(0)) -> list[Fraction]:
        """``(A + shift) x``."""
        n = self.size
        out = [shift * x[i] for i in range(n)]
        for k, w in enumerate(self.weights):
            out[k] += w * x[k + 1]
            out[k + 1] += w * x[k]
        return out


def build_model(l: int, i: int, j: int) -> PathModel:
    """The model ``A^{l,i,j}``; for ``(1,2)`` the 1/2 edge comes first."""
    if l < 2:
        raise ValidationError("path models need l >= 2")
    a, b = sorted((i, j), reverse=True)
    w = [INTERIOR_WEIGHT] * l
    w[0] = _end_weight(a)
    w[-1] = _end_weight(b)
    return PathModel(l, tuple(w), (i, j))


def model_with_weights(l: int, alpha, beta) -> PathModel:
    if l < 2:
        raise ValidationError("path models need l >= 2")
    w = [INTERIOR_WEIGHT] * l
    w[0] = Fraction(alpha)
    w[-1] = Fraction(beta)
    return PathModel(l, tuple(w))


def tridiagonal_kernel(diag: Sequence[Fraction], off: Sequence[Fraction]) -> list[list[Fraction]]:
    """Exact kernel basis of a symmetric tridiagonal matrix.

    Banded Gaussian elimination on Fractions: each pivot only touches the next
    row, so the cost is linear in the size.
    """
    n = len(diag)
    rows = []
    for k in range(n):
        row = {k: Fraction(diag[k])}
        if k > 0 and off[k - 1]:
            row[k - 1] = Fraction(off[k - 1])
        if k < n - 1 and off[k]:
            row[k + 1] = Fraction(off[k])
        rows.append({c: v for c, v in row.items() if v})
    return sparse_kernel(rows, n)


def sparse_kernel(rows: list[dict], n: int) -> list[list[Fraction]]:
    """Kernel basis of a sparse rational matrix given as ``{col: value}`` rows."""
    pivots: dict[int, dict] = {}
    for row in rows:
        row = dict(row)
        while row:
            c = min(row)
            if c in pivots:
                p = pivots[c]
                f = row[c]
                for cc, v in p.items():
                    nv = row.get(cc, 0) - f * v
                    if nv:
                        row[cc] = nv
                    else:
                        row.pop(cc, None)
                continue
            f = row[c]
            row = {cc: v / f for cc, v in row.items()}
            pivots[c] = row
            break
    # back-substitute to reduced form
    for c in sorted(pivots, reverse=True):
        p = pivots[c]
        for cc in [k for k in p if k != c and k in pivots]:
            f = p.pop(cc)
            for k2, v in pivots[cc].items():
                if k2 == cc:
                    continue
                nv = p.get(k2, 0) - f * v
                if nv:
                    p[k2] = nv
                else:
                    p.pop(k2, None)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fcol in free:
        x = [Fraction(0)] * n
        x[fcol] = Fraction(1)
        for c, p in pivots.items():
            x[c] = -p.get(fcol, Fraction(0))
        basis.append(x)
    return basis


def kernel_basis_shifted(model: PathModel, shift) -> list[list[Fraction]]:
    """Kernel basis of ``A + shift * Id``."""
    shift = Fraction(shift)
    return tridiagonal_kernel([shift] * model.size, list(model.weights))


def integer_rank(rows: list[dict], n: int) -> int:
    """Rank over Q of an integer matrix given as sparse ``{col: value}`` rows.

    Fraction-free forward elimination: a row is reduced by a pivot row via
    ``p * row - f * pivot`` and then divided by the gcd of its entries, which
    keeps the integers small and avoids Fraction overhead.
    """
    pivots: dict[int, dict] = {}
    for row in rows:
        row = {c: v for c, v in row.items() if v}
        while row:
            c = min(row)
            piv = pivots.get(c)
            if piv is None:
                pivots[c] = row
                break
            p, f = piv[c], row[c]
            new = {k: p * v for k, v in row.items()}
            for k, v in piv.items():
                nv = new.get(k, 0) - f * v
                if nv:
                    new[k] = nv
                else:
                    new.pop(k, None)
            g = 0
            for v in new.values():
                g = math.gcd(g, v)
            row = {k: v // g for k, v in new.items()} if g > 1 else new
    return len(pivots)


def kernel_dim_shifted(model: PathModel, shift) -> int:
    """``dim ker(A + shift)`` from an exact integer rank computation."""
    shift = Fraction(shift)
    entries = [shift, *model.weights]
    scale = 1
    for x in entries:
        scale = scale * x.denominator // math.gcd(scale, x.denominator)
    d = int(shift * scale)
    w = [int(x * scale) for x in model.weights]
    n = model.size
    rows = []
    for k in range(n):
        row = {k: d}
        if k > 0:
            row[k - 1] = w[k - 1]
        if k < n - 1:
            row[k + 1] = w[k]
        rows.append(row)
    return n - integer_rank(rows, n)


def kernel_dim_minus_two(model: PathModel) -> int:
    """``dim ker(A + 2)``, exactly."""
    return kernel_dim_shifted(model, 2)


def kernel_vector(l: int, alpha, beta) -> list[Fraction]:
    """Solution of the first ``l`` rows of ``(A + 2) x = 0`` with ``x_1 = -4``.

    With edge weights ``(alpha, 2, ..., 2, beta)`` the rows give
    ``x_0 = 2 alpha``, ``x_1 = -4`` and then ``x_{k+1} = -x_{k-1} - x_k`` in the
    interior (period 3: ``4 - alpha^2, alpha^2, -4``), and the row before the
    last edge fixes ``x_l = -2 (x_{l-2} + x_{l-1}) / beta``.
    """
    if l < 2:
        raise ValidationError("l must be >= 2")
    alpha, beta = Fraction(alpha), Fraction(beta)
    x = [2 * alpha, Fraction(-4)]
    # row 0: 2 x0 + alpha x1 = 0 -> holds; row k (1 <= k <= l-2): w x_{k-1} + 2 x_k + 2 x_{k+1} = 0
    for k in range(1, l - 1):
        w_left = alpha if k == 1 else Fraction(2)
        x.append(-(w_left * x[k - 1] + 2 * x[k]) / 2)
    k = l - 1
    w_left = alpha if k == 1 else Fraction(2)
    x.append(-(w_left * x[k - 1] + 2 * x[k]) / beta)
    return x


def closure_residual(l: int, alpha, beta) -> Fraction:
    """Last row of ``(A + 2)`` applied to :func:`kernel_vector`."""
    x = kernel_vector(l, alpha, beta)
    beta = Fraction(beta)
    return beta * x[l - 1] + 2 * x[l]


def closure_holds(l: int, alpha, beta) -> bool:
    return closure_residual(l, alpha, beta) == 0


def parity_table(l_max: int, l_min: int = 2) -> list[tuple[int, int, int, int]]:
    """Rows ``(l, i, j, dim ker(A^{l,i,j} + 2))``."""
    if l_max < 2:
        raise ValidationError("l_max must be >= 2")
    return [(l, i, j, kernel_dim_minus_two(build_model(l, i, j)))
            for l in range(l_min, l_max + 1) for (i, j) in SCENARIOS]
