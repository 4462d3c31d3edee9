"""Exact evaluation of ``dim ker(A + 2)`` for an index set ``I``.

Two independent routes:

* :func:`dimension_direct_sum` adds the hook contributions
  ``2^(-3(l1+l2) - 8 + |I ∩ {1..min(l1,l2)}|)`` over legs ``l1, l2 >= 1`` with
  ``3 | l1 + l2`` up to ``L`` and encloses the rest with a geometric majorant.
* :func:`dimension_closed_form` evaluates ``beta1 + beta2 * sum 2^(-6 n_k + k)``.

Two sets of constants are available for the closed form.  ``"stated"`` is
``beta1 = 3 * 2^-18 (1 - 2^-9)^-2``, ``beta2 = 3 * 2^-7 (1 - 2^-9)^-2``.
``"derived"`` re-sums the hook series directly: for ``n = 2 mod 3``

    sum_{l1,l2 >= n, 3 | l1+l2} 2^(-3(l1+l2)) = 3 * 2^(-6n-6) * (1 - 2^-9)^-2,

and the region ``min(l1, l2) = 1`` (where no index is counted) has to be
added separately, giving ``beta1 = 257 / 16711744`` and ``beta2 = 48 / 261121``.
Only the derived constants agree with the direct sum; see the README.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ValidationError
from .exact import DimensionEnclosure, pow2
from .gf2_measure import hook_measure
from .group_core import IndexSetSpec, as_index_set, validate_for_theorem

D = 6
X = pow2(-9)
_GEOM = (1 - X) ** -2


def beta_constants(constants: str = "stated") -> tuple[Fraction, Fraction]:
    """``(beta1, beta2)``; ``constants`` is ``"stated"`` or ``"derived"``."""
    if constants == "stated":
        return 3 * pow2(-18) * _GEOM, 3 * pow2(-7) * _GEOM
    if constants == "derived":
        # 2^-8 [ S(l1 or l2 = 1) + 2 S(U_2) ] with the first term summed explicitly
        beta1 = _GEOM * (pow2(-16) + pow2(-24))
        beta2 = 3 * pow2(-14) * _GEOM
        return beta1, beta2
    raise ValidationError(f"unknown constants {constants!r}")


def stated_formula_value(I: IndexSetSpec, terms: int) -> Fraction:
    """The telescoping form ``3/(2^6 (1-2^-9)^2) sum_k (2^k 2^(-6 n_k) - 2^k 2^(-6 n_{k+1}))``
    truncated after ``terms`` differences, with ``n_0 = 2``."""
    ns = I.first(terms + 2)
    c = 3 * pow2(-6) * _GEOM
    total = Fraction(0)
    for k in range(min(terms + 1, len(ns))):
        nxt = pow2(k) * pow2(-6 * ns[k + 1]) if k + 1 < len(ns) else Fraction(0)
        total += pow2(k) * pow2(-6 * ns[k]) - nxt
    return c * total


def series_terms(I: IndexSetSpec, terms: int) -> list[int]:
    """``n_1, ..., n_terms`` (fewer if ``I`` is finite)."""
    return I.first(terms + 1)[1:]


def dimension_closed_form(I, terms: int = 8, constants: str = "stated") -> DimensionEnclosure:
    """``beta1 + beta2 * sum_{k>=1} 2^(-6 n_k + k)`` as an exact enclosure.

    The tail after ``terms`` is bounded by ``beta2 * 2^(-6 n_{terms+1} + terms + 1)
    / (1 - 2^-5)``, valid because ``n_{k+1} >= n_k + 3``.
    """
    I = as_index_set(I)
    if terms < 0:
        raise ValidationError("terms must be >= 0")
    validate_for_theorem(I, terms)
    b1, b2 = beta_constants(constants)
    ns = I.first(terms + 2)
    body = sum((pow2(-D * n + k) for k, n in enumerate(ns[1:terms + 1], start=1)), Fraction(0))
    lower = b1 + b2 * body
    if len(ns) <= terms + 1:
        return DimensionEnclosure(lower, lower, "closed")
    tail = b2 * pow2(-D * ns[terms + 1] + terms + 1) / (1 - pow2(-5))
    return DimensionEnclosure(lower, lower + tail, "closed")


def summand_audit(I, l1: int, l2: int) -> Fraction:
    """Contribution of the hook class with legs ``(l1, l2)``: its measure when
    ``3 | l1 + l2`` (the hook length ``l1 + l2 + 1`` is then ``1 mod 3`` and the
    path model has a one-dimensional ``-2`` eigenspace), else 0."""
    if l1 < 1 or l2 < 1:
        raise ValidationError("legs must be >= 1")
    if (l1 + l2) % 3:
        return Fraction(0)
    return hook_measure(l1, l2, I)


def _prefix_counts(I: IndexSetSpec, L: int) -> list[int]:
    """``c[j] = |I ∩ {1..j}|`` for ``0 <= j <= L``."""
    members = set(I.upto(L))
    c = [0] * (L + 1)
    for j in range(1, L + 1):
        c[j] = c[j - 1] + (1 if j in members else 0)
    return c


def direct_sum_tail_bound(L: int) -> Fraction:
    """Upper bound for the hooks with ``max(l1, l2) > L``.

    With ``|I ∩ {1..min}| <= min(l1, l2)`` each such summand is at most
    ``2^(-3 max - 2 min - 8)``; summing over both orientations gives
    ``2 * sum_{a > L} 2^(-3a) * sum_{b >= 1} 2^(-2b) * 2^-8 = 2^(-3L - 8) * 2 / 21``.
    """
    return 2 * pow2(-3 * L - 8) * Fraction(1, 7) * Fraction(1, 3)


def dimension_direct_sum(I, L: int = 80) -> DimensionEnclosure:
    """Truncated hook sum over ``1 <= l1, l2 <= L`` plus a rigorous tail."""
    if L < 2:
        raise ValidationError("L must be >= 2")
    I = as_index_set(I)
    c = _prefix_counts(I, L)
    total = Fraction(0)
    for l1 in range(1, L + 1):
        start = (-l1) % 3 or 3
        for l2 in range(start, L + 1, 3):
            total += pow2(-3 * (l1 + l2) - 8 + c[min(l1, l2)])
    return DimensionEnclosure(total, total + direct_sum_tail_bound(L), "direct")


def u_block_partial(n: int, L: int) -> Fraction:
    """``sum_{n <= l1, l2 <= L, 3 | l1+l2} 2^(-3(l1+l2))``."""
    total = Fraction(0)
    for l1 in range(n, L + 1):
        for l2 in range(n, L + 1):
            if (l1 + l2) % 3 == 0:
                total += pow2(-3 * (l1 + l2))
    return total


def u_block_enclosure(n: int, L: int = 80) -> DimensionEnclosure:
    """Enclosure of the full ``U_n`` sum from the truncation at ``L``.

    Missing terms have ``max(l1, l2) > L``; each is at most ``2^(-3 max - 3n)``
    and there are at most two per value of ``max`` and ``min``, so the tail is
    at most ``2 * 2^(-3(L+1)) / (1 - 2^-3) * 2^(-3n) / (1 - 2^-3)``.
    """
    if n < 1 or L < n:
        raise ValidationError("need 1 <= n <= L")
    low = u_block_partial(n, L)
    q = 1 / (1 - pow2(-3))
    tail = 2 * pow2(-3 * (L + 1)) * q * pow2(-3 * n) * q
    return DimensionEnclosure(low, low + tail, "direct")


def u_block_stated(n: int) -> Fraction:
    """``3 * 2^(-6n + 2) * (1 - 2^-9)^-2`` as written for the ``U_n`` sum."""
    return 3 * pow2(-6 * n + 2) * _GEOM


def u_block_exact(n: int) -> Fraction:
    """Exact ``U_n`` sum for ``n = 2 mod 3``: ``3 * 2^(-6n-6) * (1 - 2^-9)^-2``."""
    if n % 3 != 2:
        raise ValidationError("closed form derived for n = 2 mod 3")
    return 3 * pow2(-6 * n - 6) * _GEOM


def routes_agree(a: DimensionEnclosure, b: DimensionEnclosure) -> bool:
    return a.intersects(b)


def liouville_partial(I: IndexSetSpec, K: int) -> tuple[Fraction, int]:
    """``x_K = sum_{k=1}^K 2^(-6 n_k + k)`` and the denominator exponent ``6 n_K - K``."""
    ns = I.first(K + 1)[1:]
    if len(ns) < K:
        raise ValidationError("index set too short")
    x = sum((pow2(-D * n + k) for k, n in enumerate(ns, start=1)), Fraction(0))
    return x, D * ns[-1] - K


def liouville_audit(I: IndexSetSpec, n: int, K: int, extra_terms: int = 3) -> dict:
    """Check ``0 < |x - p/q| < q^(-n)`` for ``q = 2^(6 n_K - K)`` and ``p/q = x_K``.

    ``x`` is enclosed by the partial sum up to ``K + extra_terms`` and the tail
    majorant; the inequality is checked against the whole enclosure.
    """
    xK, e = liouville_partial(I, K)
    ns = I.first(K + extra_terms + 2)[1:]
    lo = sum((pow2(-D * m + k) for k, m in enumerate(ns[:K + extra_terms], start=1)), Fraction(0))
    nxt = K + extra_terms + 1
    hi = lo + pow2(-D * ns[nxt - 1] + nxt) / (1 - pow2(-5))
    gap_lo, gap_hi = lo - xK, hi - xK
    bound = pow2(-e * n)
    return {
        "K": K, "n": n, "q_exponent": e,
        "gap_lower": gap_lo, "gap_upper": gap_hi, "bound": bound,
        "holds": 0 < gap_lo and gap_hi < bound,
    }
