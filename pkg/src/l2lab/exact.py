"""Exact numbers: dyadic helpers and two-sided rational enclosures.

Everything numeric in the library is a :class:`fractions.Fraction`.  A dyadic
rational is simply a Fraction whose denominator is a power of two; the helpers
here convert to and from the ``mantissa * 2**exponent`` wire format.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, ValidationError

ZERO = Fraction(0)
ONE = Fraction(1)


def pow2(k: int) -> Fraction:
    """Exact ``2**k`` for any integer ``k``."""
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


def is_dyadic(x: Fraction) -> bool:
    d = Fraction(x).denominator
    return d & (d - 1) == 0


def to_dyadic(x: Fraction) -> tuple[int, int]:
    """Return ``(mantissa, exponent)`` with ``x == mantissa * 2**exponent``.

    The mantissa is odd unless ``x`` is zero, in which case ``(0, 0)``.
    """
    x = Fraction(x)
    if not is_dyadic(x):
        raise DomainError(f"{x} is not a dyadic rational")
    if x == 0:
        return 0, 0
    num, den = x.numerator, x.denominator
    exponent = -(den.bit_length() - 1)
    tz = (num & -num).bit_length() - 1
    return num >> tz, exponent + tz


def from_dyadic(mantissa: int, exponent: int) -> Fraction:
    return mantissa * pow2(exponent)


def dyadic_json(x: Fraction) -> dict:
    m, e = to_dyadic(x)
    return {"mantissa": str(m), "exponent": e}


def dyadic_from_json(obj: dict) -> Fraction:
    try:
        return from_dyadic(int(obj["mantissa"]), int(obj["exponent"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad dyadic object {obj!r}") from exc


def rational_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def binary_expansion(x: Fraction, bits: int) -> str:
    """Truncated binary expansion of ``0 <= x`` with ``bits`` fractional digits."""
    x = Fraction(x)
    if x < 0:
        raise DomainError("binary expansion of a negative number")
    whole = x.numerator // x.denominator
    frac = x - whole
    digits = []
    for _ in range(bits):
        frac *= 2
        if frac >= 1:
            digits.append("1")
            frac -= 1
        else:
            digits.append("0")
    return f"{whole:b}." + "".join(digits)


def parse_binary(text: str) -> Fraction:
    """Parse ``"0.101"`` or ``".101"`` or ``"101"`` (fractional digits) exactly."""
    text = text.strip()
    if text.startswith("0b"):
        text = text[2:]
    whole, _, frac = text.partition(".") if "." in text else ("0", ".", text)
    if not set(whole + frac) <= {"0", "1"}:
        raise ValidationError(f"not a binary string: {text!r}")
    value = Fraction(int(whole or "0", 2))
    for i, ch in enumerate(frac, start=1):
        if ch == "1":
            value += pow2(-i)
    return value


@dataclass(frozen=True)
class DimensionEnclosure:
    """Exact two-sided bound ``lower <= value <= upper`` for a series value."""

    lower: Fraction
    upper: Fraction
    route: str = "point"

    def __post_init__(self):
        object.__setattr__(self, "lower", Fraction(self.lower))
        object.__setattr__(self, "upper", Fraction(self.upper))
        if self.lower > self.upper:
            raise ValidationError(f"empty enclosure [{self.lower}, {self.upper}]")

    @classmethod
    def point(cls, value, route: str = "point") -> "DimensionEnclosure":
        return cls(Fraction(value), Fraction(value), route)

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def is_point(self) -> bool:
        return self.lower == self.upper

    @property
    def value(self) -> Fraction:
        if not self.is_point:
            raise DomainError("enclosure is not a point")
        return self.lower

    def contains(self, x) -> bool:
        return self.lower <= Fraction(x) <= self.upper

    def contains_enclosure(self, other: "DimensionEnclosure") -> bool:
        return self.lower <= other.lower and other.upper <= self.upper

    def intersects(self, other: "DimensionEnclosure") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper

    def __add__(self, other: "DimensionEnclosure") -> "DimensionEnclosure":
        return DimensionEnclosure(self.lower + other.lower, self.upper + other.upper, "sum")

    def __mul__(self, other: "DimensionEnclosure") -> "DimensionEnclosure":
        if self.lower < 0 or other.lower < 0:
            raise DomainError("interval product only defined for non-negative enclosures")
        return DimensionEnclosure(self.lower * other.lower, self.upper * other.upper, "product")

    def scale(self, q) -> "DimensionEnclosure":
        q = Fraction(q)
        if q < 0:
            raise DomainError("negative scale factor")
        return DimensionEnclosure(q * self.lower, q * self.upper, self.route)

    def shift(self, a) -> "DimensionEnclosure":
        a = Fraction(a)
        return DimensionEnclosure(self.lower + a, self.upper + a, self.route)

    def to_json(self, bits: int = 0) -> dict:
        out = {
            "route": self.route,
            "lower": rational_str(self.lower),
            "upper": rational_str(self.upper),
            "width": rational_str(self.width),
            "point": self.is_point,
        }
        if bits:
            out["lower_binary"] = binary_expansion(self.lower, bits)
            out["upper_binary"] = binary_expansion(self.upper, bits)
            out["approx_decimal"] = float(self.lower)
        return out
