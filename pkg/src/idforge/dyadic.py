"""Exact dyadic rationals ``numerator / 2**exponent``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

__all__ = ["DyadicMeasure"]


@dataclass(frozen=True)
class DyadicMeasure:
    """A value in [0, 1] stored reduced: numerator odd, or zero with exponent 0."""

    numerator: int
    exponent: int = 0

    def __post_init__(self):
        num, exp = int(self.numerator), int(self.exponent)
        if num < 0 or exp < 0:
            raise ValueError("numerator and exponent must be non-negative")
        if num == 0:
            exp = 0
        else:
            shift = min((num & -num).bit_length() - 1, exp)
            num >>= shift
            exp -= shift
        if num > (1 << exp):
            raise ValueError(f"{num}/2^{exp} exceeds 1")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "exponent", exp)

    @classmethod
    def from_count(cls, count: int, bits: int) -> "DyadicMeasure":
        """``count`` atoms out of ``2**bits``."""
        return cls(count, bits)

    @classmethod
    def parse(cls, text: str) -> "DyadicMeasure":
        num, _, rest = text.strip().partition("/2^")
        return cls(int(num), int(rest) if rest else 0)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def complement(self) -> "DyadicMeasure":
        return DyadicMeasure((1 << self.exponent) - self.numerator, self.exponent)

    def _pair(self, other):
        if isinstance(other, DyadicMeasure):
            return self.as_fraction(), other.as_fraction()
        if isinstance(other, (int, Rational)):
            return self.as_fraction(), Fraction(other)
        return NotImplemented

    def __add__(self, other: "DyadicMeasure") -> "DyadicMeasure":
        if not isinstance(other, DyadicMeasure):
            return NotImplemented
        exp = max(self.exponent, other.exponent)
        num = (self.numerator << (exp - self.exponent)) + (other.numerator << (exp - other.exponent))
        return DyadicMeasure(num, exp)

    def __sub__(self, other: "DyadicMeasure") -> "DyadicMeasure":
        if not isinstance(other, DyadicMeasure):
            return NotImplemented
        exp = max(self.exponent, other.exponent)
        num = (self.numerator << (exp - self.exponent)) - (other.numerator << (exp - other.exponent))
        return DyadicMeasure(num, exp)

    # Comparisons go through Fraction so thresholds like 1/L compare exactly.
    def __eq__(self, other):
        pair = self._pair(other)
        return NotImplemented if pair is NotImplemented else pair[0] == pair[1]

    def __hash__(self):
        return hash(self.as_fraction())

    def __lt__(self, other):
        pair = self._pair(other)
        return NotImplemented if pair is NotImplemented else pair[0] < pair[1]

    def __le__(self, other):
        pair = self._pair(other)
        return NotImplemented if pair is NotImplemented else pair[0] <= pair[1]

    def __gt__(self, other):
        pair = self._pair(other)
        return NotImplemented if pair is NotImplemented else pair[0] > pair[1]

    def __ge__(self, other):
        pair = self._pair(other)
        return NotImplemented if pair is NotImplemented else pair[0] >= pair[1]

    def __float__(self) -> float:
        return float(self.as_fraction())

    def __str__(self) -> str:
        return f"{self.numerator}/2^{self.exponent}"

    def __repr__(self) -> str:
        return f"DyadicMeasure({self})"
