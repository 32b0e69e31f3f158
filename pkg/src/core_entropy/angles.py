"""Exact arithmetic on the circle R/Z for rational external angles.

Everything here works on reduced fractions with arbitrary precision
integers.  Floating point is never used: orbit points can sit arbitrarily
close to the partition boundary, and a rounding error there flips a label.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterator


class AngleError(ValueError):
    """Raised for malformed angle input (zero denominator, bad text)."""


@dataclass(frozen=True, order=True)
class Angle:
    """A rational point of the circle, stored as a reduced fraction in [0, 1)."""

    numerator: int
    denominator: int

    def __post_init__(self) -> None:
        if self.denominator <= 0:
            raise AngleError("denominator must be positive")
        if not 0 <= self.numerator < self.denominator:
            raise AngleError("numerator must lie in [0, denominator)")
        if gcd(self.numerator, self.denominator) != 1:
            raise AngleError("fraction is not reduced; use make_angle")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return self.numerator / self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"

    @classmethod
    def parse(cls, text: str) -> "Angle":
        return parse_angle(text)


def make_angle(numerator: int, denominator: int) -> Angle:
    """Return the reduced representative of ``numerator/denominator`` mod 1.

    >>> make_angle(7, 5)
    Angle(numerator=2, denominator=5)
    >>> make_angle(-1, 3)
    Angle(numerator=2, denominator=3)
    """
    if denominator == 0:
        raise AngleError("zero denominator")
    if denominator < 0:
        numerator, denominator = -numerator, -denominator
    numerator %= denominator
    g = gcd(numerator, denominator)
    return Angle(numerator // g, denominator // g)


def from_fraction(value: Fraction | int) -> Angle:
    value = Fraction(value)
    return make_angle(value.numerator, value.denominator)


def parse_angle(text: str) -> Angle:
    """Parse ``"num/den"`` (or a bare integer); unreduced input is accepted."""
    raw = text.strip()
    num_text, sep, den_text = raw.partition("/")
    try:
        numerator = int(num_text)
        denominator = int(den_text) if sep else 1
    except ValueError:
        raise AngleError(f"malformed angle {text!r}; expected 'num/den'") from None
    return make_angle(numerator, denominator)


def doubling(a: Angle) -> Angle:
    """The doubling map x -> 2x mod 1."""
    n, d = a.numerator, a.denominator
    if d % 2 == 0:
        d //= 2
        n %= d
        return Angle(n, d)
    return Angle((2 * n) % d, d)


@dataclass(frozen=True)
class OrbitInfo:
    """Period, pre-period and the postcritical angles x_1 .. x_{p+q}."""

    period: int
    preperiod: int
    points: tuple[Angle, ...]

    @property
    def size(self) -> int:
        return self.period + self.preperiod

    @property
    def purely_periodic(self) -> bool:
        return self.preperiod == 0

    def x(self, i: int) -> Angle:
        """x_i = 2^(i-1) theta for any i >= 1, using the eventual periodicity."""
        if i < 1:
            raise IndexError("orbit indices start at 1")
        k = i - 1
        if k >= self.size:
            k = self.preperiod + (k - self.preperiod) % self.period
        return self.points[k]

    def index_class(self, i: int) -> int:
        """Smallest j in 1..p+q with x_j = x_i."""
        if i <= self.size:
            return i
        return self.preperiod + 1 + (i - self.preperiod - 1) % self.period


def orbit(theta: Angle) -> OrbitInfo:
    first_visit: dict[Angle, int] = {}
    points: list[Angle] = []
    x = theta
    while x not in first_visit:
        first_visit[x] = len(points)
        points.append(x)
        x = doubling(x)
    q = first_visit[x]
    return OrbitInfo(period=len(points) - q, preperiod=q, points=tuple(points))


class PartitionSide(enum.Enum):
    SIDE_A = "A"  # [theta/2, (theta+1)/2)
    SIDE_B = "B"
    BOUNDARY = "boundary"


class PairLabel(enum.Enum):
    SEPARATED = "S"
    NON_SEPARATED = "N"

    @property
    def separated(self) -> bool:
        return self is PairLabel.SEPARATED


def partition_endpoints(theta: Angle) -> tuple[Fraction, Fraction]:
    half = theta.fraction / 2
    return half, half + Fraction(1, 2)


def partition_side(theta: Angle, x: Angle) -> PartitionSide:
    lo, hi = partition_endpoints(theta)
    v = x.fraction
    if v == lo or v == hi:
        return PartitionSide.BOUNDARY
    # lo < 1/2 <= hi < 1 always, so side A never wraps.
    if lo <= v < hi:
        return PartitionSide.SIDE_A
    return PartitionSide.SIDE_B


def label_of_sides(a: PartitionSide, b: PartitionSide) -> PairLabel:
    if PartitionSide.BOUNDARY in (a, b) or a is b:
        return PairLabel.NON_SEPARATED
    return PairLabel.SEPARATED


def is_separated(theta: Angle, i: int, j: int, info: OrbitInfo | None = None) -> PairLabel:
    """Label of the pair (x_i, x_j) with respect to the partition of theta."""
    if i < 1 or j < 1:
        raise ValueError("pair indices start at 1")
    if i == j:
        raise ValueError("is_separated needs two distinct indices")
    info = info if info is not None else orbit(theta)
    return label_of_sides(partition_side(theta, info.x(i)), partition_side(theta, info.x(j)))


def farey_sequence(order: int) -> Iterator[tuple[int, int]]:
    """Yield the Farey sequence F_order from 0/1 to 1/1 in increasing order.

    Uses the neighbour recurrence, so each term costs O(1).
    """
    if order < 1:
        raise ValueError("Farey order must be >= 1")
    a, b, c, d = 0, 1, 1, order
    yield a, b
    while c <= order:
        k = (order + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
        yield a, b
