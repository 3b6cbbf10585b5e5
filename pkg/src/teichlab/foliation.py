"""Slopes, measured foliations and continued fractions on the torus.

A simple closed curve on the torus is a primitive integer vector (p, q)
taken up to sign; a measured foliation is a real direction vector (a, b)
up to sign, and a positive multiple c * (p, q) is the curve (p, q) with
transverse weight c.  Intersection numbers are absolute determinants.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Union

Number = Union[int, Fraction, float]


@dataclass(frozen=True)
class Slope:
    """Primitive slope p/q in canonical form (q > 0, or 1/0 for infinity)."""

    p: int
    q: int

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if p == 0 and q == 0:
            raise ValueError("0/0 is not a slope")
        g = math.gcd(p, q)
        p, q = p // g, q // g
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def parse(cls, text: str) -> "Slope":
        text = text.strip()
        if text in ("inf", "oo", "∞"):
            return cls(1, 0)
        num, sep, den = text.partition("/")
        return cls(int(num), int(den) if sep else 1)

    @property
    def is_infinite(self) -> bool:
        return self.q == 0

    def value(self) -> Fraction:
        if self.q == 0:
            raise ZeroDivisionError("slope 1/0 has no finite value")
        return Fraction(self.p, self.q)

    def __float__(self) -> float:
        return math.inf if self.q == 0 else self.p / self.q

    def as_foliation(self, weight: Number = 1) -> "FoliationVec":
        return FoliationVec(weight * self.p, weight * self.q)

    def sort_key(self) -> tuple[int, int]:
        # lexicographic on (q, p)
        return (self.q, self.p)

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class ContinuedFraction:
    """Regular continued fraction [a0; a1, a2, ...] with optional periodic tail.

    ``terms`` holds a1, a2, ... before the period; ``period`` repeats forever.
    An empty period means the expansion is finite (a rational number).
    """

    a0: int
    terms: tuple[int, ...] = ()
    period: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(int(a) for a in self.terms))
        object.__setattr__(self, "period", tuple(int(a) for a in self.period))
        if any(a < 1 for a in self.terms + self.period):
            raise ValueError("partial quotients after a0 must be >= 1")

    @classmethod
    def parse(cls, text: str) -> "ContinuedFraction":
        m = re.fullmatch(r"\s*\[\s*(-?\d+)\s*(?:;\s*([\d,\s]*?)\s*(?:\(([\d,\s]+)\))?)?\s*\]\s*", text)
        if m is None:
            raise ValueError(f"cannot parse continued fraction {text!r}")

        def ints(group):
            if not group:
                return ()
            return tuple(int(s) for s in group.split(",") if s.strip())

        return cls(int(m.group(1)), ints(m.group(2)), ints(m.group(3)))

    @classmethod
    def from_fraction(cls, x: Rational | int) -> "ContinuedFraction":
        x = Fraction(x)
        a0 = math.floor(x)
        rest = []
        x -= a0
        while x:
            x = 1 / x
            a = math.floor(x)
            rest.append(a)
            x -= a
        return cls(a0, tuple(rest))

    @property
    def is_finite(self) -> bool:
        return not self.period

    def quotient(self, k: int) -> int:
        """Partial quotient a_k (k >= 1); IndexError past a finite end."""
        if k == 0:
            return self.a0
        if k <= len(self.terms):
            return self.terms[k - 1]
        if not self.period:
            raise IndexError(k)
        return self.period[(k - 1 - len(self.terms)) % len(self.period)]

    def length(self) -> float:
        """Number of partial quotients after a0 (inf for periodic)."""
        return math.inf if self.period else len(self.terms)

    def shifted(self) -> "ContinuedFraction":
        """The tail [a1; a2, ...]."""
        if self.terms:
            return ContinuedFraction(self.terms[0], self.terms[1:], self.period)
        if self.period:
            return ContinuedFraction(self.period[0], (), self.period[1:] + self.period[:1])
        raise ValueError("cannot shift an integer")

    def convergent_pairs(self, n: int) -> list[tuple[int, int]]:
        out = []
        p_prev, q_prev = 1, 0
        p, q = self.a0, 1
        out.append((p, q))
        k = 1
        while len(out) < n:
            try:
                a = self.quotient(k)
            except IndexError:
                break
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
            out.append((p, q))
            k += 1
        return out

    def value(self) -> Fraction:
        if not self.is_finite:
            raise ValueError("periodic expansion has no rational value")
        p, q = self.convergent_pairs(len(self.terms) + 1)[-1]
        return Fraction(p, q)

    def __float__(self) -> float:
        if self.is_finite:
            return float(self.value())
        # convergent error < 1/q^2; 40 extra terms push q past 1e8 for any surd
        p, q = self.convergent_pairs(len(self.terms) + 40 + 2 * len(self.period))[-1]
        return p / q

    def __str__(self) -> str:
        body = ",".join(str(a) for a in self.terms)
        if self.period:
            body += "(" + ",".join(str(a) for a in self.period) + ")"
        return f"[{self.a0};{body}]" if body else f"[{self.a0}]"


@dataclass(frozen=True)
class Irrational:
    """Marker returned by :func:`slope_of` for a minimal (irrational) direction."""

    cf: ContinuedFraction

    def __str__(self) -> str:
        return f"irrational {self.cf}"


@dataclass(frozen=True)
class FoliationVec:
    """Measured foliation on the torus with direction (a, b).

    Integer and Fraction components are kept exact; floats are allowed for
    geometric work.  ``cf`` records an exact irrational slope a/b when the
    vector was built with :meth:`from_cf`.
    """

    a: Number
    b: Number
    cf: ContinuedFraction | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValueError("foliation vector must be non-zero")

    @classmethod
    def from_cf(cls, cf: ContinuedFraction, weight: Number = 1) -> "FoliationVec":
        if cf.is_finite:
            v = cf.value()
            return cls(weight * v.numerator, weight * v.denominator)
        return cls(float(weight) * float(cf), float(weight), cf)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.a, Rational) and isinstance(self.b, Rational)

    def scaled(self, c: Number) -> "FoliationVec":
        return FoliationVec(c * self.a, c * self.b, self.cf)

    def ideal_point(self) -> float:
        """Boundary point of the upper half-plane where this foliation gets short."""
        return math.inf if self.b == 0 else -float(self.a) / float(self.b)


def intersection(F: FoliationVec, G: FoliationVec) -> Number:
    return abs(F.a * G.b - F.b * G.a)


def slope_of(F: FoliationVec) -> Slope | Irrational:
    """Projective class of ``F`` as a slope, or the irrational marker.

    Raises ValueError for float vectors with no continued-fraction record,
    since rationality cannot be decided from a float.
    """
    if F.cf is not None:
        return Irrational(F.cf)
    if not F.is_exact:
        raise ValueError("rationality of a floating-point direction is undecidable")
    a, b = Fraction(F.a), Fraction(F.b)
    den = math.lcm(a.denominator, b.denominator)
    return Slope(int(a * den), int(b * den))


def cf_convergents(x: ContinuedFraction, n: int) -> tuple[list[Slope], bool]:
    """First ``n`` convergents of ``x`` and a flag set when a finite
    expansion ran out before ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pairs = x.convergent_pairs(n)
    return [Slope(p, q) for p, q in pairs], len(pairs) < n


def slope_intersection(a: Slope, b: Slope) -> int:
    return abs(a.p * b.q - a.q * b.p)


GOLDEN = ContinuedFraction(1, (), (1,))
SQRT2 = ContinuedFraction(1, (), (2,))
