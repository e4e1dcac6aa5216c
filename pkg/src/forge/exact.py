"""Exact quadratic surds and angles with rational squared cosine.

Building distances are square roots of rationals and apartment angles have
rational ``cos^2``; both are compared exactly by squaring with signs.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering

from .fields import cos_squared_and_sign, format_pi


def _squarefree_split(n):
    """``n = a*a*b`` with ``b`` squarefree; returns ``(a, b)``."""
    a, b, d = 1, 1, 2
    while d * d <= n:
        while n % (d * d) == 0:
            n //= d * d
            a *= d
        d += 1
    return a, b * n


def _sign(x):
    return (x > 0) - (x < 0)


@total_ordering
class Surd:
    """The real number ``coef * sqrt(radicand)`` with squarefree radicand.

    Sums are only defined between surds with the same radicand (or zero);
    products and comparisons are always exact.
    """

    __slots__ = ("coef", "radicand")

    def __init__(self, coef=0, radicand=1):
        coef = Fraction(coef)
        if coef == 0:
            radicand = 1
        self.coef = coef
        self.radicand = int(radicand)

    @classmethod
    def sqrt(cls, x):
        x = Fraction(x)
        if x < 0:
            raise ValueError("square root of a negative number")
        if x == 0:
            return cls(0)
        # sqrt(n/d) = sqrt(n*d)/d
        a, b = _squarefree_split(x.numerator * x.denominator)
        return cls(Fraction(a, x.denominator), b)

    @classmethod
    def coerce(cls, x):
        return x if isinstance(x, Surd) else cls(Fraction(x), 1)

    @property
    def square(self):
        """``self**2`` as a Fraction."""
        return self.coef * self.coef * self.radicand

    def sign(self):
        return _sign(self.coef)

    def signed_square(self):
        return self.sign() * self.square

    def is_rational(self):
        return self.radicand == 1

    def to_fraction(self):
        if self.radicand != 1:
            raise ValueError(f"{self} is irrational")
        return self.coef

    def __add__(self, other):
        other = Surd.coerce(other)
        if self.coef == 0:
            return other
        if other.coef == 0:
            return self
        if self.radicand != other.radicand:
            raise ValueError(f"cannot add {self} and {other} exactly")
        return Surd(self.coef + other.coef, self.radicand)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.coef, self.radicand)

    def __sub__(self, other):
        return self + (-Surd.coerce(other))

    def __rsub__(self, other):
        return Surd.coerce(other) - self

    def __mul__(self, other):
        other = Surd.coerce(other)
        a, b = _squarefree_split(self.radicand * other.radicand)
        return Surd(self.coef * other.coef * a, b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Surd.coerce(other)
        if other.coef == 0:
            raise ZeroDivisionError("division by zero surd")
        # 1/(c sqrt r) = sqrt(r)/(c r)
        return self * Surd(1 / (other.coef * other.radicand), other.radicand)

    def _cmp_key(self):
        return self.signed_square()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Surd)):
            o = Surd.coerce(other)
            return self.coef == o.coef and self.radicand == o.radicand
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, (int, Fraction, Surd)):
            return self._cmp_key() < Surd.coerce(other)._cmp_key()
        return NotImplemented

    def __hash__(self):
        if self.radicand == 1:
            return hash(self.coef)
        return hash((self.coef, self.radicand))

    def __float__(self):
        return float(self.coef) * math.sqrt(self.radicand)

    def __repr__(self):
        return f"Surd({self})"

    def __str__(self):
        if self.radicand == 1:
            return str(self.coef)
        if self.coef == 1:
            return f"sqrt({self.radicand})"
        if self.coef == -1:
            return f"-sqrt({self.radicand})"
        return f"{self.coef}*sqrt({self.radicand})"

    @classmethod
    def parse(cls, text):
        text = str(text).strip().replace(" ", "")
        if "sqrt(" not in text:
            return cls(Fraction(text))
        head, _, rad = text.partition("sqrt(")
        rad = int(rad.rstrip(")"))
        head = head.rstrip("*")
        coef = {"": 1, "-": -1}.get(head)
        if coef is None:
            coef = Fraction(head)
        return cls(coef, rad)


@total_ordering
class Angle:
    """An angle in ``[0, pi]`` known exactly through ``cos^2`` and ``sign(cos)``."""

    __slots__ = ("cos2", "sign")

    def __init__(self, cos2, sign):
        cos2 = Fraction(cos2)
        if not 0 <= cos2 <= 1:
            raise ValueError("cos^2 must lie in [0, 1]")
        if (cos2 == 0) != (sign == 0):
            raise ValueError("sign must be 0 exactly when cos is 0")
        self.cos2 = cos2
        self.sign = int(sign)

    @classmethod
    def from_pi(cls, x):
        """Angle equal to ``x * pi`` (``x`` rational in [0, 1])."""
        x = Fraction(x)
        if not 0 <= x <= 1:
            raise ValueError("angles lie in [0, pi]")
        return cls(*cos_squared_and_sign(x))

    @classmethod
    def from_cos(cls, cos):
        """From an exact cosine given as a Fraction or :class:`Surd`."""
        cos = Surd.coerce(cos)
        return cls(cos.square, cos.sign())

    @property
    def cos(self):
        return self.sign * Surd.sqrt(self.cos2)

    @property
    def radians(self):
        return math.acos(max(-1.0, min(1.0, float(self.cos))))

    def pi_fraction(self):
        """The angle as a rational multiple of pi, or ``None``."""
        for x in _TABLE:
            if cos_squared_and_sign(x) == (self.cos2, self.sign):
                return x
        return None

    def _key(self):
        # the angle grows as the signed cos^2 shrinks
        return -self.sign * self.cos2

    def __eq__(self, other):
        if isinstance(other, Angle):
            return self._key() == other._key()
        if isinstance(other, (int, Fraction)):
            return self == Angle.from_pi(other)
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Angle.from_pi(other)
        if isinstance(other, Angle):
            return self._key() < other._key()
        return NotImplemented

    def __hash__(self):
        return hash((self.cos2, self.sign))

    def __float__(self):
        return self.radians

    def __repr__(self):
        return f"Angle({self})"

    def __str__(self):
        x = self.pi_fraction()
        if x is not None:
            return format_pi(x)
        return f"acos({'-' if self.sign < 0 else ''}sqrt({self.cos2}))"

    def to_json(self):
        return {"cos2": str(self.cos2), "sign": self.sign, "text": str(self)}

    @classmethod
    def from_json(cls, data):
        return cls(Fraction(data["cos2"]), data["sign"])


_TABLE = sorted({Fraction(k, d) for d in (1, 2, 3, 4, 6) for k in range(d + 1)})
