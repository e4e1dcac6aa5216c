"""Small finite fields and exact angle bookkeeping.

Field elements are plain ints in ``range(q)``.  For prime ``q`` they are
residues; for ``q = p**k`` an int encodes the coefficient vector of a
polynomial in the generator (base ``p`` digits, lowest degree first).
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .errors import UnsupportedOrder


def prime_power(q):
    """Return ``(p, k)`` with ``q == p**k`` or ``None``."""
    if q < 2:
        return None
    for p in range(2, q + 1):
        if q % p == 0:
            k, r = 0, q
            while r % p == 0:
                r //= p
                k += 1
            return (p, k) if r == 1 else None
    return None


class GF:
    """Arithmetic in the field with ``q`` elements (table driven)."""

    def __init__(self, q):
        pk = prime_power(q)
        if pk is None:
            raise UnsupportedOrder(f"{q} is not a prime power")
        self.q = q
        self.p, self.k = pk
        if self.k == 1:
            self._add = [[(a + b) % q for b in range(q)] for a in range(q)]
            self._mul = [[(a * b) % q for b in range(q)] for a in range(q)]
        else:
            self._build_extension()
        self._neg = [next(b for b in range(q) if self._add[a][b] == 0) for a in range(q)]
        self._inv = [None] + [
            next(b for b in range(1, q) if self._mul[a][b] == 1) for a in range(1, q)
        ]

    def _digits(self, a):
        out = []
        for _ in range(self.k):
            out.append(a % self.p)
            a //= self.p
        return out

    def _undigits(self, ds):
        return sum(d * self.p**i for i, d in enumerate(ds))

    def _build_extension(self):
        p, k, q = self.p, self.k, self.q
        modulus = _irreducible(p, k)
        add = [[0] * q for _ in range(q)]
        mul = [[0] * q for _ in range(q)]
        for a in range(q):
            da = self._digits(a)
            for b in range(q):
                db = self._digits(b)
                add[a][b] = self._undigits([(x + y) % p for x, y in zip(da, db)])
                prod = [0] * (2 * k - 1)
                for i, x in enumerate(da):
                    for j, y in enumerate(db):
                        prod[i + j] = (prod[i + j] + x * y) % p
                # reduce by the monic modulus (lowest degree first, length k+1)
                for deg in range(2 * k - 2, k - 1, -1):
                    c = prod[deg]
                    if c:
                        for i in range(k + 1):
                            prod[deg - k + i] = (prod[deg - k + i] - c * modulus[i]) % p
                mul[a][b] = self._undigits(prod[:k])
        self._add, self._mul = add, mul

    def add(self, a, b):
        return self._add[a][b]

    def sub(self, a, b):
        return self._add[a][self._neg[b]]

    def mul(self, a, b):
        return self._mul[a][b]

    def neg(self, a):
        return self._neg[a]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self._inv[a]

    def dot(self, u, v):
        s = 0
        for a, b in zip(u, v):
            s = self._add[s][self._mul[a][b]]
        return s

    def normalize(self, vec):
        """Scale ``vec`` so its first nonzero entry is 1 (projective point)."""
        for a in vec:
            if a:
                c = self._inv[a]
                return tuple(self._mul[c][x] for x in vec)
        raise ValueError("zero vector has no projective normal form")

    def vectors(self, dim):
        return product(range(self.q), repeat=dim)

    def projective_points(self, dim):
        """Normalized nonzero vectors of ``F_q^dim`` in ascending order."""
        return sorted({self.normalize(v) for v in self.vectors(dim) if any(v)})

    def matvec(self, m, v):
        return tuple(self.dot(row, v) for row in m)

    def matmul(self, a, b):
        cols = list(zip(*b))
        return tuple(tuple(self.dot(row, col) for col in cols) for row in a)

    def det3(self, m):
        f = self
        (a, b, c), (d, e, g), (h, i, j) = m
        t1 = f.mul(a, f.sub(f.mul(e, j), f.mul(g, i)))
        t2 = f.mul(b, f.sub(f.mul(d, j), f.mul(g, h)))
        t3 = f.mul(c, f.sub(f.mul(d, i), f.mul(e, h)))
        return f.add(f.sub(t1, t2), t3)

    def __repr__(self):
        return f"GF({self.q})"


def _irreducible(p, k):
    # monic polynomial of degree k with no roots suffices for k <= 3
    for coeffs in product(range(p), repeat=k):
        poly = list(coeffs) + [1]
        if all(sum(c * x**i for i, c in enumerate(poly)) % p for x in range(p)):
            return poly
    raise UnsupportedOrder(f"no irreducible polynomial for {p}^{k}")


@lru_cache(maxsize=None)
def field(q):
    return GF(q)


# ---------------------------------------------------------------------------
# angles as exact rational multiples of pi

def format_pi(x):
    """Serialize a rational multiple of pi as ``"k/m pi"``."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator} pi"


def parse_pi(text):
    text = text.strip()
    if not text.endswith("pi"):
        raise ValueError(f"not a multiple of pi: {text!r}")
    return Fraction(text[:-2].strip() or "1")


def to_radians(x):
    return float(x) * math.pi


# cos^2 of k*pi/m is rational only for these denominators
_RATIONAL_COS2 = (1, 2, 3, 4, 6)


def cos_squared_and_sign(x):
    """Exact ``(cos^2, sign(cos))`` for a rational multiple ``x`` of pi.

    Only angles whose cosine squared is rational are supported.
    """
    x = Fraction(x) % 2
    if x.denominator not in _RATIONAL_COS2:
        raise ValueError(f"cos^2 of {format_pi(x)} is irrational")
    table = {
        Fraction(0): (Fraction(1), 1),
        Fraction(1, 6): (Fraction(3, 4), 1),
        Fraction(1, 4): (Fraction(1, 2), 1),
        Fraction(1, 3): (Fraction(1, 4), 1),
        Fraction(1, 2): (Fraction(0), 0),
    }
    # fold into [0, 1/2] keeping track of the sign of cos
    if x > 1:
        x = 2 - x
    sign = 1
    if x > Fraction(1, 2):
        x, sign = 1 - x, -1
    c2, s = table[x]
    return c2, s * sign
