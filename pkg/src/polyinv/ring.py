"""Coefficient rings: integers, rationals and prime fields with balanced residues.

Polynomials never store ring-element objects; they store plain Python
``int`` (for ZZ and GF(p)) or :class:`fractions.Fraction` (for QQ) and ask the
ring to put raw values into canonical form. :class:`PrimeFieldElement` is the
scalar-level API for code that wants to work with single residues.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


class RingError(ValueError):
    """Raised on invalid moduli, mismatched rings or non-representable values."""


# Deterministic Miller-Rabin witnesses; this set is exact for n < 3.3 * 10**24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3317044064679887385961981


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    if n >= _MR_LIMIT:
        raise RingError(f"primality of {n} is only decided for n < {_MR_LIMIT}")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    c = max(n + 1, 2)
    while not is_prime(c):
        c += 1
    return c


def check_prime(p) -> int:
    if isinstance(p, bool) or not isinstance(p, int):
        raise RingError(f"modulus must be an integer, got {p!r}")
    if p < 2 or not is_prime(p):
        raise RingError(f"invalid modulus {p}: not a prime")
    return p


def balanced(a: int, m: int) -> int:
    """Representative of ``a mod m`` in ``(-m/2, m/2]``.

    For odd ``m`` this is ``[-(m-1)/2, (m-1)/2]``; for ``m = 2`` it is ``{0, 1}``.
    """
    r = a % m
    if r > m >> 1:
        r -= m
    return r


@dataclass(frozen=True)
class PrimeFieldElement:
    """A residue modulo a prime, always held in balanced form."""

    value: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", balanced(self.value, self.p))

    def _check(self, other) -> int:
        if isinstance(other, PrimeFieldElement):
            if other.p != self.p:
                raise RingError(f"modulus mismatch: {self.p} vs {other.p}")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        v = self._check(other)
        if v is NotImplemented:
            return v
        return PrimeFieldElement(self.value + v, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._check(other)
        if v is NotImplemented:
            return v
        return PrimeFieldElement(self.value - v, self.p)

    def __rsub__(self, other):
        v = self._check(other)
        if v is NotImplemented:
            return v
        return PrimeFieldElement(v - self.value, self.p)

    def __mul__(self, other):
        v = self._check(other)
        if v is NotImplemented:
            return v
        return PrimeFieldElement(self.value * v, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return PrimeFieldElement(-self.value, self.p)

    def inverse(self) -> PrimeFieldElement:
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse modulo {self.p}")
        return PrimeFieldElement(pow(self.value, -1, self.p), self.p)

    def __int__(self):
        return self.value

    def __str__(self):
        return str(self.value)


def balanced_residue(a: int, p: int) -> PrimeFieldElement:
    """Reduce the integer ``a`` modulo the prime ``p`` to its balanced representative."""
    return PrimeFieldElement(a, check_prime(p))


class Ring:
    """Coefficient domain of a polynomial.

    ``normalize`` maps a raw accumulated value (result of Python ``+``/``*`` on
    canonical coefficients) back to canonical form; zero stays falsy so the
    polynomial layer can drop it.
    """

    is_field = False
    characteristic = 0

    def normalize(self, c):
        return c

    def convert(self, c):
        raise NotImplementedError

    def lift(self, c) -> int:
        """Integer (or rational) value of a canonical coefficient."""
        return c

    def __repr__(self):
        return self.name


class IntegerRing(Ring):
    name = "ZZ"

    def convert(self, c):
        if isinstance(c, bool):
            raise RingError("booleans are not ring elements")
        if isinstance(c, int):
            return c
        if isinstance(c, Rational):
            if c.denominator != 1:
                raise RingError(f"{c} is not an integer")
            return int(c.numerator)
        raise RingError(f"cannot convert {c!r} to an integer")

    def __eq__(self, other):
        return isinstance(other, IntegerRing)

    def __hash__(self):
        return hash("ZZ")

    def __reduce__(self):
        return (IntegerRing, ())


class RationalField(Ring):
    name = "QQ"
    is_field = True

    def normalize(self, c):
        # integers are kept as int so that ZZ-valued maps compare equal across rings
        if isinstance(c, Fraction) and c.denominator == 1:
            return int(c.numerator)
        return c

    def convert(self, c):
        if isinstance(c, bool):
            raise RingError("booleans are not ring elements")
        if isinstance(c, (int, Fraction)):
            return self.normalize(c)
        if isinstance(c, Rational):
            return self.normalize(Fraction(c.numerator, c.denominator))
        raise RingError(f"cannot convert {c!r} to a rational")

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __reduce__(self):
        return (RationalField, ())


class PrimeField(Ring):
    """GF(p) with coefficients stored as balanced ``int`` residues."""

    is_field = True

    def __init__(self, p: int):
        self.p = check_prime(p)
        self.characteristic = p
        self.half = p >> 1

    @property
    def name(self):
        return f"GF({self.p})"

    def normalize(self, c):
        p = self.p
        r = c % p
        if r > self.half:
            r -= p
        return r

    def convert(self, c):
        if isinstance(c, bool):
            raise RingError("booleans are not ring elements")
        if isinstance(c, int):
            return self.normalize(c)
        if isinstance(c, PrimeFieldElement):
            if c.p != self.p:
                raise RingError(f"modulus mismatch: {c.p} vs {self.p}")
            return c.value
        if isinstance(c, Rational):
            den = c.denominator % self.p
            if den == 0:
                raise RingError(f"denominator of {c} vanishes modulo {self.p}")
            return self.normalize(c.numerator * pow(den, -1, self.p))
        raise RingError(f"cannot convert {c!r} to GF({self.p})")

    def element(self, c) -> PrimeFieldElement:
        return PrimeFieldElement(self.convert(c), self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __reduce__(self):
        return (PrimeField, (self.p,))


ZZ = IntegerRing()
QQ = RationalField()


def GF(p: int) -> PrimeField:
    return PrimeField(p)


def parse_ring(tag: str) -> Ring:
    """Parse ``"integer"``/``"ZZ"``, ``"rational"``/``"QQ"`` or ``"gf(p)"``/``"GF(p)"``."""
    t = tag.strip().lower()
    if t in ("integer", "zz", "z"):
        return ZZ
    if t in ("rational", "qq", "q"):
        return QQ
    if t.startswith("gf(") and t.endswith(")"):
        try:
            p = int(t[3:-1])
        except ValueError:
            raise RingError(f"bad ring tag {tag!r}") from None
        return PrimeField(p)
    raise RingError(f"unknown ring {tag!r}")
