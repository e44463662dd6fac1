"""Elements of Q_p known to a bounded absolute precision.

A :class:`PadicScalar` stores ``p^v * u + O(p^N)`` with ``u`` a unit reduced
modulo ``p^(N - v)``.  Every operation computes the absolute precision of its
result from the precisions and valuations of its inputs; nothing is silently
assumed exact.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Union

from .errors import (
    DenominatorPrecision,
    DivisionByZeroToPrecision,
    PrecisionExhausted,
)

Rational = Union[int, Fraction]


def vp_int(n: int, p: int) -> int:
    """Valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_factorial(n: int, p: int) -> int:
    """Legendre's formula for v_p(n!)."""
    v, k = 0, p
    while k <= n:
        v += n // k
        k *= p
    return v


def is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    return all(p % k for k in range(3, int(p**0.5) + 1, 2))


class PadicScalar:
    """An element ``p^v * u + O(p^N)`` of Q_p.

    ``valuation`` is ``None`` when the value is zero to precision ``N``.
    Instances are immutable.  There is deliberately no ``__eq__``: use
    :meth:`equals`, which compares at the smaller of the two precisions.
    """

    __slots__ = ("prime", "abs_precision", "valuation", "unit_digits")

    def __init__(self, prime: int, abs_precision: int, valuation: int | None, unit_digits: int):
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "abs_precision", abs_precision)
        object.__setattr__(self, "valuation", valuation)
        object.__setattr__(self, "unit_digits", unit_digits)

    def __setattr__(self, name, value):
        raise AttributeError("PadicScalar is immutable")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_parts(cls, p: int, N: int, v: int, u: int) -> "PadicScalar":
        """Normalise ``p^v * u + O(p^N)`` for an arbitrary integer ``u``."""
        if u == 0 or v >= N:
            return cls.zero(p, N)
        while u % p == 0:
            u //= p
            v += 1
        if v >= N:
            return cls.zero(p, N)
        return cls(p, N, v, u % p ** (N - v))

    @classmethod
    def zero(cls, p: int, N: int) -> "PadicScalar":
        return cls(p, N, None, 0)

    @classmethod
    def from_int(cls, p: int, N: int, n: int) -> "PadicScalar":
        return cls.from_parts(p, N, 0, n)

    # -- queries ----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.valuation is None

    @property
    def valuation_lower_bound(self) -> int:
        return self.abs_precision if self.valuation is None else self.valuation

    def digits(self) -> list[int]:
        """Little-endian base-p digits of the unit part (``N - v`` of them)."""
        if self.valuation is None:
            return []
        p, u = self.prime, self.unit_digits
        out = []
        for _ in range(self.abs_precision - self.valuation):
            u, r = divmod(u, p)
            out.append(r)
        return out

    def to_int(self) -> int:
        """Representative in ``[0, p^N)``; requires a p-adic integer."""
        if self.valuation is None:
            return 0
        if self.valuation < 0:
            raise ValueError("not a p-adic integer")
        return (self.unit_digits * self.prime**self.valuation) % self.prime**self.abs_precision

    def to_fraction(self) -> Fraction:
        if self.valuation is None:
            return Fraction(0)
        return Fraction(self.unit_digits) * Fraction(self.prime) ** self.valuation

    def equals(self, other: "PadicScalar | Rational") -> bool:
        return (self - other).is_zero()

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if other.prime != self.prime:
                raise ValueError(f"prime mismatch: {self.prime} vs {other.prime}")
            return other
        if isinstance(other, (int, Fraction)):
            return _exact(self, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(self, neg(other))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(other, neg(self))

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return divide(self, other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return divide(other, self)

    def __pow__(self, n: int):
        if n < 0:
            return invert(self) ** (-n)
        result = _exact(self, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __repr__(self) -> str:
        return f"PadicScalar({to_text(self)})"

    def __str__(self) -> str:
        return to_text(self)


def scalar_from_rational(p: int, N: int, value: Rational) -> PadicScalar:
    """The class of ``a/b`` modulo ``p^N``."""
    if N < 1:
        raise ValueError("precision must be >= 1")
    return _rational(p, N, value)


def _exact(like: PadicScalar, value: Rational) -> PadicScalar:
    # An exact rational operand must never be the limiting precision.
    value = Fraction(value)
    p = like.prime
    v = 0 if value == 0 else vp_int(value.numerator, p) - vp_int(value.denominator, p)
    N = abs(like.abs_precision) + abs(like.valuation_lower_bound) + 2 * abs(v) + 1
    return _rational(p, N, value)


def _rational(p: int, N: int, value: Rational) -> PadicScalar:
    value = Fraction(value)
    a, b = value.numerator, value.denominator
    if a == 0:
        return PadicScalar.zero(p, N)
    v = vp_int(a, p) - vp_int(b, p)
    if v < -N:
        raise DenominatorPrecision(f"v_{p}({value}) = {v} < -{N}")
    a //= p ** max(vp_int(a, p), 0)
    b //= p ** vp_int(b, p)
    if v >= N:
        return PadicScalar.zero(p, N)
    m = p ** (N - v)
    return PadicScalar(p, N, v, (a * pow(b, -1, m)) % m)


def add(a: PadicScalar, b: PadicScalar) -> PadicScalar:
    p = a.prime
    N = min(a.abs_precision, b.abs_precision)
    if a.valuation is None:
        return PadicScalar.from_parts(p, N, b.valuation, b.unit_digits) if b.valuation is not None else PadicScalar.zero(p, N)
    if b.valuation is None:
        return PadicScalar.from_parts(p, N, a.valuation, a.unit_digits)
    m = min(a.valuation, b.valuation)
    if m >= N:
        return PadicScalar.zero(p, N)
    s = a.unit_digits * p ** (a.valuation - m) + b.unit_digits * p ** (b.valuation - m)
    return PadicScalar.from_parts(p, N, m, s % p ** (N - m))


def neg(a: PadicScalar) -> PadicScalar:
    if a.valuation is None:
        return a
    return PadicScalar.from_parts(a.prime, a.abs_precision, a.valuation, -a.unit_digits)


def mul(a: PadicScalar, b: PadicScalar) -> PadicScalar:
    p = a.prime
    N = min(a.valuation_lower_bound + b.abs_precision, b.valuation_lower_bound + a.abs_precision)
    if a.valuation is None or b.valuation is None:
        return PadicScalar.zero(p, N)
    return PadicScalar.from_parts(p, N, a.valuation + b.valuation, a.unit_digits * b.unit_digits)


def invert(b: PadicScalar) -> PadicScalar:
    if b.valuation is None:
        raise DivisionByZeroToPrecision(f"inverse of 0 + O({b.prime}^{b.abs_precision})")
    rel = b.abs_precision - b.valuation
    m = b.prime**rel
    return PadicScalar(b.prime, b.abs_precision - 2 * b.valuation, -b.valuation, pow(b.unit_digits, -1, m))


def divide(a: PadicScalar, b: PadicScalar) -> PadicScalar:
    return mul(a, invert(b))


def valuation_exact(a: PadicScalar) -> int:
    if a.valuation is None:
        raise PrecisionExhausted(
            f"zero to precision {a.abs_precision}: valuation only bounded below"
        )
    return a.valuation


def teichmueller_lift(p: int, residue: int, N: int) -> PadicScalar:
    """The (p-1)-th root of unity congruent to ``residue`` mod p."""
    if residue % p == 0:
        raise ValueError("residue must be a unit mod p")
    m = p**N
    z = residue % p
    while True:
        nz = pow(z, p, m)
        if nz == z:
            return PadicScalar.from_int(p, N, z)
        z = nz


def primitive_root(p: int) -> int:
    """Smallest generator of (Z/pZ)^*."""
    factors = [q for q in range(2, p) if (p - 1) % q == 0 and all(q % r for r in range(2, q))]
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    raise ValueError(f"{p} is not prime")


# -- textual form -----------------------------------------------------------

def to_text(a: PadicScalar) -> str:
    """Render as ``p^v * (d0 + d1*p + ...) + O(p^N)``."""
    p, N = a.prime, a.abs_precision
    if a.valuation is None:
        return f"0 + O({p}^{N})"
    terms = []
    for i, d in enumerate(a.digits()):
        if i == 0:
            terms.append(f"{d}")
        elif i == 1:
            terms.append(f"{d}*{p}")
        else:
            terms.append(f"{d}*{p}^{i}")
    return f"{p}^{a.valuation} * ({' + '.join(terms)}) + O({p}^{N})"


_ZERO_RE = re.compile(r"^\s*0\s*\+\s*O\(\s*(\d+)\s*\^\s*(-?\d+)\s*\)\s*$")
_FULL_RE = re.compile(r"^\s*(\d+)\s*\^\s*(-?\d+)\s*\*\s*\((.*)\)\s*\+\s*O\(\s*(\d+)\s*\^\s*(-?\d+)\s*\)\s*$")
_TERM_RE = re.compile(r"^\s*(\d+)\s*(?:\*\s*(\d+)\s*(?:\^\s*(\d+))?)?\s*$")


def parse_text(s: str) -> PadicScalar:
    """Inverse of :func:`to_text`."""
    m = _ZERO_RE.match(s)
    if m:
        return PadicScalar.zero(int(m.group(1)), int(m.group(2)))
    m = _FULL_RE.match(s)
    if not m:
        raise ValueError(f"not a p-adic scalar: {s!r}")
    p, v, body, p2, N = int(m.group(1)), int(m.group(2)), m.group(3), int(m.group(4)), int(m.group(5))
    if p != p2:
        raise ValueError("inconsistent primes")
    digits = []
    for i, term in enumerate(body.split("+")):
        t = _TERM_RE.match(term)
        if not t:
            raise ValueError(f"bad term {term!r}")
        d = int(t.group(1))
        exp = 0 if t.group(2) is None else (1 if t.group(3) is None else int(t.group(3)))
        if t.group(2) is not None and int(t.group(2)) != p:
            raise ValueError(f"bad base in {term!r}")
        if exp != i or not 0 <= d < p:
            raise ValueError(f"digit term out of order or range: {term!r}")
        digits.append(d)
    if len(digits) != N - v:
        raise ValueError("digit count does not match precision")
    u = sum(d * p**i for i, d in enumerate(digits))
    if u % p == 0:
        raise ValueError("leading digit of the unit part must be nonzero")
    return PadicScalar(p, N, v, u)
