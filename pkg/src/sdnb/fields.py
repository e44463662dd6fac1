"""Arithmetic in the tower Q_p < K < K' = K(gamma) < L = K'(y).

* ``K`` is unramified of degree ``d``, presented as ``Z_p[t]/(m(t))`` with
  ``m`` a monic lift of an irreducible polynomial over F_p.
* ``K' = K[gamma]/(gamma^(p-1) + p)``, totally ramified of degree ``p-1``.
* ``L = K'[y]/(y^p - x)`` for a one-unit ``x`` with ``v(x - 1) = 1``.

All three levels share one element type, :class:`Elem`.  An element is a flat
vector of Z_p-coordinates over the monomial basis ``y^i gamma^j t^k`` (flat
index ``(i*(p-1) + j)*d + k``), stored in fixed point: coordinate ``c / p^s``
known modulo ``p^prec``.  The monomial basis is a Z_p-basis of the ring of
integers at every level, so ``prec`` is an absolute precision in the usual
sense: the element is known modulo ``p^prec`` times the integers.

Because lower levels occupy a prefix of the flat layout, embedding K into K'
or K' into L is zero padding.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from functools import cached_property
from math import comb
from typing import Sequence

from .errors import (
    ExponentNotIntegral,
    NotAUniformizerSeed,
    NotAUnit,
    NotOneUnit,
    PrecisionExhausted,
    ReducibleModulus,
)
from .padic import PadicScalar, is_odd_prime, parse_text, to_text, vp_int


# ---------------------------------------------------------------------------
# polynomials over F_p (modulus search)

def _polymod_p(a: list[int], b: list[int], p: int) -> list[int]:
    """Remainder of ``a`` by monic ``b`` over F_p (low-to-high lists)."""
    a = [x % p for x in a]
    db = len(b) - 1
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k]
        if c:
            for i in range(db + 1):
                a[k - db + i] = (a[k - db + i] - c * b[i]) % p
    a = a[:db]
    while a and a[-1] == 0:
        a.pop()
    return a


def is_irreducible_mod_p(poly: Sequence[int], p: int) -> bool:
    """Brute-force factor search over monic polynomials of degree <= deg/2."""
    d = len(poly) - 1
    if d <= 1:
        return d == 1
    for k in range(1, d // 2 + 1):
        for low in itertools.product(range(p), repeat=k):
            if not _polymod_p(list(poly), list(low) + [1], p):
                return False
    return True


def lowest_irreducible(p: int, d: int) -> list[int]:
    """Lexicographically lowest monic irreducible of degree d over F_p."""
    if d == 1:
        return [0, 1]
    for high_first in itertools.product(range(p), repeat=d):
        poly = list(reversed(high_first)) + [1]
        if is_irreducible_mod_p(poly, p):
            return poly
    raise ReducibleModulus(f"no irreducible of degree {d} over F_{p}")  # unreachable


# ---------------------------------------------------------------------------
# levels

class Level:
    """Common surface of the three tower levels."""

    p: int
    d: int
    dim: int
    e: int
    depth: int
    name: str
    base: "Level | None"

    def raw_mul(self, a: list[int], b: list[int], mod: int) -> list[int]:
        raise NotImplementedError

    def level_valuation(self, c: list[int], s: int) -> int | None:
        raise NotImplementedError

    # -- element constructors --------------------------------------------

    def zero(self, prec: int | None = None) -> "Elem":
        return Elem(self, [0] * self.dim, 0, self.prec if prec is None else prec)

    def one(self, prec: int | None = None) -> "Elem":
        return self.from_int(1, prec)

    def from_int(self, n: int, prec: int | None = None) -> "Elem":
        c = [0] * self.dim
        c[0] = n
        return Elem.make(self, c, 0, self.prec if prec is None else prec)

    def from_rational(self, q, prec: int | None = None) -> "Elem":
        return self.one(prec) * Fraction(q)

    def from_coords(self, coords: Sequence[int], prec: int | None = None, shift: int = 0) -> "Elem":
        if len(coords) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates")
        return Elem.make(self, list(coords), shift, self.prec if prec is None else prec)

    def embed(self, z: "Elem") -> "Elem":
        if z.F is self:
            return z
        if z.F.depth > self.depth or z.F.p != self.p:
            raise ValueError(f"cannot embed {z.F.name} into {self.name}")
        return Elem(self, z.c + [0] * (self.dim - z.F.dim), z.s, z.prec)

    def random(self, rng: random.Random, prec: int | None = None, scale: int = 0) -> "Elem":
        """Uniform integral element times ``p^scale``."""
        prec = self.prec if prec is None else prec
        m = self.p ** max(prec - scale, 0)
        c = [rng.randrange(m) * self.p ** max(scale, 0) for _ in range(self.dim)]
        return Elem.make(self, c, max(-scale, 0), prec)

    def is_sublevel_of(self, other: "Level") -> bool:
        lvl = other
        while lvl is not None:
            if lvl is self:
                return True
            lvl = lvl.base
        return False

    def chain(self) -> list["Level"]:
        out, lvl = [], self
        while lvl is not None:
            out.append(lvl)
            lvl = lvl.base
        return out[::-1]


class UnramifiedField(Level):
    """The unramified extension K of Q_p of degree d."""

    depth = 0
    base = None

    def __init__(self, p: int, d: int, prec: int, modulus: Sequence[int] | None = None):
        if not is_odd_prime(p):
            raise ValueError(f"p must be an odd prime, got {p}")
        if d < 1:
            raise ValueError("degree must be >= 1")
        self.p, self.d, self.prec = p, d, prec
        self.dim, self.e = d, 1
        self.q = p**d
        self.name = "K"
        if modulus is None:
            modulus = lowest_irreducible(p, d)
        modulus = list(modulus)
        if len(modulus) != d + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree d")
        if d > 1 and not is_irreducible_mod_p(modulus, p):
            raise ReducibleModulus(f"{modulus} is reducible mod {p}")
        self.modulus = modulus

    def __repr__(self) -> str:
        return f"UnramifiedField(p={self.p}, d={self.d}, prec={self.prec}, modulus={self.modulus})"

    def raw_mul(self, a, b, mod):
        d = self.d
        if d == 1:
            return [a[0] * b[0] % mod]
        r = _kmul_unreduced(a, b, d, self.modulus)
        return [x % mod for x in r]

    def level_valuation(self, c, s):
        vs = [vp_int(x, self.p) for x in c if x]
        return min(vs) - s if vs else None

    @cached_property
    def theta(self) -> "Elem":
        """The modulus root t."""
        if self.d == 1:
            return self.zero()
        return self.from_coords([0, 1] + [0] * (self.d - 2))

    def residue_inverse_coords(self, c: list[int]) -> list[int]:
        """Coordinates of the inverse mod p of a K-unit (Fermat in F_q)."""
        p = self.p
        base = [x % p for x in c]
        result = [1] + [0] * (self.d - 1)
        n = self.q - 2
        while n:
            if n & 1:
                result = self.raw_mul(result, base, p)
            base = self.raw_mul(base, base, p)
            n >>= 1
        return result

    def teichmuller(self, residue: Sequence[int], prec: int | None = None) -> "Elem":
        """Teichmüller lift of a nonzero residue given by t-coordinates mod p."""
        prec = self.prec if prec is None else prec
        if all(r % self.p == 0 for r in residue):
            raise ValueError("residue must be nonzero")
        z = self.from_coords([r % self.p for r in residue], prec)
        while True:
            nz = z ** self.q
            if nz.c == z.c:
                return nz
            z = nz

    def teichmuller_group(self, prec: int | None = None) -> list["Elem"]:
        """All (q-1)-th roots of unity, ordered by residue."""
        out = []
        for res in itertools.product(range(self.p), repeat=self.d):
            if any(res):
                out.append(self.teichmuller(list(res), prec))
        return out

    def _frobenius_root(self, k: int) -> "Elem":
        k %= self.d
        cache = self.__dict__.setdefault("_frob_roots", {})
        if k not in cache:
            # Hensel-lift the root of the modulus congruent to t^(p^k).
            z = (self.theta ** (self.p**k)).with_prec(1).with_prec(self.prec)
            m = self.modulus
            for _ in range(64):
                val = sum((z**i * m[i] for i in range(1, len(m))), self.from_int(m[0]))
                der = sum((z ** (i - 1) * (i * m[i]) for i in range(1, len(m))), self.zero())
                if val.is_zero():
                    break
                z = z - val / der
            cache[k] = z
        return cache[k]

    def frobenius(self, z: "Elem", k: int = 1) -> "Elem":
        """The automorphism of K reducing to x -> x^(p^k)."""
        if z.F is not self:
            raise ValueError("frobenius expects a K element")
        if self.d == 1 or k % self.d == 0:
            return z
        root = self._frobenius_root(k)
        acc = self.zero(z.prec)
        power = self.one(z.prec)
        for i in range(self.d):
            coeff = Elem.make(self, [z.c[i]] + [0] * (self.d - 1), z.s, z.prec)
            acc = acc + coeff * power
            power = power * root
        return acc


def _kmul_unreduced(a, b, d, modulus):
    r = [0] * (2 * d - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    r[i + j] += ai * bj
    for k in range(2 * d - 2, d - 1, -1):
        c = r[k]
        if c:
            for i in range(d):
                r[k - d + i] -= c * modulus[i]
    return r[:d]


class KPrimeField(Level):
    """K' = K[gamma]/(gamma^(p-1) + p)."""

    depth = 1

    def __init__(self, K: UnramifiedField):
        self.base = self.K = K
        self.p, self.d, self.prec = K.p, K.d, K.prec
        self.n = K.p - 1
        self.dim = self.n * K.d
        self.e = K.p - 1
        self.name = "K'"

    def __repr__(self) -> str:
        return f"KPrimeField({self.K!r})"

    def raw_mul(self, a, b, mod):
        r = self._mul_unreduced(a, b)
        return [x % mod for x in r]

    def _mul_unreduced(self, a, b):
        n, d, p = self.n, self.d, self.p
        if d == 1:
            r = [0] * (2 * n - 1)
            for i, ai in enumerate(a):
                if ai:
                    for j, bj in enumerate(b):
                        if bj:
                            r[i + j] += ai * bj
            for k in range(2 * n - 2, n - 1, -1):
                if r[k]:
                    r[k - n] -= p * r[k]
            return r[:n]
        mod_poly = self.K.modulus
        chunks_a = [a[i * d:(i + 1) * d] for i in range(n)]
        chunks_b = [b[j * d:(j + 1) * d] for j in range(n)]
        nz_b = [(j, cb) for j, cb in enumerate(chunks_b) if any(cb)]
        r = [[0] * d for _ in range(2 * n - 1)]
        for i, ca in enumerate(chunks_a):
            if not any(ca):
                continue
            for j, cb in nz_b:
                prod = _kmul_unreduced(ca, cb, d, mod_poly)
                acc = r[i + j]
                for k in range(d):
                    acc[k] += prod[k]
        for k in range(2 * n - 2, n - 1, -1):
            hi, lo = r[k], r[k - n]
            for t in range(d):
                lo[t] -= p * hi[t]
        return [x for chunk in r[:n] for x in chunk]

    def level_valuation(self, c, s):
        d, p = self.d, self.p
        best = None
        for j in range(self.n):
            chunk = [x for x in c[j * d:(j + 1) * d] if x]
            if chunk:
                v = (p - 1) * (min(vp_int(x, p) for x in chunk) - s) + j
                best = v if best is None else min(best, v)
        return best

    @cached_property
    def gamma(self) -> "Elem":
        c = [0] * self.dim
        if self.n > 1:
            c[self.d] = 1
        else:
            raise ValueError("p = 2 is not supported")
        return Elem(self, c, 0, self.prec)

    def times_gamma_power(self, z: "Elem", k: int) -> "Elem":
        """Exact multiplication by gamma^k (k may be negative)."""
        z = self.embed(z)
        n, d = self.n, self.d
        m, r = divmod(k, n)
        c = z.c
        if r:
            chunks = [c[j * d:(j + 1) * d] for j in range(n)]
            out = [None] * n
            for j in range(n):
                tgt = j + r
                if tgt < n:
                    out[tgt] = chunks[j]
                else:
                    out[tgt - n] = [-self.p * x for x in chunks[j]]
            c = [x for chunk in out for x in chunk]
        w = Elem.make(self, list(c), z.s, z.prec)
        if m:
            w = w.scale_p(m)
            if m % 2:
                w = -w
        return w

    def frobenius(self, z: "Elem", k: int = 1) -> "Elem":
        """Frobenius of K applied coefficientwise; fixes gamma."""
        z = self.embed(z)
        d = self.d
        acc = self.zero(z.prec)
        for j in range(self.n):
            chunk = Elem.make(self.K, z.c[j * d:(j + 1) * d], z.s, z.prec)
            if chunk.c == [0] * d:
                continue
            acc = acc + self.times_gamma_power(self.embed(self.K.frobenius(chunk, k)), j)
        return acc


class KummerField(Level):
    """L = K'[y]/(y^p - x)."""

    depth = 2

    def __init__(self, Kp: KPrimeField, x: "Elem"):
        if x.F is not Kp:
            raise ValueError("x must be a K' element")
        dv = (x - 1).valuation()
        if dv != 1:
            raise NotAUniformizerSeed(f"v_K'(x - 1) = {dv}, expected 1")
        self.base = self.Kp = Kp
        self.K = Kp.K
        self.p, self.d = Kp.p, Kp.d
        self.prec = x.prec
        self.x = x
        self.blk = Kp.dim
        self.dim = self.p * Kp.dim
        self.e = self.p * (self.p - 1)
        self.name = "L"
        if x.s:
            raise ValueError("x must be integral")
        self._x_c = x.c

    def __repr__(self) -> str:
        return f"KummerField(p={self.p}, d={self.d}, prec={self.prec})"

    def raw_mul(self, a, b, mod):
        p, blk = self.p, self.blk
        kp = self.Kp
        ca = [a[i * blk:(i + 1) * blk] for i in range(p)]
        cb = [b[i * blk:(i + 1) * blk] for i in range(p)]
        nz_a = [(i, c) for i, c in enumerate(ca) if any(c)]
        nz_b = [(j, c) for j, c in enumerate(cb) if any(c)]
        r = [None] * (2 * p - 1)
        for i, x in nz_a:
            for j, y in nz_b:
                prod = kp.raw_mul(x, y, mod)
                if r[i + j] is None:
                    r[i + j] = prod
                else:
                    acc = r[i + j]
                    for t in range(blk):
                        acc[t] += prod[t]
        for k in range(2 * p - 2, p - 1, -1):
            if r[k] is None:
                continue
            hi = kp.raw_mul(r[k], self._x_c, mod)
            if r[k - p] is None:
                r[k - p] = hi
            else:
                lo = r[k - p]
                for t in range(blk):
                    lo[t] += hi[t]
        out = []
        zero = [0] * blk
        for k in range(p):
            out.extend(x % mod for x in (r[k] if r[k] is not None else zero))
        return out

    def w_basis(self, c: list[int]) -> list[list[int]]:
        """K'-coordinates (as flat int blocks) over powers of w = y - 1."""
        p, blk = self.p, self.blk
        z = [c[i * blk:(i + 1) * blk] for i in range(p)]
        out = []
        for k in range(p):
            acc = [0] * blk
            for i in range(k, p):
                b = comb(i, k)
                zi = z[i]
                for t in range(blk):
                    acc[t] += b * zi[t]
            out.append(acc)
        return out

    def level_valuation(self, c, s):
        best = None
        for k, chunk in enumerate(self.w_basis(c)):
            v = self.Kp.level_valuation(chunk, s)
            if v is not None:
                v = self.p * v + k
                best = v if best is None else min(best, v)
        return best

    @cached_property
    def y(self) -> "Elem":
        c = [0] * self.dim
        c[self.blk] = 1
        return Elem(self, c, 0, self.prec)

    @cached_property
    def w(self) -> "Elem":
        return self.y - 1

    def y_power(self, i: int) -> "Elem":
        """y^i for 0 <= i < p as a basis vector."""
        c = [0] * self.dim
        c[i * self.blk] = 1
        return Elem(self, c, 0, self.prec)

    def y_coefficient(self, z: "Elem", i: int) -> "Elem":
        """The K'-coefficient of y^i."""
        z = self.embed(z)
        blk = self.blk
        return Elem.make(self.Kp, z.c[i * blk:(i + 1) * blk], z.s, z.prec)

    def from_y_coefficients(self, coeffs: Sequence["Elem"]) -> "Elem":
        """Assemble sum_i coeffs[i] * y^i from K' elements."""
        acc = self.zero(min(c.prec for c in coeffs))
        for i, ci in enumerate(coeffs):
            ci = self.Kp.embed(ci)
            if any(ci.c):
                c = [0] * self.dim
                c[i * self.blk:(i + 1) * self.blk] = ci.c
                acc = acc + Elem(self, c, ci.s, ci.prec)
        return acc


# ---------------------------------------------------------------------------
# elements

def _common(a: "Elem", b: "Elem") -> tuple["Elem", "Elem"]:
    if a.F is b.F:
        return a, b
    if a.F.is_sublevel_of(b.F):
        return b.F.embed(a), b
    if b.F.is_sublevel_of(a.F):
        return a, a.F.embed(b)
    raise ValueError(f"incompatible levels {a.F.name} and {b.F.name}")


class Elem:
    """A tower element in fixed point: coordinates ``c / p^s`` mod ``p^prec``."""

    __slots__ = ("F", "c", "s", "prec", "_vmin")

    def __init__(self, F: Level, c: list[int], s: int, prec: int):
        self.F, self.c, self.s, self.prec = F, c, s, prec
        self._vmin = None

    @classmethod
    def make(cls, F: Level, c: list[int], s: int, prec: int) -> "Elem":
        p = F.p
        if prec + s <= 0:
            return cls(F, [0] * F.dim, 0, prec)
        mod = p ** (prec + s)
        c = [x % mod for x in c]
        while s > 0 and all(x % p == 0 for x in c):
            if not any(c):
                s = 0
                break
            c = [x // p for x in c]
            s -= 1
        return cls(F, c, s, prec)

    # -- queries ----------------------------------------------------------

    @property
    def p(self) -> int:
        return self.F.p

    def is_zero(self) -> bool:
        return not any(self.c)

    @property
    def vmin(self) -> int:
        """Largest k with self in p^k * (integers), capped at prec."""
        if self._vmin is None:
            nz = [vp_int(x, self.F.p) for x in self.c if x]
            self._vmin = min(min(nz) - self.s, self.prec) if nz else self.prec
        return self._vmin

    def valuation(self) -> int:
        """Normalized valuation at this element's level (uniformizer -> 1)."""
        v = self.F.level_valuation(self.c, self.s)
        if v is None or v >= self.F.e * self.prec:
            raise PrecisionExhausted(
                f"{self.F.name} element is zero to precision {self.prec}"
            )
        return v

    def valuation_or_bound(self) -> int:
        """Valuation, or the lower bound ``e * prec`` when zero to precision."""
        try:
            return self.valuation()
        except PrecisionExhausted:
            return self.F.e * self.prec

    def residual(self) -> int:
        """p-adic valuation floor of this element treated as an error term."""
        return self.vmin

    def coordinate(self, i: int) -> PadicScalar:
        return PadicScalar.from_parts(self.F.p, self.prec, -self.s, self.c[i])

    def coordinates(self) -> list[PadicScalar]:
        return [self.coordinate(i) for i in range(self.F.dim)]

    def equals(self, other) -> bool:
        return (self - other).is_zero()

    # -- precision --------------------------------------------------------

    def with_prec(self, prec: int) -> "Elem":
        """Same representative at a different nominal precision."""
        return Elem.make(self.F, list(self.c), self.s, prec)

    def lower_prec(self, prec: int) -> "Elem":
        return self if prec >= self.prec else self.with_prec(prec)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "Elem":
        if isinstance(other, Elem):
            return other
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            v = 0 if q == 0 else vp_int(q.numerator, self.F.p) - vp_int(q.denominator, self.F.p)
            prec = abs(self.prec) + abs(self.vmin) + 2 * abs(v) + 1
            return self.F.one(prec) * q if q else self.F.zero(prec)
        if isinstance(other, PadicScalar):
            return scalar_elem(self.F, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = _common(self, other)
        p = a.F.p
        s = max(a.s, b.s)
        fa, fb = p ** (s - a.s), p ** (s - b.s)
        c = [x * fa + y * fb for x, y in zip(a.c, b.c)]
        return Elem.make(a.F, c, s, min(a.prec, b.prec))

    __radd__ = __add__

    def __neg__(self):
        return Elem.make(self.F, [-x for x in self.c], self.s, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._mul_rational(Fraction(other))
        if isinstance(other, PadicScalar):
            return self._mul_padic(other)
        if not isinstance(other, Elem):
            return NotImplemented
        a, b = self, other
        if a.F is not b.F:
            if a.F.is_sublevel_of(b.F):
                a, b = b, a
            if b.F.is_sublevel_of(a.F) and b.F.depth < a.F.depth:
                return _mul_by_lower(a, b)
            a, b = _common(a, b)
        prec = min(a.prec + b.vmin, b.prec + a.vmin)
        s = a.s + b.s
        if prec + s <= 0:
            return a.F.zero(prec)
        c = a.F.raw_mul(a.c, b.c, a.F.p ** (prec + s))
        return Elem.make(a.F, c, s, prec)

    __rmul__ = __mul__

    def _mul_rational(self, q: Fraction) -> "Elem":
        p = self.F.p
        if q == 0:
            return self.F.zero(self.prec)
        num, den = q.numerator, q.denominator
        vn, vd = vp_int(num, p), vp_int(den, p)
        num //= p**vn
        den //= p**vd
        mod = p ** max(self.prec + self.s, 1)
        u = num * pow(den, -1, mod)
        z = Elem.make(self.F, [x * u for x in self.c], self.s, self.prec)
        return z.scale_p(vn - vd)

    def _mul_padic(self, a: PadicScalar) -> "Elem":
        if a.prime != self.F.p:
            raise ValueError("prime mismatch")
        return self * scalar_elem(self.F, a)

    def scale_p(self, k: int) -> "Elem":
        """Exact multiplication by p^k."""
        if k == 0:
            return self
        p = self.F.p
        if k > 0:
            if self.s >= k:
                return Elem.make(self.F, list(self.c), self.s - k, self.prec + k)
            f = p ** (k - self.s)
            return Elem.make(self.F, [x * f for x in self.c], 0, self.prec + k)
        return Elem.make(self.F, list(self.c), self.s - k, self.prec + k)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._mul_rational(1 / Fraction(other))
        if isinstance(other, PadicScalar):
            return self * scalar_elem(self.F, other).inverse()
        if not isinstance(other, Elem):
            return NotImplemented
        return self * divide_inverse(other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, n: int) -> "Elem":
        if n < 0:
            return self.inverse() ** (-n)
        result = self.F.one(self.prec)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self) -> "Elem":
        """Inverse of a unit at any level (Newton iteration)."""
        F = self.F
        if self.valuation_or_bound() != 0:
            raise NotAUnit(f"{F.name} element of valuation != 0 has no unit inverse")
        if isinstance(F, UnramifiedField):
            # a unit always has shift 0
            b = Elem.make(F, F.residue_inverse_coords(self.c), 0, self.prec)
        elif isinstance(F, KPrimeField):
            c0 = Elem.make(F.K, self.c[:F.d], self.s, self.prec)
            b = F.embed(c0.inverse())
        else:
            total = [0] * F.blk
            for i in range(F.p):
                for t, x in enumerate(self.c[i * F.blk:(i + 1) * F.blk]):
                    total[t] += x
            b = F.embed(Elem.make(F.Kp, total, self.s, self.prec).inverse())
        b = b.with_prec(self.prec)
        for _ in range(128):
            err = 1 - self * b
            if err.is_zero():
                return b.with_prec(self.prec)
            b = b + b * err
        raise PrecisionExhausted("Newton inversion did not converge")

    def __repr__(self) -> str:
        return f"Elem({self.F.name}, c={self.c}, s={self.s}, prec={self.prec})"


def _mul_by_lower(a: Elem, b: Elem) -> Elem:
    """Multiply a higher-level element by a lower-level one, blockwise."""
    prec = min(a.prec + b.vmin, b.prec + a.vmin)
    s = a.s + b.s
    F = a.F
    if prec + s <= 0:
        return F.zero(prec)
    mod = F.p ** (prec + s)
    blk = b.F.dim
    sub = b.F
    c = []
    zero = [0] * blk
    for i in range(F.dim // blk):
        chunk = a.c[i * blk:(i + 1) * blk]
        c.extend(sub.raw_mul(chunk, b.c, mod) if any(chunk) else zero)
    return Elem.make(F, c, s, prec)


def scalar_elem(F: Level, a: PadicScalar) -> Elem:
    """Embed a Q_p scalar at level F."""
    if a.valuation is None:
        return F.zero(a.abs_precision)
    c = [0] * F.dim
    c[0] = a.unit_digits
    return Elem.make(F, c, 0, a.abs_precision - a.valuation).scale_p(a.valuation)


def divide_inverse(b: Elem) -> Elem:
    """1/b at levels K and K'; at L only units are invertible."""
    F = b.F
    if isinstance(F, UnramifiedField):
        v = b.valuation()
        return b.scale_p(-v).inverse().scale_p(-v)
    if isinstance(F, KPrimeField):
        v = b.valuation()
        unit = F.times_gamma_power(b, -v)
        return F.times_gamma_power(unit.inverse(), -v)
    return b.inverse()


# ---------------------------------------------------------------------------
# tower construction

def build_unramified(p: int, d: int, prec: int, modulus: Sequence[int] | None = None) -> UnramifiedField:
    return UnramifiedField(p, d, prec, modulus)


def teich_basis(K: UnramifiedField, prec: int | None = None) -> list[Elem]:
    """Teichmüller lifts a_0 = 1, a_i ~ t^i of the residue power basis."""
    out = []
    for i in range(K.d):
        res = [0] * K.d
        res[i] = 1
        out.append(K.teichmuller(res, prec))
    return out


def build_kprime(K: UnramifiedField) -> KPrimeField:
    return KPrimeField(K)


def build_L(Kp: KPrimeField, x: Elem) -> KummerField:
    return KummerField(Kp, x)


def valuation_tower(z: Elem) -> int:
    return z.valuation()


# ---------------------------------------------------------------------------
# traces and norms via multiplication matrices

def _basis_over(F: Level, S: Level) -> int:
    if not S.is_sublevel_of(F):
        raise ValueError(f"{S.name} is not below {F.name}")
    return F.dim // S.dim


def _chunk(F: Level, S: Level, z: Elem, k: int) -> Elem:
    blk = S.dim
    return Elem.make(S, z.c[k * blk:(k + 1) * blk], z.s, z.prec)


def _basis_elem(F: Level, S: Level, k: int) -> Elem:
    c = [0] * F.dim
    c[k * S.dim] = 1
    return Elem(F, c, 0, F.prec + 64)


def multiplication_matrix(z: Elem, S: Level) -> list[list[Elem]]:
    """Matrix over S of multiplication by z; column l = coordinates of z*b_l."""
    F = z.F
    n = _basis_over(F, S)
    cols = [z * _basis_elem(F, S, l) for l in range(n)]
    return [[_chunk(F, S, cols[l], k) for l in range(n)] for k in range(n)]


def trace_vector(F: Level, S: Level) -> list[Elem]:
    """Tr_{F/S} of each basis element, read off multiplication matrices."""
    cache = F.__dict__.setdefault("_trace_vectors", {})
    if S.name not in cache:
        n = _basis_over(F, S)
        vec = []
        for k in range(n):
            bk = _basis_elem(F, S, k)
            tr = S.zero(F.prec + 64)
            for l in range(n):
                tr = tr + _chunk(F, S, bk * _basis_elem(F, S, l), l)
            vec.append(tr)
        cache[S.name] = vec
    return cache[S.name]


def trace_by_matrix(z: Elem, S: Level) -> Elem:
    """Trace of multiplication-by-z as an S-linear map."""
    F = z.F
    if S is F:
        return z
    vec = trace_vector(F, S)
    acc = S.zero(z.prec)
    for k, tk in enumerate(vec):
        zk = _chunk(F, S, z, k)
        if any(zk.c):
            acc = acc + zk * tk
    return acc


def determinant(matrix: list[list[Elem]]) -> Elem:
    """Determinant over K or K' by elimination with minimal-valuation pivots."""
    n = len(matrix)
    A = [list(row) for row in matrix]
    S = A[0][0].F
    det = S.one(min(x.prec for row in A for x in row) + 64)
    for col in range(n):
        best, best_v = None, None
        for r in range(col, n):
            v = A[r][col].valuation_or_bound()
            if A[r][col].is_zero():
                continue
            if best_v is None or v < best_v:
                best, best_v = r, v
        if best is None:
            return S.zero(min(x.prec for row in A for x in row))
        if best != col:
            A[col], A[best] = A[best], A[col]
            det = -det
        piv = A[col][col]
        det = det * piv
        inv = divide_inverse(piv)
        for r in range(col + 1, n):
            if A[r][col].is_zero():
                continue
            f = A[r][col] * inv
            A[r] = [A[r][k] - f * A[col][k] if k > col else A[r][k] for k in range(n)]
    return det


def norm_by_matrix(z: Elem, S: Level) -> Elem:
    if S is z.F:
        return z
    return determinant(multiplication_matrix(z, S))


# ---------------------------------------------------------------------------
# one-unit powers with p-adic integer exponents

def _one_unit_bound(F: Level, i0: int, steps: int) -> int:
    i = i0
    for _ in range(steps):
        i = min(F.p * i, i + F.e)
    return i


def one_unit_power(u: Elem, z: PadicScalar | int) -> Elem:
    """u^z for a one-unit u and a p-adic integer z."""
    F = u.F
    try:
        i0 = (u - 1).valuation()
    except PrecisionExhausted:
        i0 = F.e * u.prec
    if i0 < 1:
        raise NotOneUnit(f"v(u - 1) = {i0} < 1")
    if isinstance(z, int):
        return u**z if z >= 0 else (u ** (-z)).inverse()
    if z.prime != F.p:
        raise ValueError("prime mismatch")
    if z.valuation is not None and z.valuation < 0:
        raise ExponentNotIntegral(f"v(z) = {z.valuation} < 0")
    M = z.abs_precision
    n = z.to_int()
    bound = _one_unit_bound(F, i0, M) // F.e
    return (u**n).lower_prec(bound)


# ---------------------------------------------------------------------------
# serialization

def to_nested(z: Elem):
    """Nested coefficient arrays; innermost entries are Q_p digit strings."""
    F = z.F
    flat = [to_text(c) for c in z.coordinates()]
    d = F.d
    k_chunks = [flat[i * d:(i + 1) * d] for i in range(F.dim // d)]
    if isinstance(F, UnramifiedField):
        return k_chunks[0]
    n = F.p - 1
    kp_chunks = [k_chunks[j * n:(j + 1) * n] for j in range(len(k_chunks) // n)]
    if isinstance(F, KPrimeField):
        return kp_chunks[0]
    return kp_chunks


def from_nested(F: Level, data) -> Elem:
    def flatten(x):
        if isinstance(x, str):
            return [x]
        return [s for item in x for s in flatten(item)]

    scalars = [parse_text(s) for s in flatten(data)]
    if len(scalars) != F.dim:
        raise ValueError(f"expected {F.dim} coefficients, got {len(scalars)}")
    precs = {a.abs_precision for a in scalars}
    if len(precs) != 1:
        raise ValueError("coefficients must share one precision")
    prec = precs.pop()
    vals = [a.valuation for a in scalars if a.valuation is not None]
    s = max(0, -min(vals)) if vals else 0
    c = [0 if a.valuation is None else a.unit_digits * F.p ** (a.valuation + s) for a in scalars]
    return Elem.make(F, c, s, prec)
