"""The Lubin-Tate formal group of ``f(X) = X^q + pX`` over Z_p.

Bivariate series are truncated at total degree ``D`` and stored as
triangular tables ``c[i][j]`` (coefficient of ``X^i Y^j``) of integers modulo
``p^prec``.  Products use Kronecker substitution into Python ints, which keeps
the q = 25 case well under a second.

The group law is built degree by degree.  If ``F`` is correct below degree
``i`` and ``E`` is the degree-``i`` part of ``f(F(X,Y)) - F(f(X), f(Y))``,
then adding ``H = -E / (p - p^i)`` makes it correct in degree ``i``: the
linear term ``pX`` of ``f`` contributes ``pH`` on the left and ``p^i H`` on
the right.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .errors import AxiomViolation, PrecisionExhausted, UnexpectedValuation
from .fields import Elem, UnramifiedField
from .padic import vp_int
from .series import TruncSeries

Table = list  # list[list[int]], triangular


# ---------------------------------------------------------------------------
# Kronecker-packed bivariate arithmetic

def _zero_table(D: int) -> Table:
    return [[0] * (D + 1 - i) for i in range(D + 1)]


def _slot_bytes(D: int, mod: int) -> int:
    bits = 2 * mod.bit_length() + (D + 1).bit_length() * 2 + 2
    return (bits + 7) // 8


def _pack(A: Table, D: int, width: int) -> int:
    stride = 2 * D + 1
    buf = bytearray(width * stride * (D + 1))
    for i, row in enumerate(A):
        base = i * stride
        for j, c in enumerate(row):
            if c:
                off = (base + j) * width
                buf[off:off + width] = c.to_bytes(width, "little")
    return int.from_bytes(buf, "little")


def _unpack(n: int, D: int, width: int, mod: int) -> Table:
    stride = 2 * D + 1
    nbytes = width * stride * (2 * D + 1)
    raw = n.to_bytes(max(nbytes, (n.bit_length() + 7) // 8), "little")
    out = _zero_table(D)
    for i in range(D + 1):
        base = i * stride
        row = out[i]
        for j in range(D + 1 - i):
            off = (base + j) * width
            row[j] = int.from_bytes(raw[off:off + width], "little") % mod
    return out


def bmul(A: Table, B: Table, D: int, mod: int) -> Table:
    """Product of two bivariate tables modulo total degree D+1 and ``mod``."""
    width = _slot_bytes(D, mod)
    return _unpack(_pack(A, D, width) * _pack(B, D, width), D, width, mod)


def badd(A: Table, B: Table, mod: int) -> Table:
    return [[(a + b) % mod for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def bscale(A: Table, c: int, mod: int) -> Table:
    return [[a * c % mod for a in row] for row in A]


def bpow(A: Table, n: int, D: int, mod: int) -> Table:
    result = _zero_table(D)
    result[0][0] = 1
    base = A
    while n:
        if n & 1:
            result = bmul(result, base, D, mod)
        n >>= 1
        if n:
            base = bmul(base, base, D, mod)
    return result


def umul(a: list[int], b: list[int], D: int, mod: int) -> list[int]:
    out = [0] * (D + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(D + 1 - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return [v % mod for v in out]


def base_poly(p: int, d: int) -> dict[int, int]:
    """``f(X) = X^q + pX`` as ``{degree: coefficient}``."""
    q = p**d
    return {1: p, q: 1}


def _f_univariate(p: int, q: int, D: int) -> list[int]:
    f = [0] * (D + 1)
    f[1] = p
    if q <= D:
        f[q] += 1
    return f


def _f_of(A: Table, p: int, q: int, D: int, mod: int) -> Table:
    """f applied to a bivariate series without constant term."""
    out = bscale(A, p, mod)
    if q <= D:
        out = badd(out, bpow(A, q, D, mod), mod)
    return out


def _compose_fx_fy(C: Table, p: int, q: int, D: int, mod: int) -> Table:
    """``C(f(X), f(Y))`` modulo total degree D+1."""
    f = _f_univariate(p, q, D)
    powers = [[1] + [0] * D]
    for _ in range(D):
        powers.append(umul(powers[-1], f, D, mod))
    out = _zero_table(D)
    for a in range(D + 1):
        Q = [0] * (D + 1)
        for b in range(D + 1 - a):
            c = C[a][b]
            if c:
                pb = powers[b]
                for j in range(D + 1):
                    if pb[j]:
                        Q[j] += c * pb[j]
        if not any(Q):
            continue
        pa = powers[a]
        for i, x in enumerate(pa):
            if x:
                row = out[i]
                for j in range(D + 1 - i):
                    if Q[j]:
                        row[j] = (row[j] + x * Q[j]) % mod
    return out


# ---------------------------------------------------------------------------
# the formal group law

@dataclass
class FormalGroupLaw:
    p: int
    d: int
    D: int
    prec: int
    coeffs: Table
    axioms: dict = field(default_factory=dict)

    @property
    def q(self) -> int:
        return self.p**self.d

    @property
    def mod(self) -> int:
        return self.p**self.prec

    def coefficient(self, i: int, j: int) -> int:
        return self.coeffs[i][j] if i + j <= self.D else 0

    def nonzero_terms(self) -> list[tuple[int, int, int]]:
        return [(i, j, c) for i, row in enumerate(self.coeffs) for j, c in enumerate(row) if c]

    def closed_form_residual(self) -> int:
        """Digits of agreement with the closed form modulo degree q+1."""
        p, q, mod = self.p, self.q, self.mod
        expected = _zero_table(self.D)
        expected[1][0] = expected[0][1] = 1
        denom = Fraction(p * (1 - p ** (q - 1)))
        if q <= self.D:
            for i in range(1, q):
                val = Fraction(-comb(q, i)) / denom
                expected[i][q - i] = val.numerator * pow(val.denominator, -1, mod) % mod
        worst = self.prec
        for i in range(self.D + 1):
            for j in range(self.D + 1 - i):
                if i + j > q:
                    continue
                diff = (self.coeffs[i][j] - expected[i][j]) % mod
                if diff:
                    worst = min(worst, vp_int(diff, p))
        return worst

    def check_axioms(self) -> dict:
        """Unit, commutativity, associativity and f-endomorphism at degree D."""
        p, q, D, mod = self.p, self.q, self.D, self.mod
        C = self.coeffs
        res = {}
        res["unit"] = all(C[i][0] == (1 if i == 1 else 0) for i in range(D + 1)) and all(
            C[0][j] == (1 if j == 1 else 0) for j in range(D + 1)
        )
        res["commutative"] = all(C[i][j] == C[j][i] for i in range(D + 1) for j in range(D + 1 - i))
        res["associative"] = self._associativity_residual() >= self.prec
        lhs = _f_of(C, p, q, D, mod)
        rhs = _compose_fx_fy(C, p, q, D, mod)
        res["endomorphism"] = lhs == rhs
        self.axioms = res
        return res

    def _associativity_residual(self) -> int:
        D, mod, p = self.D, self.mod, self.p
        C = self.coeffs
        powers = [None] * (D + 1)
        powers[0] = _zero_table(D)
        powers[0][0][0] = 1
        for a in range(1, D + 1):
            powers[a] = bmul(powers[a - 1], C, D, mod)
        left: dict = {}
        right: dict = {}
        for a, b, c in self.nonzero_terms():
            # F(F(X,Y), Z): G^a Z^b with G = F(X,Y)
            for i, row in enumerate(powers[a]):
                for j, g in enumerate(row):
                    if g and i + j + b <= D:
                        key = (i, j, b)
                        left[key] = (left.get(key, 0) + c * g) % mod
            # F(X, F(Y,Z)): X^a H^b with H = F(Y,Z)
            for j, row in enumerate(powers[b]):
                for k, h in enumerate(row):
                    if h and a + j + k <= D:
                        key = (a, j, k)
                        right[key] = (right.get(key, 0) + c * h) % mod
        worst = self.prec
        for key in set(left) | set(right):
            diff = (left.get(key, 0) - right.get(key, 0)) % mod
            if diff:
                worst = min(worst, vp_int(diff, p))
        return worst


def formal_group(p: int, d: int, D: int, prec: int, verify: bool = True) -> FormalGroupLaw:
    """Build F_f modulo total degree D+1 with coefficients mod p^prec.

    Each nonzero correction divides by ``p(1 - p^(i-1))`` and costs one digit;
    the returned ``prec`` accounts for that.
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    q = p**d
    N = prec
    C = _zero_table(D)
    C[1][0] = C[0][1] = 1
    for i in range(2, D + 1):
        mod = p**N
        lhs = _f_of(C, p, q, D, mod)
        rhs = _compose_fx_fy(C, p, q, D, mod)
        E = [(lhs[a][i - a] - rhs[a][i - a]) % mod for a in range(i + 1)]
        if not any(E):
            continue
        if any(e % p for e in E):
            raise AxiomViolation(f"degree-{i} error is not divisible by p")
        N -= 1
        if N <= 0:
            raise PrecisionExhausted("formal group iteration ran out of digits")
        mod = p**N
        inv = pow(1 - p ** (i - 1), -1, mod)
        for a in range(i + 1):
            C[a][i - a] = (C[a][i - a] - (E[a] // p) * inv) % mod
        C = [[c % mod for c in row] for row in C]
    F = FormalGroupLaw(p, d, D, N, C)
    if verify:
        ax = F.check_axioms()
        bad = [k for k, v in ax.items() if not v]
        if bad:
            raise AxiomViolation(f"axioms failed at degree {D}: {bad}")
    return F


# ---------------------------------------------------------------------------
# univariate series over K: isogenies and conjugates

@dataclass
class IsogenySeries:
    a: Elem
    series: TruncSeries
    D: int

    def coefficient(self, n: int) -> Elem:
        return self.series[n]


def _f_series(K: UnramifiedField, D: int, prec: int) -> TruncSeries:
    q = K.p**K.d
    c = [K.zero(prec) for _ in range(D + 1)]
    c[1] = K.from_int(K.p, prec)
    if q <= D:
        c[q] = c[q] + K.one(prec)
    return TruncSeries(K, tuple(c))


def _apply_f(g: TruncSeries) -> TruncSeries:
    K = g.ring
    q = K.p**K.d
    out = g * K.p
    if q <= g.T:
        n, acc = q, None
        base = g
        while n:
            if n & 1:
                acc = base if acc is None else acc * base
            n >>= 1
            if n:
                base = base * base
        out = out + acc
    return out


def isogeny(a: Elem, D: int) -> IsogenySeries:
    """``[a]_f`` modulo degree D+1, by the same degree-by-degree correction."""
    K = a.F
    if not isinstance(K, UnramifiedField):
        raise ValueError("isogeny scalars live in K")
    p = K.p
    prec = a.prec
    f = _f_series(K, D, prec)
    coeffs = [K.zero(prec) for _ in range(D + 1)]
    coeffs[1] = a
    g = TruncSeries(K, tuple(coeffs))
    for i in range(2, D + 1):
        lhs = _apply_f(g)
        rhs = g.compose(f)
        E = lhs[i] - rhs[i]
        if E.is_zero():
            continue
        h = -E / (p - p**i)
        c = list(g.coeffs)
        c[i] = c[i] + h
        g = TruncSeries(K, tuple(c))
    return IsogenySeries(a, g, D)


def apply_group_law(F: FormalGroupLaw, g: TruncSeries, h: TruncSeries) -> TruncSeries:
    """``F(g(X), h(X))`` for univariate series without constant term."""
    K = g.ring
    D = min(F.D, g.T, h.T)
    g, h = g.truncate(D), h.truncate(D)
    prec = min(g.min_prec(), h.min_prec(), F.prec)
    one = TruncSeries.monomial(K, K.one(prec), 0, D)
    gp, hp = [one], [one]
    for _ in range(D):
        gp.append(gp[-1] * g)
        hp.append(hp[-1] * h)
    acc = TruncSeries(K, tuple(K.zero(prec) for _ in range(D + 1)))
    for i, j, c in F.nonzero_terms():
        if i + j > D:
            continue
        acc = acc + (gp[i] * hp[j]) * K.from_int(c, F.prec)
    return acc


def conjugate_expansion(u: Elem | None, F: FormalGroupLaw, K: UnramifiedField, D: int | None = None) -> IsogenySeries:
    """``[1 + up]_f = F(u [p]_f(X), X)`` modulo degree D+1.

    ``[p]_f`` is f itself, so no iteration is needed here.
    """
    D = F.D if D is None else D
    prec = F.prec
    if u is None:
        u = K.zero(prec)
    ident = TruncSeries.monomial(K, K.one(prec), 1, D)
    up = _f_series(K, D, prec) * u
    series = apply_group_law(F, up, ident)
    return IsogenySeries(1 + u * K.p, series, D)


def conjugate_degree_q_expected(u: Elem, p: int, q: int) -> Elem:
    """The bracket ``u - sum (up)^(q-i) C(q,i) / (p(1 - p^(q-1)))``."""
    K = u.F
    s = K.zero(u.prec)
    up = u * p
    for i in range(1, q):
        s = s + up ** (q - i) * comb(q, i)
    return u - s / (p * (1 - p ** (q - 1)))


# ---------------------------------------------------------------------------
# ramification filtrations

@dataclass
class RamificationFiltration:
    """Lower-numbering orders ``orders[i] = |G_i|``; the last entry is 1."""

    orders: list[int]
    label: str = ""

    def __post_init__(self):
        if any(a < b for a, b in zip(self.orders, self.orders[1:])):
            raise ValueError("orders must be non-increasing")

    def order(self, i: int) -> int:
        if i < len(self.orders):
            return self.orders[i]
        return self.orders[-1] if self.orders else 1

    def phi(self, m: int) -> Fraction:
        """Herbrand's function at an integer m >= 0."""
        g0 = self.order(0)
        return Fraction(sum(self.order(i) for i in range(1, m + 1)), g0)

    def lower_breaks(self) -> list[int]:
        return [i for i in range(len(self.orders) - 1) if self.orders[i] != self.orders[i + 1]]

    def upper_breaks(self) -> list[Fraction]:
        return [self.phi(i) for i in self.lower_breaks()]

    def upper_equals_lower(self) -> bool:
        return all(Fraction(b) == u for b, u in zip(self.lower_breaks(), self.upper_breaks()))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "orders": self.orders,
            "lower_breaks": self.lower_breaks(),
            "upper_breaks": [str(u) for u in self.upper_breaks()],
        }


def different_from_filtration(filt: RamificationFiltration) -> int:
    """Hilbert's formula ``sum_i (|G_i| - 1)``."""
    return sum(o - 1 for o in filt.orders)


def herbrand_phi(filt: RamificationFiltration, m: int) -> Fraction:
    return filt.phi(m)


@dataclass
class BreakRecord:
    u_residue: tuple
    valuation: int
    linear_ok: bool
    degree_q_ok: bool


def ramification_breaks(F: FormalGroupLaw, K: UnramifiedField) -> tuple[RamificationFiltration, list[BreakRecord]]:
    """Lower filtration of Gal(K_{p,2}/K_{p,1}) read off the conjugate expansions.

    For ``s = [1 + up]`` and a prime element ``alpha`` of K_{p,2} (valuation
    1, ``e = q(q-1)`` over K), ``s(alpha)/alpha - 1`` is
    ``up + sum_{k>=2} b_k alpha^(k-1)``; the candidate valuations are
    pairwise distinct, so the minimum is exact.
    """
    p, q = F.p, F.q
    if F.D < q:
        raise ValueError("need the expansion through degree q")
    e = q * (q - 1)
    records = []
    for u in K.teichmuller_group(F.prec):
        conj = conjugate_expansion(u, F, K)
        s = conj.series
        cands = [e * (u * p).valuation()]
        for k in range(2, F.D + 1):
            bk = s[k]
            if not bk.is_zero():
                cands.append(e * bk.valuation() + (k - 1))
        val = min(cands)
        if val >= F.D:
            raise UnexpectedValuation("leading term of s(alpha)/alpha - 1 vanished")
        lin = (s[1] - (1 + u * p)).is_zero()
        deg_q = (s[q] - conjugate_degree_q_expected(u, p, q)).is_zero()
        records.append(BreakRecord(tuple(x % p for x in u.c), val, lin, deg_q))
    # lower index i(s) = v(s(alpha)/alpha - 1); identity has i = infinity
    top = max(r.valuation for r in records)
    orders = [1 + sum(1 for r in records if r.valuation >= i) for i in range(top + 2)]
    return RamificationFiltration(orders, "Gal(K_p2/K_p1)"), records


def single_jump_filtration(order: int, jump: int, label: str = "") -> RamificationFiltration:
    """``G_0 = ... = G_jump`` of the given order and trivial afterwards."""
    return RamificationFiltration([order] * (jump + 1) + [1], label)


def quotient_filtration(filt: RamificationFiltration, order: int, label: str = "") -> RamificationFiltration:
    """Filtration of a quotient of the given order of a single-jump group.

    Upper numbering passes to quotients; with one jump at upper index u the
    quotient's lower jump is also u.
    """
    ups = filt.upper_breaks()
    if len(ups) != 1 or ups[0].denominator != 1:
        raise ValueError("only single integral upper jumps are supported")
    g0 = filt.order(0)
    if g0 % order:
        raise ValueError("quotient order must divide |G_0|")
    return single_jump_filtration(order, int(ups[0]), label)
