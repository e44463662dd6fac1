"""Truncated power series over K or K', and Dwork's exponential.

The Dwork series ``E(X) = exp(gamma*X - gamma*X^p)`` has integral
coefficients, so it can be evaluated at any integral point.  No effective
bound on the coefficient valuations is assumed; instead the tail is certified
empirically by watching a window of the highest computed coefficients (see
:func:`dwork_eval`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    GuardExhausted,
    IntegralityViolation,
    PrecisionExhausted,
    TruncationTooShort,
    VerificationFailed,
)
from .fields import Elem, KPrimeField, Level, to_nested
from .padic import vp_factorial


@dataclass(frozen=True)
class TruncSeries:
    """``sum_{n <= T} coeffs[n] X^n`` over a tower level, exact mod X^(T+1).

    ``stride`` records a substitution ``X -> X^m`` so that tail certification
    can scale its window; it does not affect arithmetic.
    """

    ring: Level
    coeffs: tuple
    stride: int = 1

    @property
    def T(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def from_list(cls, ring: Level, coeffs: Sequence[Elem], stride: int = 1) -> "TruncSeries":
        return cls(ring, tuple(ring.embed(c) for c in coeffs), stride)

    @classmethod
    def monomial(cls, ring: Level, c: Elem, n: int, T: int) -> "TruncSeries":
        z = ring.zero(c.prec)
        return cls(ring, tuple(ring.embed(c) if k == n else z for k in range(T + 1)))

    def __getitem__(self, n: int) -> Elem:
        return self.coeffs[n]

    def truncate(self, T: int) -> "TruncSeries":
        if T <= self.T:
            return TruncSeries(self.ring, self.coeffs[: T + 1], self.stride)
        pad = self.ring.zero(self.min_prec())
        return TruncSeries(self.ring, self.coeffs + (pad,) * (T - self.T), self.stride)

    def min_prec(self) -> int:
        return min(c.prec for c in self.coeffs)

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        T = min(self.T, other.T)
        return TruncSeries(self.ring, tuple(self[n] + other[n] for n in range(T + 1)))

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(self.ring, tuple(-c for c in self.coeffs), self.stride)

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            return TruncSeries(self.ring, tuple(c * other for c in self.coeffs), self.stride)
        T = min(self.T, other.T)
        nz_b = [(k, b) for k, b in enumerate(other.coeffs[: T + 1]) if not b.is_zero()]
        prec = min(self.min_prec(), other.min_prec())
        out = [self.ring.zero(prec) for _ in range(T + 1)]
        for i, a in enumerate(self.coeffs[: T + 1]):
            if a.is_zero():
                continue
            for k, b in nz_b:
                if i + k > T:
                    break
                out[i + k] = out[i + k] + a * b
        return TruncSeries(self.ring, tuple(out))

    __rmul__ = __mul__

    def substitute(self, m: int) -> "TruncSeries":
        """``X -> X^m``; the result is exact modulo X^(m(T+1))."""
        if m < 1:
            raise ValueError("m must be >= 1")
        z = self.ring.zero(self.min_prec())
        out = [z] * (m * (self.T + 1))
        for n, c in enumerate(self.coeffs):
            out[m * n] = c
        return TruncSeries(self.ring, tuple(out), self.stride * m)

    def compose(self, g: "TruncSeries") -> "TruncSeries":
        """``self(g(X))`` for ``g`` without constant term (Horner)."""
        if not g[0].is_zero():
            raise ValueError("inner series must have zero constant term")
        T = min(self.T, g.T)
        g = g.truncate(T)
        acc = TruncSeries.monomial(self.ring, self[self.T], 0, T)
        for n in range(self.T - 1, -1, -1):
            acc = acc * g
            acc = TruncSeries(self.ring, (acc[0] + self[n],) + acc.coeffs[1:])
        return acc

    def equals(self, other: "TruncSeries") -> bool:
        T = min(self.T, other.T)
        return all((self[n] - other[n]).is_zero() for n in range(T + 1))

    def residual(self, other: "TruncSeries") -> int:
        T = min(self.T, other.T)
        return min((self[n] - other[n]).vmin for n in range(T + 1))


def series_exp(f: TruncSeries, guard: int) -> TruncSeries:
    """``exp(f)`` for ``f(0) = 0`` via ``n g_n = sum_k k f_k g_{n-k}``.

    ``guard`` is the number of digits the inputs carry beyond the wanted
    output precision; it must cover ``v_p(T!)``.
    """
    if not f[0].is_zero():
        raise ValueError("exp needs zero constant term")
    R, T, p = f.ring, f.T, f.ring.p
    loss = vp_factorial(T, p)
    if loss > guard:
        raise GuardExhausted(f"v_p({T}!) = {loss} exceeds guard {guard}")
    nz = [(k, k * f[k]) for k in range(1, T + 1) if not f[k].is_zero()]
    g = [R.one(f.min_prec())]
    for n in range(1, T + 1):
        acc = R.zero(f.min_prec())
        for k, kf in nz:
            if k > n:
                break
            acc = acc + kf * g[n - k]
        g.append(acc / n)
    return TruncSeries(R, tuple(g))


def series_log(g: TruncSeries, guard: int) -> TruncSeries:
    """``log(g)`` for ``g(0) = 1`` via ``g * log(g)' = g'``."""
    R, T, p = g.ring, g.T, g.ring.p
    if not (g[0] - 1).is_zero():
        raise ValueError("log needs constant term 1")
    loss = vp_factorial(T, p)
    if loss > guard:
        raise GuardExhausted(f"v_p({T}!) = {loss} exceeds guard {guard}")
    nz = [(j, g[j]) for j in range(1, T + 1) if not g[j].is_zero()]
    L = [R.zero(g.min_prec())]
    for n in range(1, T + 1):
        acc = g[n] * n
        for j, gj in nz:
            if j >= n:
                break
            acc = acc - L[n - j] * ((n - j) * gj)
        L.append(acc / n)
    return TruncSeries(R, tuple(L))


# ---------------------------------------------------------------------------
# Dwork's series

def default_truncation(p: int, target: int, margin: int | None = None) -> int:
    if margin is None:
        margin = p * p
    return math.ceil(target * p * p / (p - 1)) + margin


def dwork_series(Kp: KPrimeField, T: int) -> TruncSeries:
    """``exp(gamma X) * exp(-gamma X^p)`` truncated at degree T.

    Computed at ``Kp.prec + v_p(T!) + 2`` digits so that every returned
    coefficient is known to at least ``Kp.prec``.
    """
    cache = Kp.__dict__.setdefault("_dwork_cache", {})
    if T in cache:
        return cache[T]
    p = Kp.p
    guard = vp_factorial(T, p) + 2
    work = Kp.prec + guard
    gamma = Kp.gamma.with_prec(work)
    f1 = TruncSeries.monomial(Kp, gamma, 1, T)
    a = series_exp(f1, guard)
    Tb = T // p
    f2 = TruncSeries.monomial(Kp, -gamma, 1, Tb)
    b = series_exp(f2, guard).substitute(p).truncate(T)
    prod = a * b
    coeffs = []
    for n, c in enumerate(prod.coeffs):
        if c.prec < Kp.prec:
            raise GuardExhausted(f"coefficient {n} only known to {c.prec} digits")
        c = c.lower_prec(Kp.prec)
        if c.s > 0:
            raise IntegralityViolation(f"Dwork coefficient c_{n} is not integral")
        coeffs.append(c)
    out = TruncSeries(Kp, tuple(coeffs))
    cache[T] = out
    return out


@dataclass
class Evaluation:
    value: Elem
    terms_used: int
    tail_valuation: int
    guaranteed_precision: int


def _p_valuation(c: Elem, target: int) -> float:
    # valuation in p-units, capped at the target
    try:
        return c.valuation() / c.F.e
    except PrecisionExhausted:
        return float(target)


def dwork_eval(series: TruncSeries, a: Elem, target: int, window: int | None = None) -> Evaluation:
    """Evaluate at ``a`` (integral, in K) to ``target`` digits.

    The sum stops at the first index ``n0`` such that every computed
    coefficient from ``n0`` to ``T`` has valuation >= target and that run is
    at least ``window`` coefficients long (default ``p^2 * stride``).
    """
    Kp = series.ring
    p = Kp.p
    if window is None:
        window = p * p * series.stride
    if a.vmin < 0:
        raise ValueError("evaluation point must be integral")
    T = series.T
    n0 = T + 1
    while n0 > 0 and _p_valuation(series[n0 - 1], target) >= target:
        n0 -= 1
    if T + 1 - n0 < window:
        raise TruncationTooShort(
            f"only {T + 1 - n0} trailing coefficients certified, need {window}"
        )
    prec = min(target, min(c.prec for c in series.coeffs[:n0]), a.prec)
    a = a.lower_prec(prec + 1)
    acc = Kp.zero(prec)
    power = a.F.one(prec + 1)
    for n in range(n0):
        c = series[n]
        if not c.is_zero():
            acc = acc + c * power
        if n + 1 < n0:
            power = power * a
    acc = acc.lower_prec(prec)
    return Evaluation(acc, n0, target, prec)


def dwork_value(Kp: KPrimeField, a: Elem, target: int | None = None, stride: int = 1) -> Evaluation:
    """Adaptive driver: start at the default truncation and double on failure."""
    target = Kp.prec if target is None else target
    T = default_truncation(Kp.p, target)
    for _ in range(8):
        series = dwork_series(Kp, T)
        if stride > 1:
            series = series.substitute(stride)
        try:
            return dwork_eval(series, a, target)
        except TruncationTooShort:
            T *= 2
    raise TruncationTooShort(f"could not certify the Dwork tail up to T = {T}")


def zeta_p(Kp: KPrimeField, target: int | None = None) -> Elem:
    """The primitive p-th root of unity ``E(1)``, checked against Phi_p."""
    cache = Kp.__dict__.setdefault("_zeta_cache", {})
    key = target
    if key in cache:
        return cache[key]
    ev = dwork_value(Kp, Kp.K.one(), target)
    zeta = ev.value
    phi = sum((zeta**i for i in range(1, Kp.p)), Kp.one(zeta.prec))
    if not phi.is_zero():
        raise VerificationFailed(f"Phi_p(zeta) residual {phi.vmin} < {zeta.prec}")
    if (zeta - 1).valuation() != 1:
        raise VerificationFailed("zeta - 1 is not a uniformizer")
    cache[key] = zeta
    return zeta


def frobenius_orbit_eval(Kp: KPrimeField, a: Elem, k: int, target: int | None = None) -> Elem:
    """``E(X^(p^k))`` evaluated at ``a``."""
    return dwork_value(Kp, a, target, stride=Kp.p**k).value


def dwork_closed_form_coefficient(p: int, n: int):
    """Rational ``r_n`` with ``c_n = gamma^n * r_n`` (test oracle)."""
    from fractions import Fraction

    return sum(
        Fraction(1, p**k * math.factorial(k) * math.factorial(n - p * k))
        for k in range(n // p + 1)
    )


def dump(series: TruncSeries) -> list:
    """``[(n, nested coefficient)]`` pairs for JSON output."""
    return [[n, to_nested(c)] for n, c in enumerate(series.coeffs)]


def exp_difference_value(Kp: KPrimeField, a: Elem, m: int, target: int | None = None) -> Evaluation:
    """``exp(gamma X - gamma X^m)`` evaluated at ``a`` for a p-power m.

    This is the telescoped product of the Frobenius-twisted Dwork series,
    built directly from :func:`series_exp` rather than as a product.
    """
    p = Kp.p
    target = Kp.prec if target is None else target
    stride = max(m // p, 1)
    T = default_truncation(p, target) * stride
    window = p * p * stride
    for _ in range(8):
        cache = Kp.__dict__.setdefault("_expdiff_cache", {})
        key = (m, T)
        if key not in cache:
            guard = vp_factorial(T, p) + 2
            gamma = Kp.gamma.with_prec(Kp.prec + guard)
            c = [Kp.zero(Kp.prec + guard) for _ in range(T + 1)]
            c[1] = gamma
            if m <= T:
                c[m] = c[m] - gamma
            s = series_exp(TruncSeries(Kp, tuple(c)), guard)
            coeffs = []
            for n, cn in enumerate(s.coeffs):
                cn = cn.lower_prec(Kp.prec)
                if cn.s > 0:
                    raise IntegralityViolation(f"coefficient {n} is not integral")
                coeffs.append(cn)
            cache[key] = TruncSeries(Kp, tuple(coeffs))
        try:
            return dwork_eval(cache[key], a, target, window=window)
        except TruncationTooShort:
            T *= 2
    raise TruncationTooShort(f"could not certify the tail up to T = {T}")
