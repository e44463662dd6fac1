"""Explicit Gal(L/K) for the Kummer tower.

An automorphism ``delta_{k,m}`` is fixed by

* ``gamma -> chi * gamma`` with ``chi = omega^k``, omega the Teichmüller lift
  of the smallest primitive root mod p, and
* ``y -> zeta^m * y^j * x^((chi - j)/p)`` where ``j`` in 1..p-1 reduces to chi.

The y-image is a p-th root of ``x^chi``; that this is the image of ``x``
under the K'-automorphism is checked for every element, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import NotInDelta, RootMismatch, StructureViolation
from .fields import Elem, KPrimeField, KummerField, one_unit_power, to_nested
from .padic import PadicScalar, primitive_root, teichmueller_lift, to_text

DELTA_SLACK = 2


def act_kprime(Kp: KPrimeField, chi_powers: list[int], z: Elem) -> Elem:
    """``sum c_j gamma^j -> sum c_j chi^j gamma^j`` on a K' element."""
    z = Kp.embed(z)
    d = Kp.d
    c = list(z.c)
    for j in range(1, Kp.n):
        f = chi_powers[j]
        for t in range(j * d, (j + 1) * d):
            c[t] *= f
    return Elem.make(Kp, c, z.s, z.prec)


@dataclass
class Automorphism:
    k: int
    m: int
    j: int
    chi: PadicScalar
    image_gamma: Elem
    image_y: Elem
    y_powers: list = field(repr=False, default_factory=list)
    chi_powers: list = field(repr=False, default_factory=list)
    lam: Elem | None = field(repr=False, default=None)
    order: int = 0

    @property
    def key(self) -> tuple[int, int]:
        return (self.k, self.m)

    @property
    def in_delta(self) -> bool:
        return self.m == 0

    @property
    def in_G(self) -> bool:
        return self.k == 0


def apply(a: Automorphism, z: Elem, L: KummerField | None = None) -> Elem:
    """Image of a K, K' or L element."""
    F = z.F
    if F.depth == 0:
        return z
    if F.depth == 1:
        return act_kprime(F, a.chi_powers, z)
    L = F
    Kp = L.Kp
    acc = None
    for i in range(L.p):
        zi = L.y_coefficient(z, i)
        if zi.is_zero():
            continue
        term = a.y_powers[i] * act_kprime(Kp, a.chi_powers, zi)
        acc = term if acc is None else acc + term
    return acc if acc is not None else L.zero(z.prec)


@dataclass
class GroupTable:
    L: KummerField
    zeta: Elem
    omega: PadicScalar
    autos: dict
    compose_table: dict
    identity: tuple = (0, 0)

    @property
    def elements(self) -> list[Automorphism]:
        return list(self.autos.values())

    def __getitem__(self, key: tuple[int, int]) -> Automorphism:
        return self.autos[key]

    def compose(self, a: tuple, b: tuple) -> tuple:
        return self.compose_table[(a, b)]

    @property
    def sigma(self) -> Automorphism:
        return self.autos[((self.L.p - 1) // 2, 0)]

    def to_dict(self) -> dict:
        return {
            "omega": to_text(self.omega),
            "automorphisms": [
                {
                    "k": a.k,
                    "m": a.m,
                    "order": a.order,
                    "j": a.j,
                    "chi": to_text(a.chi),
                    "in_delta": a.in_delta,
                    "in_G": a.in_G,
                    "lambda": to_nested(a.lam) if a.lam is not None else None,
                }
                for a in self.elements
            ],
            "table": [
                [list(a), list(b), list(c)] for (a, b), c in sorted(self.compose_table.items())
            ],
            "delta": [list(a.key) for a in identify_delta(self)],
            "G": [list(a.key) for a in identify_G(self)],
        }


def _chi_scalars(p: int, prec: int) -> tuple[PadicScalar, list[PadicScalar]]:
    omega = teichmueller_lift(p, primitive_root(p), prec)
    chis = [omega**k for k in range(p - 1)]
    return omega, chis


def enumerate_automorphisms(L: KummerField, zeta: Elem, spot_checks: int = 2, seed: int = 0) -> GroupTable:
    """All p(p-1) automorphisms, with root and homomorphism checks."""
    import random

    p, Kp = L.p, L.Kp
    N = L.prec
    # exponents carry two extra digits so (chi - j)/p stays at full precision
    omega, chis = _chi_scalars(p, N + 2)
    x = L.x
    zeta = Kp.embed(zeta)
    zeta_pows = [Kp.one(zeta.prec)]
    for _ in range(p - 1):
        zeta_pows.append(zeta_pows[-1] * zeta)
    rng = random.Random(seed)
    autos = {}
    for k, chi in enumerate(chis):
        j = chi.to_int() % p
        expo = (chi - j) / p
        lam = one_unit_power(x, expo)
        chi_int = chi.to_int()
        chi_powers = [pow(chi_int, i, p ** (N + 2)) for i in range(p - 1)]
        base = L.y_power(j) * lam
        image_gamma = act_kprime(Kp, chi_powers, Kp.gamma)
        gx = act_kprime(Kp, chi_powers, x)
        for m in range(p):
            Y = base * zeta_pows[m] if m else base
            resid = Y**p - gx
            if not resid.is_zero():
                raise RootMismatch(f"delta_({k},{m})(y)^p differs from delta(x) at {resid.vmin} digits")
            ypows = [L.one(Y.prec)]
            for _ in range(p - 1):
                ypows.append(ypows[-1] * Y)
            a = Automorphism(k, m, j, chi, image_gamma, Y, ypows, chi_powers, lam * zeta_pows[m])
            for _ in range(spot_checks):
                z1, z2 = L.random(rng), L.random(rng)
                if not (apply(a, z1 * z2) - apply(a, z1) * apply(a, z2)).is_zero():
                    raise RootMismatch(f"delta_({k},{m}) is not multiplicative")
            autos[(k, m)] = a
    table = GroupTable(L, zeta, omega, autos, {})
    _fill_table(table)
    return table


def _fill_table(table: GroupTable) -> None:
    p = table.L.p
    for ka, a in table.autos.items():
        for kb, b in table.autos.items():
            img = apply(a, b.image_y)
            k = (ka[0] + kb[0]) % (p - 1)
            found = None
            for m in range(p):
                if (table.autos[(k, m)].image_y - img).is_zero():
                    found = (k, m)
                    break
            if found is None:
                raise StructureViolation(f"composition of {ka} and {kb} not found")
            table.compose_table[(ka, kb)] = found
    for key, a in table.autos.items():
        cur, n = key, 1
        while cur != table.identity:
            cur = table.compose_table[(cur, key)]
            n += 1
            if n > p * (p - 1):
                raise StructureViolation(f"{key} has no finite order")
        a.order = n


def identify_delta(table: GroupTable) -> list[Automorphism]:
    """Elements of order dividing p-1."""
    p = table.L.p
    delta = [a for a in table.elements if (p - 1) % a.order == 0]
    if len(delta) != p - 1:
        raise StructureViolation(f"|Delta| = {len(delta)}, expected {p - 1}")
    if any(not a.in_delta for a in delta):
        raise StructureViolation("Delta is not the m = 0 slice")
    return delta


def identify_G(table: GroupTable) -> list[Automorphism]:
    """The p automorphisms fixing K' pointwise."""
    G = [a for a in table.elements if a.in_G]
    if len(G) != table.L.p:
        raise StructureViolation(f"|G| = {len(G)}")
    return G


def trace_over(autos: Iterable[Automorphism], z: Elem) -> Elem:
    acc = None
    for a in autos:
        t = apply(a, z)
        acc = t if acc is None else acc + t
    return acc


def trace_delta(table: GroupTable, z: Elem) -> Elem:
    return trace_over(identify_delta(table), z)


def trace_G(table: GroupTable, z: Elem) -> Elem:
    return trace_over(identify_G(table), z)


def trace_full(table: GroupTable, z: Elem) -> Elem:
    return trace_over(table.elements, z)


def is_delta_fixed(table: GroupTable, z: Elem, slack: int = DELTA_SLACK) -> tuple[bool, int]:
    """Whether every delta moves z by less than ``p^(prec - slack)``.

    Returns the verdict and the worst residual valuation (in p-digits).
    """
    worst = None
    ok = True
    for a in identify_delta(table):
        diff = apply(a, z) - z
        r = diff.vmin
        worst = r if worst is None else min(worst, r)
        if r < diff.prec - slack:
            ok = False
    return ok, worst


def chi(a: Automorphism) -> PadicScalar:
    if not a.in_delta:
        raise NotInDelta(f"({a.k},{a.m}) does not lie in Delta")
    return a.chi


def norm_over(autos: Iterable[Automorphism], z: Elem) -> Elem:
    acc = None
    for a in autos:
        t = apply(a, z)
        acc = t if acc is None else acc * t
    return acc
