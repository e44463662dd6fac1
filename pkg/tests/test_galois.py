from __future__ import annotations

import random

import pytest

from sdnb import galois as gal
from sdnb.errors import NotInDelta
from sdnb.padic import teichmueller_lift

from helpers import tower

CONFIGS = [(3, 1), (5, 1), (3, 2)]


@pytest.mark.parametrize("p,d", CONFIGS)
def test_identity(p, d):
    T = tower(p, d)
    ident = T.table[(0, 0)]
    L = T.L
    assert (ident.image_y - L.y).is_zero()
    assert ident.order == 1
    z = L.random(random.Random(0))
    assert (gal.apply(ident, z) - z).is_zero()


@pytest.mark.parametrize("p,d", CONFIGS)
def test_sigma_inverts_y_and_negates_gamma(p, d):
    T = tower(p, d)
    s = T.table.sigma
    L = T.L
    assert s.chi.to_int() == p**s.chi.abs_precision - 1
    assert (s.image_y * L.y - 1).is_zero()
    assert (gal.apply(s, L.embed(T.Kp.gamma)) + L.embed(T.Kp.gamma)).is_zero()
    k = T.table.compose(s.key, s.key)
    assert k == (0, 0) and s.order == 2


@pytest.mark.parametrize("p,d", CONFIGS)
def test_kummer_generator_of_G(p, d):
    T = tower(p, d)
    g = T.table[(0, 1)]
    assert (g.image_y - T.L.embed(T.zeta) * T.L.y).is_zero()
    assert g.order == p


@pytest.mark.parametrize("p,d", CONFIGS)
def test_automorphisms_are_ring_maps(p, d):
    T = tower(p, d)
    rng = random.Random(4)
    for a in T.table.elements:
        u, v = T.L.random(rng), T.L.random(rng)
        assert (gal.apply(a, u * v) - gal.apply(a, u) * gal.apply(a, v)).is_zero()
        assert (gal.apply(a, u + v) - gal.apply(a, u) - gal.apply(a, v)).is_zero()
        k = T.K.random(rng)
        assert (gal.apply(a, T.L.embed(k)) - T.L.embed(k)).is_zero()


@pytest.mark.parametrize("p,d", CONFIGS)
def test_composition_table_matches_action(p, d):
    T = tower(p, d)
    z = T.L.random(random.Random(9))
    keys = list(T.table.autos)
    for a in keys[:4]:
        for b in keys:
            c = T.table.compose(a, b)
            lhs = gal.apply(T.table[a], gal.apply(T.table[b], z))
            assert (lhs - gal.apply(T.table[c], z)).is_zero()


@pytest.mark.parametrize("p,d", CONFIGS)
def test_subgroups(p, d):
    T = tower(p, d)
    D = gal.identify_delta(T.table)
    G = gal.identify_G(T.table)
    assert len(D) == p - 1 and len(G) == p
    assert {a.key for a in D} & {a.key for a in G} == {(0, 0)}
    assert len(T.table.autos) == p * (p - 1)
    keys = list(T.table.autos)
    assert all(T.table.compose(a, b) == T.table.compose(b, a) for a in keys for b in keys)


@pytest.mark.parametrize("p,d", CONFIGS)
def test_chi_values_are_teichmuller(p, d):
    T = tower(p, d)
    D = gal.identify_delta(T.table)
    N = min(a.chi.abs_precision for a in D)
    mod = p**N
    chis = sorted(gal.chi(a).to_int() % mod for a in D)
    expected = sorted(teichmueller_lift(p, r, N).to_int() for r in range(1, p))
    assert chis == expected
    prod = 1
    for c in chis:
        prod = prod * c % mod
    assert prod == mod - 1


def test_chi_outside_delta():
    T = tower(3, 1)
    with pytest.raises(NotInDelta):
        gal.chi(T.table[(0, 1)])


@pytest.mark.parametrize("p,d", CONFIGS)
def test_traces(p, d):
    T = tower(p, d)
    L = T.L
    for i in range(1, p):
        assert gal.trace_G(T.table, L.y_power(i)).is_zero()
    assert (gal.trace_G(T.table, L.one()) - p).is_zero()
    assert (gal.trace_delta(T.table, L.one()) - (p - 1)).is_zero()


def test_trace_delta_p3():
    T = tower(3, 1)
    L = T.L
    expected = L.y + L.y**2 / L.embed(T.x)
    assert (gal.trace_delta(T.table, L.y) - expected).is_zero()


@pytest.mark.parametrize("p,d", CONFIGS)
def test_lambda_relation(p, d):
    from sdnb.fields import one_unit_power

    T = tower(p, d)
    for a in gal.identify_delta(T.table):
        lhs = a.lam**p
        rhs = one_unit_power(T.x, a.chi - a.j)
        assert (lhs - rhs).vmin >= 18


@pytest.mark.parametrize("p,d", CONFIGS)
def test_delta_fixed(p, d):
    T = tower(p, d)
    L = T.L
    ok, _ = gal.is_delta_fixed(T.table, gal.trace_delta(T.table, L.y))
    assert ok
    ok, worst = gal.is_delta_fixed(T.table, L.y)
    assert not ok and worst == 0
    ok, _ = gal.is_delta_fixed(T.table, L.embed(T.K.random(random.Random(1))))
    assert ok


def test_table_serializes():
    import json

    T = tower(3, 1)
    doc = T.table.to_dict()
    json.dumps(doc)
    assert len(doc["automorphisms"]) == 6
    assert len(doc["table"]) == 36
