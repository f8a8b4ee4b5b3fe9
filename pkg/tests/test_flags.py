import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from c5free.densities import Graphon, flag_density, graphon_density, level_densities
from c5free.enumerate import iter_level
from c5free.flags import (Flag, Type, default_types, enumerate_flags, enumerate_types,
                          expansion_coefficients, flag_basis, level_graphs, level_keys, pair_density,
                          product_table, sos_coefficients, type_representatives)
from c5free.graphs import C5, EDGE, Graph, canonical_form, is_isomorphic, make_graph

POOL = [g for n in range(2, 8) for g in iter_level(n)]


def test_level_sizes():
    assert len(level_graphs(5)) == 14
    assert len(level_graphs(6)) == 38
    assert list(level_keys(6)) == sorted(level_keys(6))


def test_type_counts():
    assert len(enumerate_types(0)) == 1
    assert len(enumerate_types(1)) == 1
    assert len(enumerate_types(3)) == 7
    assert len(enumerate_types(4)) == 41
    assert [len(type_representatives(k)) for k in range(5)] == [1, 1, 2, 3, 7]


def test_flag_counts():
    single = Type(Graph(1, (0,)))
    assert len(enumerate_flags(single, 2)) == 2
    assert len(enumerate_flags(Type(Graph(0, ())), 5)) == 14
    edge = Type(EDGE)
    flags = enumerate_flags(edge, 3)
    # the new vertex sees nothing, only root 0, or only root 1
    assert len(flags) == 3
    assert len({f.key() for f in flags}) == 3


def test_flags_are_canonical_and_typed():
    for t in default_types(6):
        for f in flag_basis(t, 6):
            assert f.type == t
            assert f.canonical() == f
            assert f.roots == tuple(range(t.k))


def test_type_id_round_trip():
    for t in default_types(6) + default_types(5):
        assert Type.from_id(t.id) == t
    with pytest.raises(ValueError):
        Type.from_id("3:A_")


def test_flag_key_respects_root_order():
    path = make_graph(3, [(0, 1), (1, 2)])
    assert Flag(path, (0, 1)).key() != Flag(path, (1, 0)).key()
    assert Flag(path, (0, 1)).key() == Flag(path.relabel([2, 1, 0]), (2, 1)).key()


def test_expansion_examples():
    vec = expansion_coefficients(C5, 5)
    c5key = canonical_form(C5).bytes
    assert vec.entries == {k: Fraction(int(k == c5key)) for k in level_keys(5)}
    vec = expansion_coefficients(EDGE, 3)
    for key, g in zip(level_keys(3), level_graphs(3)):
        assert vec.entries[key] == Fraction(g.num_edges, 3)


def test_pair_density_examples():
    t = Type(Graph(1, (0,)))
    adj_flag = next(f for f in enumerate_flags(t, 2) if f.graph.num_edges == 1)
    cherry = make_graph(3, [(0, 1), (0, 2)])
    assert pair_density(adj_flag, adj_flag, cherry, (0,)) == 1
    one_side = make_graph(3, [(0, 1)])
    assert pair_density(adj_flag, adj_flag, one_side, (0,)) == 0
    with pytest.raises(ValueError):
        pair_density(adj_flag, adj_flag, C5, (0,))


def _random_instance(rnd):
    while True:
        g = rnd.choice(POOL)
        k = rnd.randint(0, min(3, g.n - 1))
        roots = tuple(rnd.sample(range(g.n), k))
        t = Type(g.induced(roots))
        s1 = rnd.randint(k, min(k + 3, 6))
        s2 = rnd.randint(k, min(6 + k - s1, k + 3))
        f1 = rnd.choice(enumerate_flags(t, s1))
        f2 = rnd.choice(enumerate_flags(t, s2))
        return g, roots, t, f1, f2


@pytest.mark.parametrize("seed", range(60))
def test_rooted_product_identity(seed):
    g, roots, t, f1, f2 = _random_instance(random.Random(seed))
    b = Graphon(g, roots)
    lhs = flag_density(b, f1) * flag_density(b, f2)
    theta = tuple(range(t.k))
    rhs = sum((pair_density(f1, f2, f.graph, theta) * flag_density(b, f)
               for f in enumerate_flags(t, f1.size + f2.size - t.k)), Fraction(0))
    assert lhs == rhs


def test_product_table_is_symmetric():
    for t in default_types(6):
        basis = flag_basis(t, 6)
        for row in product_table(t, basis, 6):
            for (i, j), v in row.items():
                assert row.get((j, i)) == v


def test_sos_zero_matrix():
    t0 = Type(Graph(0, ()))
    basis = flag_basis(t0, 6)
    zero = sos_coefficients(t0, basis, [[0] * len(basis) for _ in basis], 6)
    assert all(v == 0 for v in zero.entries.values())


def test_sos_rejects_bad_shapes():
    t0 = Type(Graph(0, ()))
    with pytest.raises(ValueError):
        sos_coefficients(t0, flag_basis(t0, 6), [[1]], 6)
    with pytest.raises(ValueError):
        sos_coefficients(t0, [Flag(C5, ())], [[1]], 5)


def _psd_matrix(rnd, d):
    a = [[rnd.randint(-3, 3) for _ in range(d)] for _ in range(rnd.randint(1, d))]
    return [[sum(r[i] * r[j] for r in a) for j in range(d)] for i in range(d)]


@pytest.mark.parametrize("seed", range(6))
def test_sos_nonnegative_on_small_graphons(seed):
    rnd = random.Random(seed)
    types = default_types(6)
    t = types[seed % len(types)]
    basis = flag_basis(t, 6)
    vec = sos_coefficients(t, basis, _psd_matrix(rnd, len(basis)), 6)
    graphs = [g for n in range(1, 7) for g in iter_level(n)]
    graphs += [rnd.choice(list(iter_level(n))) for n in (7, 8, 9) for _ in range(3)]
    for g in graphs:
        assert vec.evaluate(level_densities(g, 6)) >= 0


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([g for n in range(1, 7) for g in iter_level(n)]))
def test_sos_square_of_single_flag_matches_density_squared(g):
    # unrooted square: [[F^2]] evaluates to d(F)^2 in every graphon
    t0 = Type(Graph(0, ()))
    basis = flag_basis(t0, 6)
    dens = level_densities(g, 6)
    for i, f in enumerate(basis[:4]):
        m = [[int(a == b == i) for b in range(len(basis))] for a in range(len(basis))]
        assert sos_coefficients(t0, basis, m, 6).evaluate(dens) == graphon_density(Graphon(g), f.graph) ** 2


def test_basis_sizes_at_level_six():
    assert [len(flag_basis(t, 6)) for t in default_types(6)] == [3, 15, 10, 16, 12, 10, 9, 9, 8, 7]
    assert [len(flag_basis(t, 5)) for t in default_types(5)] == [5, 8, 6, 5]


def test_default_types_cover_each_class_once():
    ts = default_types(6)
    assert [t.k for t in ts] == [0, 2, 2, 4, 4, 4, 4, 4, 4, 4]
    for i, a in enumerate(ts):
        for b in ts[i + 1:]:
            assert not (a.k == b.k and is_isomorphic(a.sigma, b.sigma))


def test_level_seven_warns():
    with pytest.warns(ResourceWarning):
        expansion_coefficients(EDGE, 7)
