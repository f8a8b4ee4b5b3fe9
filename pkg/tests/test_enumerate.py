import pytest

import oracles
from c5free.enumerate import (Census, children, enumerate_triangle_free, extremal_c5, independent_sets,
                              iter_level, level_counts)
from c5free.graphs import (C5, BlowupSpec, Graph, balanced_sizes, blowup, canonical_form, count_c5,
                           is_isomorphic, is_triangle_free, make_graph, max_c5_formula, mobius_ladder_8)

PER_N = [1, 1, 2, 3, 7, 14, 38, 107, 410, 1897]


def test_counts_against_labelled_oracle_live():
    assert level_counts(6) == oracles.class_counts(6)


def test_counts_against_frozen_oracle():
    assert level_counts(7) == oracles.FROZEN_CLASS_COUNTS


def test_counts_against_networkx_atlas():
    from networkx.generators.atlas import graph_atlas_g

    atlas = [0] * 8
    for g in graph_atlas_g():
        h = make_graph(g.number_of_nodes(), list(g.edges()))
        if is_triangle_free(h):
            atlas[h.n] += 1
    assert level_counts(7) == atlas


def test_census_through_nine():
    assert level_counts(9) == PER_N
    assert sum(PER_N) == 2480
    assert sum(PER_N[1:]) == 2479


@pytest.mark.parametrize("n", [4, 6])
def test_visit_streams_each_class_once(n):
    seen = []
    total = enumerate_triangle_free(n, seen.append)
    assert total == len(seen) == PER_N[n]
    assert all(is_triangle_free(g) for g in seen)
    assert len({canonical_form(g) for g in seen}) == len(seen)


def test_enumeration_n8_is_isomorph_free():
    forms = [canonical_form(g) for g in iter_level(8)]
    assert len(forms) == len(set(forms)) == 410


def test_parallel_matches_serial():
    assert enumerate_triangle_free(8, workers=2) == 410
    serial = extremal_c5(8)
    parallel = extremal_c5(8, workers=2)
    assert (serial.total, serial.max_c5, serial.winners) == (parallel.total, parallel.max_c5, parallel.winners)


def test_guard():
    with pytest.raises(ValueError):
        enumerate_triangle_free(13)


def test_independent_sets_of_c5():
    sets = list(independent_sets(C5))
    # empty, 5 singletons, 5 non-adjacent pairs
    assert len(sets) == 11


def test_children_are_triangle_free():
    for g in iter_level(5):
        for c in children(g):
            assert c.n == 6 and is_triangle_free(c)


@pytest.mark.parametrize("n", range(5, 10))
def test_maximum_meets_product_formula(n):
    assert extremal_c5(n).max_c5 == max_c5_formula(n)


def _balanced_blowups(n):
    """All isomorphism classes of balanced blow-ups of C5 on n vertices."""
    from itertools import permutations

    out = []
    for sizes in set(permutations(balanced_sizes(n))):
        g = blowup(BlowupSpec(C5, sizes))
        if not any(is_isomorphic(g, h) for h in out):
            out.append(g)
    return out


@pytest.mark.parametrize("n", range(5, 10))
def test_winners_are_balanced_blowups_or_ml8(n):
    c = extremal_c5(n)
    expected = _balanced_blowups(n) + ([mobius_ladder_8()] if n == 8 else [])
    assert sorted(canonical_form(g) for g in expected) == c.winners


def test_winner_examples():
    assert [w.graph() for w in extremal_c5(5).winners] == [canonical_form(C5).graph()]
    c8 = extremal_c5(8)
    assert any(is_isomorphic(w.graph(), mobius_ladder_8()) for w in c8.winners)
    assert extremal_c5(9).winners == [canonical_form(blowup(BlowupSpec(C5, (2, 2, 2, 2, 1))))]


def test_degenerate_orders():
    c4 = extremal_c5(4)
    assert c4.max_c5 == 0 and len(c4.winners) == 7
    assert extremal_c5(0).total == 1


def test_census_merge_is_order_free():
    graphs = list(iter_level(6))
    a, b = Census(6), Census(6)
    for g in graphs[:20]:
        a.add(g)
    for g in graphs[20:]:
        b.add(g)
    c = Census(6)
    for g in reversed(graphs):
        c.add(g)
    b.merge(a)
    assert (b.finish().winners, b.total, b.max_c5) == (c.finish().winners, c.total, c.max_c5)


def test_winner_counts_on_c5_graph():
    for w in extremal_c5(7).winners:
        assert count_c5(w.graph()) == 4
    assert isinstance(extremal_c5(6).winners[0].graph(), Graph)
