from __future__ import annotations

import random
from fractions import Fraction

import pytest

from oracles import brute_bridges, brute_t
from rmtcumulants import lemmas
from rmtcumulants.errors import DomainError, ShapeError
from rmtcumulants.graphs import (
    GraphOfGraphs,
    MultiGraph,
    TEdge,
    bridges,
    build_word_graphs,
    cycle_count,
    forest_2ecc,
    merge_by_graph,
    quotient,
    t_exponent,
    two_edge_cc,
)
from rmtcumulants.partitions import SetPartition, lift_pairing


def _cycle_edges(g: MultiGraph) -> list[frozenset]:
    adj = g.adjacency()
    return sorted((frozenset(e for v in comp for e, _ in adj[v]) for comp in g.components()), key=min)


def test_quotient_example():
    g = MultiGraph.build(
        range(1, 7),
        [(1, 1, 2), (2, 1, 4), (3, 2, 3), (4, 4, 3), (5, 2, 5), (6, 4, 6), (7, 3, 5), (8, 3, 6), (9, 5, 6), (10, 5, 6)],
    )
    pi = SetPartition([[1], [2, 4], [3], [5, 6]])
    q = quotient(g, pi)
    assert len(q.vertices) == 4 and len(q.edges) == 10
    loops = {e.id for e in q.edges if e.is_loop}
    assert loops == {9, 10}
    assert all(e.a == (5, 6) for e in q.edges if e.is_loop)
    # e2/e4 now run parallel to e1/e3
    assert q.edge(2).b == (2, 4) and q.edge(4).a == (2, 4)


def test_quotient_needs_exact_cover():
    g = MultiGraph.build([1, 2], [(0, 1, 2)])
    with pytest.raises(DomainError):
        quotient(g, SetPartition([[1], [3]]))


def test_deterministic_sum_example_forest():
    g = MultiGraph.build(range(1, 29), [(i, 2 * i, 2 * i - 1) for i in range(1, 15)])
    pi = SetPartition(
        [{1, 4}, {2, 3}, {5, 8}, {6, 15, 26}, {7, 19}, {16, 20}, {9, 13, 25}, {10, 11},
         {12, 14, 23, 28}, {17, 21, 27}, {18, 22}, {24}]
    )
    q = quotient(g, pi)
    forest = forest_2ecc(q)
    trees = forest.components()
    assert len(trees) == 2
    shapes = sorted(sorted(forest.degree(v) for v in tree) for tree in trees)
    assert shapes == [[0], [1, 1, 1, 3]]
    assert t_exponent(q) == Fraction(5, 2)


def test_graph_induced_example():
    g1 = MultiGraph.build([1, 2, 3], [(1, 1, 2), (2, 1, 2), (3, 2, 3), (4, 3, 3)])
    g2 = MultiGraph.build([4, 5, 6], [(5, 4, 5), (6, 5, 6), (7, 4, 6)])
    g3 = MultiGraph.build([7, 8, 9], [(8, 7, 8), (9, 7, 8), (10, 7, 7), (11, 9, 9)])
    gog = GraphOfGraphs((g1, g2, g3), (TEdge(0, 1, 3, 4), TEdge(0, 2, 2, 8)))
    merged, pi_t = merge_by_graph(gog)
    assert pi_t == SetPartition([[1], [2, 8], [3, 4], [5], [6], [7], [9]])
    assert len(merged.vertices) == 7 and len(merged.edges) == 11
    assert {e.a for e in merged.edges if e.is_loop} == {(3, 4), (7,), (9,)}
    assert t_exponent(merged) == 2
    # every T-edge of this example lands on a leaf, so the tree formula holds
    assert t_exponent(merged) == sum(t_exponent(m) for m in gog.members) - 3 + 1


def test_five_cycles_example():
    wg = build_word_graphs((8, 6))
    tau = SetPartition([(1, 8), (2, 13), (3, 5), (4, 7), (6, 10), (9, 14), (11, 12)])
    q = quotient(wg.D, lift_pairing(tau))
    assert cycle_count(q) == 5
    assert _cycle_edges(q) == sorted(
        [frozenset({8}), frozenset({14}), frozenset({11}), frozenset({2, 5, 10, 12}),
         frozenset({3, 7, 1, 13, 9, 6, 4})],
        key=min,
    )
    assert q.edge(8).a == (-8, 1) and q.edge(14).a == (-14, 9) and q.edge(11).a == (-11, 12)
    assert (-1, 8) in {v for e in q.edges if e.id in {1, 3, 7} for v in (e.a, e.b)}


def test_word_graphs_shape():
    wg = build_word_graphs((8, 6))
    assert wg.D.oriented and len(wg.D.edges) == 14 and len(wg.D.vertices) == 28
    assert wg.D.edge(8).a == 1 and wg.D.edge(8).b == -8
    assert wg.D.edge(14).a == 9
    assert len(wg.G.edges) == 28
    assert wg.G.edge(("X", 3)).a == 3 and wg.G.edge(("X", 3)).b == -3
    one = build_word_graphs((1,))
    assert one.D.edge(1).a == 1 and one.D.edge(1).b == -1
    # a single closed word gives a single cycle in G
    assert cycle_count(build_word_graphs((2,)).G) == 1


def test_bridges_small_cases():
    path = MultiGraph.build("abc", [(0, "a", "b"), (1, "b", "c")])
    assert bridges(path) == {0, 1}
    assert t_exponent(path) == 1
    double = MultiGraph.build("ab", [(0, "a", "b"), (1, "a", "b")])
    assert bridges(double) == set() and t_exponent(double) == 1
    loop = MultiGraph.build("a", [(0, "a", "a")])
    assert bridges(loop) == set()
    iso = MultiGraph.build("abc", [])
    assert t_exponent(iso) == 3
    assert two_edge_cc(path) == SetPartition([["a"], ["b"], ["c"]])


@pytest.mark.parametrize("seed", range(20))
def test_bridges_match_deletion_oracle(seed):
    rng = random.Random(seed)
    for _ in range(25):
        g = lemmas.random_multigraph(rng, rng.randint(1, 9), rng.randint(0, 14))
        edges = {e.id: (e.a, e.b) for e in g.edges}
        assert bridges(g) == brute_bridges(g.vertices, edges)
        assert t_exponent(g) == brute_t(g.vertices, edges)


def test_text_round_trip():
    g = MultiGraph.build([1, "x", -3], [(0, 1, "x"), ("e", -3, -3)], oriented=True)
    back = MultiGraph.from_text(g.to_text())
    assert back == g
    with pytest.raises(ShapeError):
        MultiGraph.from_text("1 2 3\n")
    with pytest.raises(ShapeError):
        MultiGraph.from_text("vertices 1 2\n0 1 2 oriented\n1 2 1\n")
    with pytest.raises(ShapeError):
        MultiGraph.build(["a b"], []).to_text()


def test_graph_validation():
    with pytest.raises(DomainError):
        MultiGraph.build([1, 1], [])
    with pytest.raises(DomainError):
        MultiGraph.build([1, 2], [(0, 1, 3)])
    with pytest.raises(DomainError):
        MultiGraph.build([1, 2], [(0, 1, 2), (0, 2, 1)])


def test_cycle_count_requires_two_regular():
    with pytest.raises(ShapeError):
        cycle_count(MultiGraph.build("abc", [(0, "a", "b"), (1, "b", "c")]))
    tri = MultiGraph.build("abc", [(0, "a", "b"), (1, "b", "c"), (2, "c", "a")])
    assert cycle_count(tri) == 1


def test_merge_validation():
    g = MultiGraph.build([1], [])
    with pytest.raises(DomainError):
        GraphOfGraphs((g, g))
    with pytest.raises(DomainError):
        GraphOfGraphs((g, MultiGraph.build([2], [])), (TEdge(0, 1, 1, 5),))


def test_tree_merge_fails_for_members_with_bridges():
    # gluing a path's end to the middle of another path: the identity needs bridgeless members
    g1 = MultiGraph.build("abc", [(0, "a", "b"), (1, "b", "c")])
    g2 = MultiGraph.build("xyz", [(0, "x", "y"), (1, "y", "z")])
    merged, _ = merge_by_graph(GraphOfGraphs((g1, g2), (TEdge(0, 1, "a", "y"),)))
    assert t_exponent(merged) == Fraction(3, 2)
    assert sum(t_exponent(g) for g in (g1, g2)) - 1 == 1


def test_random_bridgeless_graphs_are_bridgeless():
    rng = random.Random(5)
    for _ in range(100):
        g = lemmas.random_bridgeless_graph(rng, list(range(rng.randint(1, 8))))
        assert bridges(g) == set()


@pytest.mark.parametrize(
    "suite",
    [lemmas.tree_merge_suite, lemmas.connected_merge_suite, lemmas.monotonicity_suite],
)
def test_graph_suites_have_no_violations(suite):
    res = suite()
    assert res.checked >= 200
    assert res.passed, res.violations[:3]


def test_small_exhaustive_suites():
    for res in (
        lemmas.gue_cycle_suite(max_m=6),
        lemmas.gue_order_suite(max_m=6),
        lemmas.gue_eps_suite(max_m=4),
        lemmas.wigner_split_suite(max_m=6),
        lemmas.crossing_pairing_suite(max_m=6),
    ):
        assert res.checked > 0
        assert res.passed, (res.name, res.violations[:3])
