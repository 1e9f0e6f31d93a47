"""Dependence graphs, exact treewidth, and (nice) tree decompositions."""

import random
from itertools import combinations, permutations

import pytest

from kopt.buckets import order_edges
from kopt.decomp import (
    JOIN,
    DepGraph,
    NiceNode,
    NiceTreeDecomposition,
    decomposition_from_order,
    dependence_graph,
    to_nice,
    treewidth_exact,
    treewidth_width_only,
    validate_decomposition,
)
from kopt.moves import ConnectionPattern, interference_graph, valid_patterns
from kopt.oracle import treewidth_bruteforce


def complete_graph(k):
    return DepGraph(k, frozenset(combinations(range(1, k + 1), 2)))


def cycle_graph(k):
    return DepGraph(k, frozenset([(i, i + 1) for i in range(1, k)] + [(1, k)]))


def path_graph(k):
    return DepGraph(k, frozenset((i, i + 1) for i in range(1, k)))


def random_graph(k, seed, p=0.5):
    rng = random.Random(seed)
    edges = [e for e in combinations(range(1, k + 1), 2) if rng.random() < p]
    return DepGraph(k, frozenset(edges))


def test_dependence_graph_union():
    m = ConnectionPattern(3, ((2, 5), (4, 1), (6, 3)))
    dep = dependence_graph(interference_graph(m), order_edges((1, 1, 1)))
    assert dep.edges == frozenset({(1, 2), (2, 3), (1, 3)})
    assert treewidth_exact(dep)[0] == 2


def test_dependence_graph_max_degree_four():
    for k in (3, 4, 5):
        for m in valid_patterns(k):
            dep = dependence_graph(interference_graph(m), order_edges((1,) * k))
            deg = {v: 0 for v in range(1, k + 1)}
            for a, b in dep.edges:
                deg[a] += 1
                deg[b] += 1
            assert max(deg.values()) <= 4


@pytest.mark.parametrize(
    "graph,expected",
    [
        (complete_graph(5), 4),
        (cycle_graph(6), 2),
        (path_graph(5), 1),
        (DepGraph(5, frozenset()), 0),
    ],
)
def test_treewidth_known_values(graph, expected):
    width, order = treewidth_exact(graph)
    assert width == expected
    assert sorted(order) == list(range(1, graph.k + 1))
    assert treewidth_width_only(graph.edges, graph.k) == expected


def test_treewidth_subdivided_k4_needs_fill_awareness():
    # degeneracy is 2 but treewidth is 3; a fill-blind subset DP gets this wrong
    g = DepGraph(5, frozenset([(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 5), (4, 5)]))
    assert treewidth_exact(g)[0] == 3
    assert treewidth_width_only(g.edges, g.k) == 3


def elimination_width(g: DepGraph, order) -> int:
    nbrs = {v: set() for v in range(1, g.k + 1)}
    for a, b in g.edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    width = 0
    for v in order:
        width = max(width, len(nbrs[v]))
        for u in nbrs[v]:
            nbrs[u].discard(v)
            nbrs[u].update(nbrs[v] - {u})
        del nbrs[v]
    return width


def test_returned_order_realizes_the_width():
    for seed in range(30):
        g = random_graph(6, seed)
        width, order = treewidth_exact(g)
        assert elimination_width(g, order) == width


def test_treewidth_matches_factorial_bruteforce_small():
    for k in (3, 4, 5):
        for edges in [set(), {(1, 2)}, {(1, 2), (2, 3)}]:
            g = DepGraph(k, frozenset(edges))
            assert treewidth_exact(g)[0] == treewidth_bruteforce(g).value
    for seed in range(60):
        g = random_graph(5 + seed % 3, seed)
        exact_w, exact_order = treewidth_exact(g)
        brute = treewidth_bruteforce(g)
        assert exact_w == brute.value
        assert exact_order == brute.witness  # both tie-break lexicographically


def test_treewidth_on_interference_unions_vs_bruteforce():
    # all graphs arising as interference edges plus consecutive-pair subsets, k <= 5
    path = [(i, i + 1) for i in range(1, 5)]
    seen = set()
    for m in valid_patterns(5):
        iedges = interference_graph(m).edges
        for s in range(len(path) + 1):
            for subset in combinations(path, s):
                key = iedges | frozenset(subset)
                if key in seen:
                    continue
                seen.add(key)
                g = DepGraph(5, key)
                assert treewidth_exact(g)[0] == treewidth_bruteforce(g).value


def test_decomposition_from_order_examples():
    tri = DepGraph(3, frozenset([(1, 2), (2, 3), (1, 3)]))
    for order in permutations((1, 2, 3)):
        d = decomposition_from_order(tri, order)
        assert d.width == 2
        assert validate_decomposition(tri, d)[0]
    p5 = path_graph(5)
    d = decomposition_from_order(p5, (1, 2, 3, 4, 5))
    assert d.width == 1
    assert validate_decomposition(p5, d)[0]


@pytest.mark.parametrize("seed", range(50))
def test_random_orders_validate_and_match_elimination_width(seed):
    rng = random.Random(seed)
    k = rng.randint(3, 7)
    g = random_graph(k, seed + 1000, p=rng.uniform(0.2, 0.8))
    order = list(range(1, k + 1))
    rng.shuffle(order)
    d = decomposition_from_order(g, tuple(order))
    ok, diags = validate_decomposition(g, d)
    assert ok, diags
    assert d.width == elimination_width(g, order)


def test_to_nice_single_bag_chain_shape():
    g = DepGraph(2, frozenset([(1, 2)]))
    d = decomposition_from_order(g, (1, 2))
    nice = to_nice(d)
    kinds = [nice.nodes[t].kind for t in nice.postorder()]
    # ascending introduces from the empty leaf, then ascending forgets
    assert kinds == ["leaf", "introduce", "introduce", "forget", "forget"]
    verts = [nice.nodes[t].vertex for t in nice.postorder()]
    assert verts == [None, 1, 2, 1, 2]
    assert validate_decomposition(g, nice)[0]


@pytest.mark.parametrize("seed", range(50))
def test_to_nice_preserves_width_and_validates(seed):
    rng = random.Random(seed + 77)
    k = rng.randint(2, 7)
    g = random_graph(k, seed + 2000, p=rng.uniform(0.2, 0.9))
    order = list(range(1, k + 1))
    rng.shuffle(order)
    d = decomposition_from_order(g, tuple(order))
    nice = to_nice(d)
    assert nice.width == d.width
    ok, diags = validate_decomposition(g, nice)
    assert ok, diags
    # node count stays linear in k * width
    assert len(nice.nodes) <= 4 * g.k * (d.width + 2) + 4


def test_validator_names_uncovered_edge():
    g = DepGraph(3, frozenset([(1, 2), (2, 3)]))
    bad = NiceTreeDecomposition(
        k=3,
        nodes=(
            NiceNode("leaf", frozenset(), None, ()),
            NiceNode("introduce", frozenset({1}), 1, (0,)),
            NiceNode("introduce", frozenset({1, 2}), 2, (1,)),
            NiceNode("forget", frozenset({2}), 1, (2,)),
            NiceNode("introduce", frozenset({2, 3}), 3, (3,)),
            NiceNode("forget", frozenset({3}), 2, (4,)),
            NiceNode("forget", frozenset(), 3, (5,)),
        ),
        root=6,
    )
    ok, _ = validate_decomposition(g, bad)
    assert ok
    g_more = DepGraph(3, frozenset([(1, 2), (2, 3), (1, 3)]))
    ok, diags = validate_decomposition(g_more, bad)
    assert not ok
    assert any("edge (1,3)" in d for d in diags)


def test_validator_names_disconnected_vertex():
    g = DepGraph(3, frozenset([(1, 2)]))
    from kopt.decomp import TreeDecomposition

    bad = TreeDecomposition(
        k=3,
        bags=(frozenset({1, 2}), frozenset({3}), frozenset({1, 2})),
        parent=(1, 2, -1),
        root=2,
    )
    ok, diags = validate_decomposition(g, bad)
    assert not ok
    assert any("vertex 1" in d or "vertex 2" in d for d in diags)


def test_separation_property_on_produced_decompositions():
    # validate_decomposition already checks separations; exercise it on many
    # real dependence graphs
    for m in valid_patterns(4):
        dep = dependence_graph(interference_graph(m), order_edges((1, 1, 2, 2)))
        width, order = treewidth_exact(dep)
        nice = to_nice(decomposition_from_order(dep, order))
        ok, diags = validate_decomposition(dep, nice)
        assert ok, diags
        assert nice.width == width


def test_unconditional_width_bound():
    for k in (3, 4, 5):
        for m in valid_patterns(k):
            dep = dependence_graph(interference_graph(m), order_edges((1,) * k))
            assert treewidth_exact(dep)[0] <= k - 1


def test_join_nodes_occur_for_branching_graphs():
    g = DepGraph(4, frozenset([(1, 4), (2, 4), (3, 4)]))
    width, order = treewidth_exact(g)
    nice = to_nice(decomposition_from_order(g, order))
    assert any(nd.kind == JOIN for nd in nice.nodes)
    assert validate_decomposition(g, nice)[0]
