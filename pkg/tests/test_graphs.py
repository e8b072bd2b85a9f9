import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasiline_ising.graphs import (
    GenerationError,
    Graph,
    KrauszCover,
    Multigraph,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    disjoint_union,
    dump_graph,
    graph_from_dict,
    is_claw_free,
    is_quasi_line,
    line_graph,
    line_graph_cover,
    path_graph,
    petersen_graph,
    random_bipartite_cubic,
    random_cubic,
    star_graph,
    validate_krausz_cover,
)


def brute_force_claw_free(g: Graph) -> bool:
    for quad in itertools.combinations(range(g.n), 4):
        for centre in quad:
            leaves = [x for x in quad if x != centre]
            if all(g.has_edge(centre, x) for x in leaves) and not any(
                g.has_edge(a, b) for a, b in itertools.combinations(leaves, 2)
            ):
                return False
    return True


def test_graph_rejects_bad_input():
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 0)])
    with pytest.raises(ValueError):
        Graph.from_edges(2, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Graph(2, ((1,), ()))
    with pytest.raises(ValueError):
        Multigraph.from_edges(2, [(1, 1)])


def test_line_graph_examples():
    assert line_graph(path_graph(3)).edges == ((0, 1),)
    k3 = line_graph(star_graph(3))
    assert k3.n == 3 and k3.m == 3
    parallel = line_graph(Multigraph.from_edges(2, [(0, 1), (0, 1)]))
    assert parallel.n == 2 and parallel.m == 1


def test_claw_and_quasi_line_examples():
    ok, witness = is_claw_free(star_graph(3))
    assert not ok and witness[0] == 0 and sorted(witness[1]) == [1, 2, 3]
    assert is_claw_free(complete_graph(3))[0]
    assert is_quasi_line(star_graph(3)) == (False, 0)
    assert is_quasi_line(cycle_graph(5)) == (True, None)


def test_krausz_examples():
    assert validate_krausz_cover(complete_graph(3), KrauszCover.of([{0, 1, 2}])).ok
    rep = validate_krausz_cover(star_graph(3), KrauszCover.of([{0, 1}, {0, 2}, {0, 3}]))
    assert not rep.ok and rep.overloaded_vertices == [0]
    rep = validate_krausz_cover(path_graph(3), KrauszCover.of([{0, 2}]))
    assert rep.non_cliques == [0] and set(rep.uncovered_edges) == {(0, 1), (1, 2)}


def test_random_cubic_examples():
    assert random_cubic(4, 3).edges == complete_graph(4).edges
    g = random_cubic(6, 1)
    assert g.is_cubic() and g.is_connected()
    for bad in (5, 2):
        with pytest.raises(ValueError):
            random_cubic(bad, 0)


def test_random_bipartite_cubic_examples():
    k33 = random_bipartite_cubic(3, 0)
    assert k33.edges == complete_bipartite(3, 3).edges
    g = random_bipartite_cubic(4, 7)
    left, right = g.bipartition
    assert g.is_cubic()
    assert all((u in left) != (v in left) for u, v in g.edges)
    with pytest.raises((ValueError, GenerationError)):
        random_bipartite_cubic(2, 0)


def test_petersen_and_union():
    p = petersen_graph()
    assert p.n == 10 and p.m == 15 and p.is_cubic()
    u = disjoint_union(complete_graph(3), complete_graph(3))
    assert u.n == 6 and not u.is_connected()


def test_json_roundtrip():
    g = random_bipartite_cubic(4, 2)
    assert graph_from_dict(json.loads(dump_graph(g))) == g
    h = Multigraph.from_edges(3, [(0, 1), (0, 1), (1, 2)])
    assert graph_from_dict(json.loads(dump_graph(h))) == h


multigraphs = st.integers(2, 7).flatmap(
    lambda n: st.lists(
        st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1]),
        min_size=1,
        max_size=14,
    ).map(lambda es: Multigraph.from_edges(n, es))
)


@settings(max_examples=60, deadline=None)
@given(multigraphs)
def test_line_graphs_are_quasi_line_with_valid_cover(h):
    g = line_graph(h)
    assert is_quasi_line(g)[0]
    assert validate_krausz_cover(g, line_graph_cover(h)).ok


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 8).flatmap(lambda n: st.tuples(st.just(n), st.sets(
    st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] < e[1]), max_size=16))))
def test_simple_line_graph_cover_cliques_meet_in_at_most_one(data):
    n, edges = data
    if not edges:
        return
    h = Graph.from_edges(n, sorted(edges))
    cover = line_graph_cover(h)
    for a, b in itertools.combinations(cover.cliques, 2):
        assert len(a & b) <= 1


random_graphs = st.integers(1, 8).flatmap(
    lambda n: st.sets(
        st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] < e[1]),
        max_size=n * (n - 1) // 2,
    ).map(lambda es: Graph.from_edges(n, sorted(es)))
)


@settings(max_examples=80, deadline=None)
@given(random_graphs)
def test_quasi_line_implies_claw_free_and_checker_matches_brute_force(g):
    claw_free = is_claw_free(g)[0]
    assert claw_free == brute_force_claw_free(g)
    if is_quasi_line(g)[0]:
        assert claw_free


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 8).map(lambda k: 2 * k), st.integers(0, 2 ** 32))
def test_generators_reproducible(n, seed):
    assert random_cubic(n, seed) == random_cubic(n, seed)
    if n // 2 >= 3:
        assert random_bipartite_cubic(n // 2, seed) == random_bipartite_cubic(n // 2, seed)
