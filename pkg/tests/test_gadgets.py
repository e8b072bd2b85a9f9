import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasiline_ising import polynomials as poly
from quasiline_ising.enumeration import spins_from_index
from quasiline_ising.gadgets import (
    build_gadget,
    build_gstar,
    build_h_gadget,
    fiber_count,
    gadget_internal_audit,
    gadget_table,
    line_supergraph,
    majority_count,
    perfect_config,
    phi,
    sandwich_check,
    weight_gain_from_perfecting,
    z_sigma,
    z_sigma_enumerated,
    z_sigma_polynomial,
)
from quasiline_ising.graphs import (
    complete_bipartite,
    complete_graph,
    cycle_graph,
    is_claw_free,
    is_quasi_line,
    random_cubic,
    validate_krausz_cover,
)
from quasiline_ising.spin_models import cut_size

K4 = complete_graph(4)


@pytest.fixture(scope="module")
def k4_h():
    return build_gstar(K4, "H")


@pytest.fixture(scope="module")
def k4_j():
    return build_gstar(K4, "J")


def test_h_gadget_structure():
    g, roles = build_h_gadget()
    assert g.n == 9 and g.m == 27
    deg = {r[0]: {g.degree(v) for v, rr in enumerate(roles) if rr[0] == r[0]} for r in roles}
    assert deg == {"T": {5}, "A": {8}, "B": {5}}
    assert not any(g.has_edge(t, b) for t in range(3) for b in range(6, 9))


def test_j_gadget_structure():
    g = build_gadget("J")
    assert g.n == 6 and g.m == 9


def test_gstar_structure(k4_h, k4_j):
    g = k4_h.gstar
    assert (g.n, g.m, g.max_degree) == (36, 114, 8)
    assert is_quasi_line(g)[0]
    assert validate_krausz_cover(g, k4_h.krausz).ok
    assert (k4_j.gstar.n, k4_j.gstar.m) == (24, 42) and k4_j.gstar.max_degree <= 6
    assert build_gstar(complete_bipartite(3, 3), "H").gstar.n == 54
    with pytest.raises(ValueError):
        build_gstar(cycle_graph(4), "H")


def test_gstar_claw_free_matches_exhaustive_search(k4_h):
    g = k4_h.gstar
    found_claw = False
    for quad in itertools.combinations(range(g.n), 4):
        for c in quad:
            leaves = [x for x in quad if x != c]
            if all(g.has_edge(c, x) for x in leaves) and not any(
                g.has_edge(a, b) for a, b in itertools.combinations(leaves, 2)
            ):
                found_claw = True
    assert is_claw_free(g)[0] and not found_claw


def test_line_supergraph_of_gdagger(k4_j):
    sup, cover = line_supergraph(k4_j)
    assert sup.max_degree <= 6
    assert validate_krausz_cover(sup, cover).ok
    assert all(sup.has_edge(u, v) for u, v in k4_j.gstar.edges)


def test_terminal_labelling_convention(k4_h):
    lay = k4_h.layout
    for v in range(4):
        for rank, u in enumerate(K4.adj[v]):
            assert lay.terminal(v, u) == 9 * v + rank
    assert sorted(sum(map(list, lay.external), [])) == sorted(sum(map(list, lay.terminals), []))


def test_phi_examples(k4_h):
    lay = k4_h.layout
    s = -np.ones(36, dtype=np.int8)
    assert np.all(phi(lay, s) == -1)
    s[list(lay.terminals[0][:2])] = 1
    assert phi(lay, s)[0] == 1


def test_perfect_config_weights(k4_h, k4_j):
    sigma = np.array([1, 1, -1, -1])
    assert cut_size(K4, sigma) == 4
    assert cut_size(k4_h.gstar, perfect_config(k4_h.layout, sigma)) == 72 + 4
    assert cut_size(k4_j.gstar, perfect_config(k4_j.layout, sigma)) == 36 + 4
    for i in range(16):
        s = spins_from_index(i, 4)
        assert np.array_equal(phi(k4_h.layout, perfect_config(k4_h.layout, s)), s)


def test_gadget_audits():
    h = gadget_internal_audit("H")
    assert (h.max_cut, len(h.argmax), h.second_best) == (18, 2, 17)
    assert sum(h.histogram) == 512 and h.histogram[0] == 2
    j = gadget_internal_audit("J")
    assert (j.max_cut, len(j.argmax), j.second_best) == (9, 2, 6)
    assert cut_size(build_gadget("H"), np.ones(9)) == 0


def test_fiber_counts(k4_h, k4_j):
    assert majority_count("H", 1) == majority_count("H", -1) == 256
    assert fiber_count(k4_h.layout) == 2 ** 32
    assert fiber_count(k4_h.layout, [1, -1, 1, 1]) == 2 ** 32
    assert majority_count("J", 1) == 32
    assert fiber_count(k4_j.layout) == 2 ** 20


def test_gadget_table_invariants():
    table = gadget_table("H")
    assert all(sum(p) == 64 for p in table.values())
    assert sum(sum(p) for p in table.values()) == 512
    top = [t for t, p in table.items() if poly.degree(p) == 18]
    assert sorted(top) == [0, 7]
    majority_plus = [p for t, p in table.items() if t.bit_count() >= 2]
    assert sum(map(sum, majority_plus)) == 256


def test_weight_monotonicity():
    assert weight_gain_from_perfecting("H") >= 0
    assert weight_gain_from_perfecting("J") >= 0


def test_sandwich_on_k4(k4_h):
    for i in range(16):
        s = spins_from_index(i, 4)
        rep = sandwich_check(k4_h.layout, s)
        assert rep.ok and rep.degree == 72 + rep.cut and rep.mass == 2 ** 32


def test_marginalisation_matches_brute_force_on_gdagger(k4_j):
    brute = z_sigma_enumerated(k4_j)
    for i in range(16):
        assert z_sigma_polynomial(k4_j.layout, spins_from_index(i, 4)) == brute[i]
        for mu in (1, 2, 3):
            assert z_sigma(k4_j.layout, mu, spins_from_index(i, 4)).exact == poly.evaluate(brute[i], mu)


def test_serialisation_has_layout(k4_h):
    d = json.loads(json.dumps(k4_h.to_dict()))
    roles = d["layout"]["roles"]
    assert len(roles) == 36 and {r["role"] for r in roles} == {"T", "A", "B"}
    assert d["n"] == 36 and len(d["edges"]) == 114


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([4, 6, 8]), st.integers(0, 10 ** 6), st.sampled_from(["H", "J"]), st.data())
def test_perfect_roundtrip_random_base(n, seed, kind, data):
    base = random_cubic(n, seed)
    out = build_gstar(base, kind)
    sigma = np.array(data.draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n)), dtype=np.int8)
    star = perfect_config(out.layout, sigma)
    assert np.array_equal(phi(out.layout, star), sigma)
    spec = out.layout.spec
    assert cut_size(out.gstar, star) == spec.perfect_cut * n + cut_size(base, sigma)
