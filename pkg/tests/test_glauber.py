from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasiline_ising.glauber import (
    AcceptTable,
    ChainState,
    CounterRNG,
    acceptance_probability,
    bottleneck_ratio,
    detailed_balance_violations,
    glauber_step,
    mixing_time_exact,
    run_chain,
    spectral_gap,
    stationary_distribution,
    stream_key,
    transition_matrix,
)
from quasiline_ising.graphs import Graph, complete_graph, empty_graph, path_graph, star_graph
from quasiline_ising.spin_models import gibbs_vector

K2 = complete_graph(2)


def dense(t):
    return t.to_sparse().toarray()


def brute_mixing_time(p, pi, threshold=0.25):
    dist = np.eye(p.shape[0])
    for step in range(10 ** 5):
        if 0.5 * np.abs(dist - pi).sum(axis=1).max() <= threshold:
            return step
        dist = dist @ p


def test_acceptance_examples():
    assert acceptance_probability(5, 0) == Fraction(1, 2)
    assert acceptance_probability(3, 1) == Fraction(3, 4)
    assert acceptance_probability(2, 3) == Fraction(8, 9)
    assert acceptance_probability(2, -3) == Fraction(1, 9)


def test_accept_table_resolves_tiny_probabilities():
    table = AcceptTable.build(2 ** 76, 3)
    i = -1 + 3  # delta = -1: accept probability ~ 2^-76
    assert table.shift[i] == 2 and table.accept_on_event[i]
    assert abs(table.residual[i] * 2.0 ** (-60) / 2.0 ** -76 - 1) < 1e-12
    j = 1 + 3
    assert not table.accept_on_event[j]  # rejection is the rare event


def test_rng_streams_are_deterministic_and_distinct():
    a = CounterRNG(stream_key(1, 2, 3))
    b = CounterRNG(stream_key(1, 2, 3))
    c = CounterRNG(stream_key(1, 2, 4))
    xs = [a.next_u64() for _ in range(5)]
    assert xs == [b.next_u64() for _ in range(5)]
    assert xs != [c.next_u64() for _ in range(5)]
    u = [CounterRNG(7, i).uniform() for i in range(1000)]
    assert 0 <= min(u) and max(u) < 1


def test_run_chain_zero_steps_returns_start():
    start = np.array([1, -1, 1], dtype=np.int8)
    run = run_chain(path_graph(3), 2, start, 0, observables=("cut",))
    assert np.array_equal(run.final.config, start) and run.final.time == 0
    assert list(run.columns["cut"]) == [2]


def test_empty_graph_state_frequencies_uniform():
    run = run_chain(empty_graph(2), 7, [1, 1], 10 ** 5, seed=3, observables=("state",))
    freq = np.bincount(run.columns["state"], minlength=4) / len(run.columns["state"])
    assert np.all(np.abs(freq - 0.25) < 0.02)


def test_k2_bichromatic_fraction():
    run = run_chain(K2, 3, [1, 1], 10 ** 6, seed=1, observables=("cut",))
    assert abs(run.columns["cut"].mean() - 0.75) < 0.01


def test_python_step_mirrors_compiled_kernel():
    g = star_graph(4)
    start = np.array([1, -1, 1, 1, -1], dtype=np.int8)
    run = run_chain(g, "2^76", start, 500, seed=9, stream=(4, 2))
    state = ChainState(start.copy(), 0, stream_key(9, 4, 2), 0)
    table = AcceptTable.build(2 ** 76, g.max_degree)
    for _ in range(500):
        state = glauber_step(g, 2 ** 76, state, table)
    assert np.array_equal(state.config, run.final.config)
    assert state.counter == run.final.counter


def test_unknown_observable_rejected():
    with pytest.raises(ValueError):
        run_chain(K2, 2, [1, 1], 10, observables=("energy",))


def test_transition_matrix_examples():
    t = transition_matrix(empty_graph(1), 5)
    assert all(t.entry(x, y) == Fraction(1, 2) for x in range(2) for y in range(2))
    t = transition_matrix(K2, 1)
    p = dense(t)
    assert np.allclose(p.sum(axis=0), 1) and np.allclose(p.sum(axis=1), 1)
    t = transition_matrix(path_graph(3), 2)
    assert np.max(np.abs(stationary_distribution(t) - gibbs_vector(path_graph(3), 2))) < 1e-12
    assert all(t.row_sum(x) == 1 for x in range(t.dim))


def test_spectral_gap_examples():
    assert spectral_gap(transition_matrix(empty_graph(1), 3)) == pytest.approx(1.0, rel=1e-8)
    assert spectral_gap(transition_matrix(empty_graph(2), 3)) == pytest.approx(0.5, rel=1e-8)
    t = transition_matrix(path_graph(3), 2)
    gap = spectral_gap(t)
    eig = np.sort(np.linalg.eigvals(dense(t)).real)
    assert gap == pytest.approx(1 - eig[-2], rel=1e-8)
    assert gap == pytest.approx(0.18426213483, rel=1e-8)  # regression baseline


def test_mixing_time_examples():
    assert mixing_time_exact(transition_matrix(empty_graph(1), 2)) == 1
    t = transition_matrix(empty_graph(2), 2)
    assert mixing_time_exact(t) == brute_mixing_time(dense(t), t.gibbs())
    slow = mixing_time_exact(transition_matrix(K2, 100))
    fast = mixing_time_exact(transition_matrix(K2, 1))
    assert slow > fast


def test_bottleneck_ratio_examples():
    rep = bottleneck_ratio(K2, 1, lambda s: s[0] > 0 and s[1] > 0)
    assert rep.set_weight == Fraction(1, 4)
    assert rep.boundary_weight == Fraction(1, 8) and rep.ratio == Fraction(1, 2)
    rep = bottleneck_ratio(empty_graph(2), 3, lambda s: s[0] > 0)
    gap = spectral_gap(transition_matrix(empty_graph(2), 3))
    assert rep.ratio == Fraction(1, 4)
    assert float(rep.ratio) ** 2 / 2 <= gap <= 2 * float(rep.ratio)
    assert rep.mixing_lower_bound() == 1


small_graphs = st.integers(1, 7).flatmap(
    lambda n: st.sets(
        st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] < e[1]),
        max_size=n * (n - 1) // 2,
    ).map(lambda es: Graph.from_edges(n, sorted(es)))
)
mus = st.fractions(min_value=Fraction(1, 5), max_value=20)


@settings(max_examples=30, deadline=None)
@given(small_graphs, mus)
def test_detailed_balance_and_stationarity(g, mu):
    t = transition_matrix(g, mu)
    assert detailed_balance_violations(t) == []
    assert np.max(np.abs(stationary_distribution(t) - t.gibbs())) < 1e-12


@settings(max_examples=30, deadline=None)
@given(small_graphs, mus, st.integers(0, 2 ** 63), st.integers(1, 50))
def test_step_changes_at_most_one_spin_and_is_reproducible(g, mu, seed, steps):
    start = np.ones(g.n, dtype=np.int8)
    a = run_chain(g, mu, start, steps, seed=seed, observables=("cut", "plus"))
    b = run_chain(g, mu, start, steps, seed=seed, observables=("cut", "plus"))
    assert np.array_equal(a.final.config, b.final.config)
    assert np.all(np.abs(np.diff(a.columns["plus"])) <= 1)
    state = ChainState(start.copy(), 0, 0, 0)
    for _ in range(steps):
        nxt = glauber_step(g, mu, state)
        assert np.count_nonzero(nxt.config != state.config) <= 1
        state = nxt


def test_tv_shrinks_with_run_length():
    g = path_graph(5)
    pi = gibbs_vector(g, 3)
    tvs = []
    for steps in (10 ** 3, 10 ** 6):
        run = run_chain(g, 3, np.ones(5), steps, seed=5, observables=("state",))
        h = np.bincount(run.columns["state"], minlength=32) / len(run.columns["state"])
        tvs.append(0.5 * np.abs(h - pi).sum())
    assert tvs[1] < tvs[0] and tvs[1] < 0.01


def test_hitting_time_event():
    run = run_chain(K2, 3, [1, 1], 10 ** 4, seed=0, observables=(), stride=0, until="cut>=1")
    assert run.hitting_time is not None and not run.censored
    assert run.final.config[0] != run.final.config[1]
    capped = run_chain(K2, Fraction(1, 10 ** 9), [1, 1], 5, seed=0, observables=(), stride=0, until="cut>=1")
    assert capped.censored
