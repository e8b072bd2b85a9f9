from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasiline_ising.cuts import (
    Decoder,
    SeparationError,
    decode_experiment,
    distinguisher,
    exact_partition_oracle,
    flip_local_search,
    is_local_optimum,
    maxcut_exact,
    separation_mu,
)
from quasiline_ising.enumeration import EnumerationCapError
from quasiline_ising.graphs import complete_bipartite, complete_graph, cycle_graph, empty_graph, random_cubic
from quasiline_ising.spin_models import all_cut_sizes, cut_size

K4 = complete_graph(4)


def test_maxcut_examples():
    assert maxcut_exact(K4).cut_size == 4
    assert maxcut_exact(complete_bipartite(3, 3)).cut_size == 9
    assert maxcut_exact(cycle_graph(5)).cut_size == 4
    r = maxcut_exact(random_cubic(22, 3))
    assert r.cut_size == cut_size(random_cubic(22, 3), r.config)
    with pytest.raises(EnumerationCapError):
        maxcut_exact(empty_graph(31))


def test_local_search_examples():
    k33 = complete_bipartite(3, 3)
    assert flip_local_search(k33, [1] * 6).cut_size == 9
    opt = maxcut_exact(K4).config
    r = flip_local_search(K4, opt)
    assert np.array_equal(r.config, opt) and r.certificate.endswith("0 flips")


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10).map(lambda k: 2 * k), st.integers(0, 10 ** 6), st.integers(0, 10 ** 6),
       st.one_of(st.none(), st.integers(0, 100)))
def test_local_search_properties(n, gseed, sseed, order_seed):
    g = random_cubic(n, gseed)
    start = np.random.default_rng(sseed).choice([-1, 1], size=n)
    r = flip_local_search(g, start, seed=order_seed)
    assert r.cut_size == cut_size(g, r.config)
    assert is_local_optimum(g, r.config)
    assert r.cut_size >= n
    assert maxcut_exact(g).cut_size >= r.cut_size


def test_maxcut_matches_full_enumeration():
    g = random_cubic(12, 5)
    assert maxcut_exact(g).cut_size == int(all_cut_sizes(g).max())


@pytest.fixture(scope="module")
def k4_decoder():
    return Decoder(K4)


def test_decoder_at_mu_one_is_fraction_of_good_configs(k4_decoder):
    assert k4_decoder.success_probability(1) == Fraction(6, 16)


def test_decoder_monotone_and_threshold(k4_decoder):
    grid = [Fraction(1)] + [Fraction(2) ** k for k in range(0, 40, 3)]
    probs = [k4_decoder.success_probability(m) for m in grid]
    assert all(a <= b for a, b in zip(probs, probs[1:]))
    assert probs[-1] > 1 - Fraction(1, 10 ** 9)
    mu_star = k4_decoder.minimal_mu()
    assert k4_decoder.success_probability(mu_star) >= Fraction(3, 4)
    assert k4_decoder.success_probability(mu_star - 1) < Fraction(3, 4)


def test_decode_experiment_monte_carlo_within_three_sigma():
    r = decode_experiment(K4, "16", samples=20_000, seed=3)
    assert r.within_3_sigma
    assert r.to_dict()["C"] == 4


def test_distinguisher_matches_maxcut_and_is_robust():
    oracle = exact_partition_oracle(K4)
    mu = separation_mu(4)
    for c in range(K4.m + 1):
        truth = maxcut_exact(K4).cut_size > c
        for scale in (1, 2, Fraction(1, 2)):
            assert distinguisher(K4, mu, c, lambda m, s=scale: s * oracle(m)).above == truth


def test_distinguisher_refuses_small_mu():
    with pytest.raises(SeparationError) as err:
        distinguisher(K4, 2 ** 38, 2, exact_partition_oracle(K4))
    assert err.value.minimal_mu == 2 ** 38 + 1
